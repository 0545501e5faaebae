//! Experiment configuration files.
//!
//! Flat `key = value` text, `#` comments, unknown keys are hard errors so a
//! typo cannot silently fall back to a default. Keys:
//!
//! ```text
//! model = ising3x3.field      # model file, relative to this config
//! target = (1,1)              # target site label
//! n_grid = 100:10000:100      # lo:hi:step, or a whitespace list of sizes
//! replicas = 100
//! base_seed = 20110901
//! s = auto                    # cardinality bound; auto = all observed sites
//! lambda = 100                # mass-filter multiplier
//! delta = 7.389056098930650   # confidence parameter (default e^2)
//! p_star = auto               # conditional floor; auto = 1/ln n
//! loss = l2                   # l2 | kl
//! theory_k = 2                # K in the theoretical penalty constants
//! k_grid = 0.05:8:160         # lo:hi:count sweep for the slope heuristic
//! complexity = dim            # dim | l2var | klvar
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::risk::LossKind;
use crate::slope::ComplexityKind;

/// Floor on conditional probabilities in the Küllback filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PStar {
    /// `1 / ln n`, shrinking with the sample size.
    Auto,
    Fixed(f64),
}

impl PStar {
    pub fn resolve(&self, n: usize) -> f64 {
        match self {
            PStar::Auto => 1.0 / (n as f64).ln(),
            PStar::Fixed(p) => *p,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model_path: PathBuf,
    pub target: String,
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    pub base_seed: u64,
    /// `None` means "all observed sites".
    pub max_cardinality: Option<usize>,
    pub lambda: f64,
    pub delta: f64,
    pub p_star: PStar,
    pub loss: LossKind,
    pub theory_k: f64,
    pub k_grid: Vec<f64>,
    pub complexity: ComplexityKind,
}

impl ExperimentConfig {
    /// Stable dump of every field that influences the numbers; hashing this
    /// identifies a run up to RNG implementation.
    pub fn canonical_string(&self) -> String {
        let n_grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let k_grid: Vec<String> = self.k_grid.iter().map(|k| format!("{k}")).collect();
        let p_star = match self.p_star {
            PStar::Auto => "auto".to_string(),
            PStar::Fixed(p) => format!("{p}"),
        };
        let s = match self.max_cardinality {
            None => "auto".to_string(),
            Some(s) => s.to_string(),
        };
        format!(
            "model={}\ntarget={}\nn_grid={}\nreplicas={}\nbase_seed={}\ns={}\nlambda={}\ndelta={}\np_star={}\nloss={}\ntheory_k={}\nk_grid={}\ncomplexity={}\n",
            self.model_path.display(),
            self.target,
            n_grid.join(","),
            self.replicas,
            self.base_seed,
            s,
            self.lambda,
            self.delta,
            p_star,
            self.loss,
            self.theory_k,
            k_grid.join(","),
            self.complexity,
        )
    }

    pub fn config_hash(&self) -> u64 {
        super::run::fnv1a64(self.canonical_string().as_bytes())
    }
}

fn parse_n_grid(value: &str, origin: &Path, line: usize) -> Result<Vec<usize>> {
    let grid: Vec<usize> =
        if value.contains(':') {
            let parts: Vec<&str> = value.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::parse(
                    origin,
                    line,
                    "n_grid range must be lo:hi:step",
                ));
            }
            let lo: usize = parts[0].trim().parse().map_err(|_| {
                Error::parse(origin, line, format!("bad n_grid start {:?}", parts[0]))
            })?;
            let hi: usize = parts[1].trim().parse().map_err(|_| {
                Error::parse(origin, line, format!("bad n_grid stop {:?}", parts[1]))
            })?;
            let step: usize = parts[2].trim().parse().map_err(|_| {
                Error::parse(origin, line, format!("bad n_grid step {:?}", parts[2]))
            })?;
            if step == 0 {
                return Err(Error::parse(origin, line, "n_grid step must be positive"));
            }
            (lo..=hi).step_by(step).collect()
        } else {
            value
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::parse(origin, line, format!("bad sample size {t:?}")))
                })
                .collect::<Result<Vec<usize>>>()?
        };
    if grid.is_empty() {
        return Err(Error::parse(origin, line, "n_grid is empty"));
    }
    if grid.contains(&0) {
        return Err(Error::parse(origin, line, "sample sizes must be positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parse(
            origin,
            line,
            "n_grid must be strictly increasing",
        ));
    }
    Ok(grid)
}

fn parse_k_grid(value: &str, origin: &Path, line: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::parse(origin, line, "k_grid must be lo:hi:count"));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::parse(origin, line, format!("bad k_grid start {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::parse(origin, line, format!("bad k_grid stop {:?}", parts[1])))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::parse(origin, line, format!("bad k_grid count {:?}", parts[2])))?;
    if count < 2 || !(hi > lo) || !(lo > 0.0) {
        return Err(Error::parse(
            origin,
            line,
            "k_grid needs 0 < lo < hi and at least 2 points",
        ));
    }
    Ok((0..count)
        .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
        .collect())
}

pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let dir = origin.parent().unwrap_or_else(|| Path::new("."));
    let mut model_path: Option<PathBuf> = None;
    let mut target: Option<String> = None;
    let mut n_grid: Option<Vec<usize>> = None;
    let mut replicas: Option<usize> = None;
    let mut base_seed: Option<u64> = None;
    let mut max_cardinality: Option<Option<usize>> = None;
    let mut lambda: Option<f64> = None;
    let mut delta: Option<f64> = None;
    let mut p_star: Option<PStar> = None;
    let mut loss: Option<LossKind> = None;
    let mut theory_k: Option<f64> = None;
    let mut k_grid: Option<Vec<f64>> = None;
    let mut complexity: Option<ComplexityKind> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::parse(origin, line, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let dup = |name: &str| Error::parse(origin, line, format!("duplicate `{name}`"));
        match key {
            "model" => {
                if model_path.replace(dir.join(value)).is_some() {
                    return Err(dup("model"));
                }
            }
            "target" => {
                if target.replace(value.to_owned()).is_some() {
                    return Err(dup("target"));
                }
            }
            "n_grid" => {
                if n_grid.replace(parse_n_grid(value, origin, line)?).is_some() {
                    return Err(dup("n_grid"));
                }
            }
            "replicas" => {
                let r = value.parse::<usize>().map_err(|_| {
                    Error::parse(origin, line, format!("bad replica count {value:?}"))
                })?;
                if r == 0 {
                    return Err(Error::parse(origin, line, "replicas must be at least 1"));
                }
                if replicas.replace(r).is_some() {
                    return Err(dup("replicas"));
                }
            }
            "base_seed" => {
                let s = value
                    .parse::<u64>()
                    .map_err(|_| Error::parse(origin, line, format!("bad seed {value:?}")))?;
                if base_seed.replace(s).is_some() {
                    return Err(dup("base_seed"));
                }
            }
            "s" => {
                let v = if value == "auto" {
                    None
                } else {
                    Some(value.parse::<usize>().map_err(|_| {
                        Error::parse(origin, line, format!("bad cardinality bound {value:?}"))
                    })?)
                };
                if max_cardinality.replace(v).is_some() {
                    return Err(dup("s"));
                }
            }
            "lambda" => {
                let v = value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, line, format!("bad lambda {value:?}")))?;
                if lambda.replace(v).is_some() {
                    return Err(dup("lambda"));
                }
            }
            "delta" => {
                let v = value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, line, format!("bad delta {value:?}")))?;
                if delta.replace(v).is_some() {
                    return Err(dup("delta"));
                }
            }
            "p_star" => {
                let v =
                    if value == "auto" {
                        PStar::Auto
                    } else {
                        PStar::Fixed(value.parse::<f64>().map_err(|_| {
                            Error::parse(origin, line, format!("bad p_star {value:?}"))
                        })?)
                    };
                if p_star.replace(v).is_some() {
                    return Err(dup("p_star"));
                }
            }
            "loss" => {
                let v = match value {
                    "l2" => LossKind::L2,
                    "kl" => LossKind::Kullback,
                    other => {
                        return Err(Error::parse(
                            origin,
                            line,
                            format!("loss must be l2 or kl, got {other:?}"),
                        ))
                    }
                };
                if loss.replace(v).is_some() {
                    return Err(dup("loss"));
                }
            }
            "theory_k" => {
                let v = value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, line, format!("bad theory_k {value:?}")))?;
                if theory_k.replace(v).is_some() {
                    return Err(dup("theory_k"));
                }
            }
            "k_grid" => {
                if k_grid.replace(parse_k_grid(value, origin, line)?).is_some() {
                    return Err(dup("k_grid"));
                }
            }
            "complexity" => {
                let v = match value {
                    "dim" => ComplexityKind::DimensionOverN,
                    "l2var" => ComplexityKind::L2Variance,
                    "klvar" => ComplexityKind::KlVariance,
                    other => {
                        return Err(Error::parse(
                            origin,
                            line,
                            format!("complexity must be dim, l2var or klvar, got {other:?}"),
                        ))
                    }
                };
                if complexity.replace(v).is_some() {
                    return Err(dup("complexity"));
                }
            }
            other => {
                return Err(Error::parse(origin, 0, format!("unknown key {other:?}")));
            }
        }
    }

    let model_path = model_path.ok_or_else(|| Error::parse(origin, 0, "missing `model`"))?;
    let target = target.ok_or_else(|| Error::parse(origin, 0, "missing `target`"))?;
    Ok(ExperimentConfig {
        model_path,
        target,
        n_grid: n_grid.unwrap_or_else(|| (1..=100).map(|k| k * 100).collect()),
        replicas: replicas.unwrap_or(100),
        base_seed: base_seed.unwrap_or(20110901),
        max_cardinality: max_cardinality.unwrap_or(None),
        lambda: lambda.unwrap_or(100.0),
        delta: delta.unwrap_or(std::f64::consts::E * std::f64::consts::E),
        p_star: p_star.unwrap_or(PStar::Auto),
        loss: loss.unwrap_or(LossKind::L2),
        theory_k: theory_k.unwrap_or(2.0),
        k_grid: k_grid.unwrap_or_else(crate::slope::default_k_grid),
        complexity: complexity.unwrap_or(ComplexityKind::DimensionOverN),
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> PathBuf {
        PathBuf::from("configs/test.cfg")
    }

    #[test]
    fn parses_a_full_config() {
        let text = "
            model = ising3x3.field
            target = (1,1)
            n_grid = 100:500:200
            replicas = 7
            base_seed = 99
            s = 4
            lambda = 120
            delta = 10
            p_star = 0.01
            loss = kl
            theory_k = 3
            k_grid = 0.1:2:20
            complexity = l2var
        ";
        let cfg = parse_config(text, &origin()).unwrap();
        assert_eq!(cfg.model_path, PathBuf::from("configs/ising3x3.field"));
        assert_eq!(cfg.n_grid, vec![100, 300, 500]);
        assert_eq!(cfg.replicas, 7);
        assert_eq!(cfg.max_cardinality, Some(4));
        assert_eq!(cfg.loss, LossKind::Kullback);
        assert_eq!(cfg.k_grid.len(), 20);
        assert_eq!(cfg.complexity, ComplexityKind::L2Variance);
        assert_eq!(cfg.p_star, PStar::Fixed(0.01));
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config("model = m.field\ntarget = a\n", &origin()).unwrap();
        assert_eq!(cfg.n_grid.len(), 100);
        assert_eq!(cfg.replicas, 100);
        assert_eq!(cfg.lambda, 100.0);
        assert!((cfg.delta - std::f64::consts::E * std::f64::consts::E).abs() < 1e-12);
        assert_eq!(cfg.k_grid.len(), 160);
        assert!((cfg.k_grid[0] - 0.05).abs() < 1e-12);
        assert!((cfg.k_grid[159] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let text = "model = m.field\ntarget = a\nreplica = 5\n";
        assert!(parse_config(text, &origin()).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(parse_config("model=m\ntarget=a\nn_grid = 500 100\n", &origin()).is_err());
        assert!(parse_config("model=m\ntarget=a\nn_grid = 0 100\n", &origin()).is_err());
        assert!(parse_config("model=m\ntarget=a\nk_grid = 1:0.5:10\n", &origin()).is_err());
    }

    #[test]
    fn auto_p_star_shrinks_with_n() {
        assert!((PStar::Auto.resolve(100) - 1.0 / 100f64.ln()).abs() < 1e-15);
        assert!(PStar::Auto.resolve(10_000) < PStar::Auto.resolve(100));
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config("model = m.field\ntarget = a\n", &origin()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.base_seed += 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
