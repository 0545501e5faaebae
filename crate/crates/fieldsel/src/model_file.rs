//! Text format for model descriptions.
//!
//! A model file is a flat `key = value` list; `#` starts a comment and blank
//! lines are ignored. Keys:
//!
//! ```text
//! grid = 3x3                 # rows x cols, sites labelled "(r,c)", or:
//! sites = n1 n2 n3           # explicit whitespace-separated labels
//! alphabet = -1 1            # optional, defaults to the spin pair -1 1
//! edge = (0,0) (0,1) 0.2     # repeatable: site, site, coupling
//! field = (1,1) 0.05         # repeatable: site, external field
//! ```
//!
//! Exactly one of `grid`/`sites` must appear. Unknown keys are errors, and
//! every parse error carries its line number. With the spin alphabet the
//! model is built in pairwise form (closed-form conditionals available);
//! other alphabets get an equivalent pairwise energy `J·x(u)·x(v)` through
//! clique potentials.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Alphabet, CliquePotential, GibbsModel, SiteSet};

#[derive(Default)]
struct RawModel {
    grid: Option<(usize, usize)>,
    sites: Option<Vec<String>>,
    alphabet: Option<Vec<i64>>,
    edges: Vec<(String, String, f64, usize)>,
    fields: Vec<(String, f64, usize)>,
}

pub fn parse_model(text: &str, origin: &Path) -> Result<GibbsModel> {
    let mut raw = RawModel::default();
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
        match key {
            "grid" => {
                if raw.grid.is_some() {
                    return Err(Error::parse(origin, line, "duplicate `grid`"));
                }
                let Some((r, c)) = value.split_once('x') else {
                    return Err(Error::parse(origin, line, "grid must look like `3x3`"));
                };
                let rows = r
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(origin, line, format!("bad row count {r:?}")))?;
                let cols = c
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(origin, line, format!("bad column count {c:?}")))?;
                raw.grid = Some((rows, cols));
            }
            "sites" => {
                if raw.sites.is_some() {
                    return Err(Error::parse(origin, line, "duplicate `sites`"));
                }
                let labels: Vec<String> = value.split_whitespace().map(str::to_owned).collect();
                if labels.is_empty() {
                    return Err(Error::parse(
                        origin,
                        line,
                        "`sites` needs at least one label",
                    ));
                }
                raw.sites = Some(labels);
            }
            "alphabet" => {
                if raw.alphabet.is_some() {
                    return Err(Error::parse(origin, line, "duplicate `alphabet`"));
                }
                let symbols = value
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<i64>()
                            .map_err(|_| Error::parse(origin, line, format!("bad symbol {t:?}")))
                    })
                    .collect::<Result<Vec<i64>>>()?;
                raw.alphabet = Some(symbols);
            }
            "edge" => {
                let tokens: Vec<&str> = value.split_whitespace().collect();
                if tokens.len() != 3 {
                    return Err(Error::parse(
                        origin,
                        line,
                        "edge needs `site site coupling`",
                    ));
                }
                let coupling = tokens[2].parse::<f64>().map_err(|_| {
                    Error::parse(origin, line, format!("bad coupling {:?}", tokens[2]))
                })?;
                raw.edges
                    .push((tokens[0].to_owned(), tokens[1].to_owned(), coupling, line));
            }
            "field" => {
                let tokens: Vec<&str> = value.split_whitespace().collect();
                if tokens.len() != 2 {
                    return Err(Error::parse(origin, line, "field needs `site value`"));
                }
                let h = tokens[1].parse::<f64>().map_err(|_| {
                    Error::parse(origin, line, format!("bad field value {:?}", tokens[1]))
                })?;
                raw.fields.push((tokens[0].to_owned(), h, line));
            }
            other => {
                return Err(Error::parse(origin, line, format!("unknown key {other:?}")));
            }
        }
    }

    let sites = match (raw.grid, raw.sites) {
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                origin,
                0,
                "give either `grid` or `sites`, not both",
            ))
        }
        (Some((rows, cols)), None) => SiteSet::grid(rows, cols)?,
        (None, Some(labels)) => SiteSet::new(labels)?,
        (None, None) => return Err(Error::parse(origin, 0, "missing `grid` or `sites`")),
    };
    let alphabet = match raw.alphabet {
        Some(symbols) => Alphabet::new(symbols)?,
        None => Alphabet::spin(),
    };

    let mut pairs = Vec::with_capacity(raw.edges.len());
    for (u, v, j, line) in &raw.edges {
        let ui = sites
            .index_of(u)
            .ok_or_else(|| Error::parse(origin, *line, format!("unknown site {u:?}")))?;
        let vi = sites
            .index_of(v)
            .ok_or_else(|| Error::parse(origin, *line, format!("unknown site {v:?}")))?;
        pairs.push((ui, vi, *j));
    }
    let mut fields = vec![0.0; sites.len()];
    for (u, h, line) in &raw.fields {
        let ui = sites
            .index_of(u)
            .ok_or_else(|| Error::parse(origin, *line, format!("unknown site {u:?}")))?;
        fields[ui] += h;
    }

    if alphabet.is_spin() {
        GibbsModel::build_ising(sites, &pairs, Some(&fields))
    } else {
        let a = alphabet.size();
        let mut cliques = Vec::new();
        for &(u, v, j) in &pairs {
            if u == v {
                return Err(Error::validation(format!("self-pair ({u}, {u})")));
            }
            let mut log_weights = Vec::with_capacity(a * a);
            for sv in 0..a {
                for su in 0..a {
                    log_weights.push(j * alphabet.symbol(su) as f64 * alphabet.symbol(sv) as f64);
                }
            }
            cliques.push(CliquePotential {
                sites: vec![u, v],
                log_weights,
            });
        }
        for (u, &h) in fields.iter().enumerate() {
            if h != 0.0 {
                cliques.push(CliquePotential {
                    sites: vec![u],
                    log_weights: (0..a).map(|s| h * alphabet.symbol(s) as f64).collect(),
                });
            }
        }
        GibbsModel::from_clique_potentials(sites, alphabet, cliques)
    }
}

pub fn load_model(path: &Path) -> Result<GibbsModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Configuration;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("test.field")
    }

    #[test]
    fn parses_a_grid_model() {
        let text = "
            # toy chain
            grid = 1x3
            alphabet = -1 1
            edge = (0,0) (0,1) 0.5
            edge = (0,1) (0,2) 0.5
        ";
        let model = parse_model(text, &origin()).unwrap();
        assert_eq!(model.site_count(), 3);
        model.validate().unwrap();
        let hood = model.true_neighborhood(1).unwrap();
        assert_eq!(hood.cardinality(), 3);
    }

    #[test]
    fn parses_explicit_sites_and_fields() {
        let text = "
            sites = a b
            edge = a b 0.2
            field = a 0.1
        ";
        let model = parse_model(text, &origin()).unwrap();
        assert_eq!(model.site_count(), 2);
        // The field must tilt the single-site marginal towards +1.
        let plus = Configuration::from_symbols(model.alphabet(), &[1, 1]).unwrap();
        let minus = Configuration::from_symbols(model.alphabet(), &[-1, -1]).unwrap();
        assert!(model.joint_probability(&plus).unwrap() > model.joint_probability(&minus).unwrap());
    }

    #[test]
    fn non_spin_alphabet_goes_through_cliques() {
        let text = "
            sites = a b
            alphabet = 0 1 2
            edge = a b 0.3
        ";
        let model = parse_model(text, &origin()).unwrap();
        assert_eq!(model.alphabet_size(), 3);
        assert_eq!(model.joint_table().len(), 9);
        model.validate().unwrap();
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "grid = 3x3\nedge = (0,0) (9,9) 0.2\n";
        match parse_model(text, &origin()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "grid = 3x3\nwhatever = 1\n";
        match parse_model(text, &origin()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_or_conflicting_site_sources() {
        assert!(parse_model("alphabet = -1 1\n", &origin()).is_err());
        assert!(parse_model("grid = 2x2\nsites = a b\n", &origin()).is_err());
    }
}
