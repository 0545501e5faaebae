//! Slope-heuristic calibration of the penalty constant.
//!
//! Sweeping the constant `K` in `pen(V) = K·Δ_V` reveals a jump: below a
//! minimal constant the selected complexity stays maximal, above it the
//! selection collapses to small models. The calibrated selection runs at
//! twice the detected minimal constant.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{GibbsModel, SiteSubset};
use crate::risk::{LossKind, RiskEngine};
use crate::selection::{argmin_candidates, fit_term, ModelCollection};
use crate::tables::Estimator;

/// The complexity measure `Δ_V` multiplying the swept constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityKind {
    /// `a^v / n`; computable without the ground truth.
    DimensionOverN,
    /// `‖P_{i|V} - fitted‖²` under the fitted context weights. Diagnostic
    /// only: requires the ground-truth model.
    L2Variance,
    /// The fitted-weight divergence of the fitted from the true conditional.
    /// Diagnostic only: requires the ground-truth model.
    KlVariance,
}

impl std::fmt::Display for ComplexityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ComplexityKind::DimensionOverN => "dim",
            ComplexityKind::L2Variance => "l2var",
            ComplexityKind::KlVariance => "klvar",
        };
        write!(f, "{s}")
    }
}

/// How the complexity jump is located on the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpRule {
    /// Largest drop between consecutive grid points (scale-free, default).
    LargestDrop,
    /// Largest drop relative to the pre-drop complexity.
    LargestRelativeDrop,
}

/// One grid point of a penalty path.
#[derive(Debug, Clone, Copy)]
pub struct PathPoint {
    pub k: f64,
    pub chosen: SiteSubset,
    pub criterion: f64,
    pub complexity: f64,
    pub tie_break_applied: bool,
}

/// The selections along a grid of penalty constants, together with the
/// shared fit and complexity tables they were computed from.
#[derive(Debug, Clone)]
pub struct PenaltyPath {
    pub k_grid: Vec<f64>,
    pub points: Vec<PathPoint>,
    pub complexity_kind: ComplexityKind,
    pub fit_terms: BTreeMap<SiteSubset, f64>,
    pub complexities: BTreeMap<SiteSubset, f64>,
}

impl PenaltyPath {
    /// Largest complexity over the whole candidate collection.
    pub fn max_complexity(&self) -> f64 {
        self.complexities.values().cloned().fold(0.0, f64::max)
    }

    /// Penalized selection at an arbitrary constant, reusing the cached
    /// tables; no grid snapping.
    pub fn select_at(&self, k: f64) -> Result<PathPoint> {
        let (chosen, criterion, tie_break_applied) = argmin_candidates(
            self.fit_terms
                .iter()
                .map(|(&c, &fit)| (c, fit + k * self.complexities[&c])),
        )
        .ok_or(Error::EmptyCollection)?;
        Ok(PathPoint {
            k,
            chosen,
            criterion,
            complexity: self.complexities[&chosen],
            tie_break_applied,
        })
    }
}

/// The default sweep: 160 constants uniform on (0, 8].
pub fn default_k_grid() -> Vec<f64> {
    (1..=160).map(|j| j as f64 * 8.0 / 160.0).collect()
}

/// Build the complexity table `Δ_V` for the chosen kind. The diagnostic
/// kinds need the ground-truth engine.
fn complexity_table(
    coll: &ModelCollection,
    est: Estimator<'_>,
    engine: Option<&RiskEngine<'_>>,
    kind: ComplexityKind,
    n: usize,
) -> Result<BTreeMap<SiteSubset, f64>> {
    let a = est.alphabet_size() as f64;
    let mut table = BTreeMap::new();
    for &candidate in &coll.candidates {
        let delta = match kind {
            ComplexityKind::DimensionOverN => a.powi(candidate.cardinality() as i32) / n as f64,
            ComplexityKind::L2Variance => engine
                .ok_or_else(|| {
                    Error::validation("the l2-variance complexity needs the ground-truth model")
                })?
                .empirical_l2_variance(est, candidate)?,
            ComplexityKind::KlVariance => engine
                .ok_or_else(|| {
                    Error::validation("the kl-variance complexity needs the ground-truth model")
                })?
                .empirical_kl_variance(est, candidate)?,
        };
        table.insert(candidate, delta);
    }
    Ok(table)
}

/// Run the selection once per grid constant with `pen(V) = K·Δ_V`. Fit and
/// complexity tables are computed once and shared across the grid.
pub fn penalty_path(
    coll: &ModelCollection,
    est: Estimator<'_>,
    model: Option<&GibbsModel>,
    loss: LossKind,
    kind: ComplexityKind,
    k_grid: &[f64],
    n: usize,
) -> Result<PenaltyPath> {
    if coll.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if k_grid.is_empty() {
        return Err(Error::validation("penalty grid must not be empty"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "penalty grid must be strictly increasing",
        ));
    }
    if k_grid[0] < 0.0 {
        return Err(Error::validation("penalty constants must be nonnegative"));
    }
    let engine = match model {
        Some(m) => Some(RiskEngine::new(m, coll.target)?),
        None => None,
    };
    let complexities = complexity_table(coll, est, engine.as_ref(), kind, n)?;
    let fit_terms: BTreeMap<SiteSubset, f64> = coll
        .candidates
        .iter()
        .map(|&c| (c, fit_term(est, coll.target, c, loss)))
        .collect();
    let path = PenaltyPath {
        k_grid: k_grid.to_vec(),
        points: Vec::new(),
        complexity_kind: kind,
        fit_terms,
        complexities,
    };
    let points = k_grid
        .iter()
        .map(|&k| path.select_at(k))
        .collect::<Result<Vec<_>>>()?;
    if kind == ComplexityKind::DimensionOverN {
        debug_assert!(
            points
                .windows(2)
                .all(|w| w[1].complexity <= w[0].complexity + 1e-15),
            "dimension complexity must be non-increasing along the grid"
        );
    }
    Ok(PenaltyPath { points, ..path })
}

/// Locate the jump with the given rule. Returns `(k_min, jump_size)` where
/// `k_min` is the first grid constant after the largest drop and
/// `jump_size` the complexity lost across it.
pub fn detect_kmin_with_rule(path: &PenaltyPath, rule: JumpRule) -> Result<(f64, f64)> {
    if path.points.len() < 3 {
        return Err(Error::validation(
            "penalty path needs at least 3 grid points",
        ));
    }
    let complexities: Vec<f64> = path.points.iter().map(|p| p.complexity).collect();
    detect_jump(&path.k_grid, &complexities, rule)
}

/// Default jump detection: the single largest consecutive drop.
pub fn detect_kmin(path: &PenaltyPath) -> Result<(f64, f64)> {
    detect_kmin_with_rule(path, JumpRule::LargestDrop)
}

fn detect_jump(k_grid: &[f64], complexities: &[f64], rule: JumpRule) -> Result<(f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..complexities.len() - 1 {
        let drop = complexities[j] - complexities[j + 1];
        if drop <= 0.0 {
            continue;
        }
        let score = match rule {
            JumpRule::LargestDrop => drop,
            JumpRule::LargestRelativeDrop => drop / complexities[j],
        };
        if best.is_none_or(|(_, s, _)| score > s) {
            best = Some((j, score, drop));
        }
    }
    match best {
        Some((j, _, drop)) => Ok((k_grid[j + 1], drop)),
        None => Err(Error::NoJump),
    }
}

/// Calibrated selection: penalty path, jump detection, then selection at
/// exactly twice the detected constant.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// `None` when the path selected one single model everywhere, in which
    /// case no jump exists but the selection is unambiguous.
    pub k_min: Option<f64>,
    pub jump_size: Option<f64>,
    pub chosen: SiteSubset,
    pub path: PenaltyPath,
}

#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    coll: &ModelCollection,
    est: Estimator<'_>,
    model: Option<&GibbsModel>,
    loss: LossKind,
    kind: ComplexityKind,
    k_grid: &[f64],
    n: usize,
    rule: JumpRule,
) -> Result<CalibrationResult> {
    let path = penalty_path(coll, est, model, loss, kind, k_grid, n)?;
    match detect_kmin_with_rule(&path, rule) {
        Ok((k_min, jump_size)) => {
            // 2·k_min is evaluated exactly; grid snapping would bias the pick.
            let at = path.select_at(2.0 * k_min)?;
            Ok(CalibrationResult {
                k_min: Some(k_min),
                jump_size: Some(jump_size),
                chosen: at.chosen,
                path,
            })
        }
        Err(Error::NoJump) => {
            let first = path.points[0].chosen;
            if path.points.iter().all(|p| p.chosen == first) {
                Ok(CalibrationResult {
                    k_min: None,
                    jump_size: None,
                    chosen: first,
                    path,
                })
            } else {
                Err(Error::NoJump)
            }
        }
        Err(e) => Err(e),
    }
}

/// Path report: one row per grid constant, directly plottable.
pub fn write_path_report<W: Write>(w: W, path: &PenaltyPath) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer
        .write_record(["k", "chosen_mask", "cardinality", "complexity", "criterion"])
        .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    for p in &path.points {
        writer
            .write_record([
                format!("{}", p.k),
                format!("{}", p.chosen.mask()),
                format!("{}", p.chosen.cardinality()),
                format!("{}", p.complexity),
                format!("{}", p.criterion),
            ])
            .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::validation(format!("csv flush failed: {e}")))?;
    Ok(())
}
