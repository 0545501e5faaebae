//! Quadratic and Küllback losses of plug-in conditional estimators, their
//! exact bias/variance decompositions against the ground-truth model, and
//! the deviation diagnostics used to study the selection criteria.
//!
//! All expectations under the true measure are exact sums over the full
//! configuration table; no Monte Carlo enters a risk value. Terms of the
//! form `0 · ln(·)` contribute zero (zero-mass convention); a positive-mass
//! cell on which an estimator vanishes yields a flagged infinite value
//! rather than a finite surrogate.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::field::{GibbsModel, SiteSubset};
use crate::tables::{self, Estimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    L2,
    Kullback,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::L2 => write!(f, "l2"),
            LossKind::Kullback => write!(f, "kl"),
        }
    }
}

/// Exact risk of a plug-in conditional estimator, split into its estimation
/// (variance) and approximation (bias) parts. The three entries are computed
/// independently; their additivity is a checked identity, not an assumption.
#[derive(Debug, Clone, Copy)]
pub struct RiskReport {
    pub loss: LossKind,
    pub total: f64,
    pub variance: f64,
    pub bias: f64,
    pub subset: SiteSubset,
    /// Sample size behind the estimator; 0 when the exact model was plugged in.
    pub n: usize,
}

impl RiskReport {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.variance.is_finite() && self.bias.is_finite()
    }

    /// |total - variance - bias|, the decomposition defect.
    pub fn additivity_gap(&self) -> f64 {
        (self.total - self.variance - self.bias).abs()
    }
}

/// Squared `L_2` norm of `f` under a context measure: the discrete form
/// `Σ_{x ∈ X(V)} Q(x(V\{i})) f(x)^2 / a`, where `f` is indexed by the
/// subset encoding of `V` and `context_weights` by the encoding of `V\{i}`.
pub fn l2_norm_sq(
    f: &[f64],
    context_weights: &[f64],
    subset: SiteSubset,
    site: usize,
    a: usize,
) -> f64 {
    debug_assert!(subset.contains(site));
    debug_assert_eq!(f.len(), context_weights.len() * a);
    let inner = subset.without(site);
    let inv_a = 1.0 / a as f64;
    let mut total = 0.0;
    for (idx, &value) in f.iter().enumerate() {
        let ctx = context_weights[tables::project_between(idx, subset, inner, a)];
        if ctx != 0.0 {
            total += ctx * value * value * inv_a;
        }
    }
    total
}

/// Logarithmic loss `Σ_x Q(x) ln(1/f(x))`. Cells with zero weight contribute
/// nothing; a zero of `f` on a weighted cell makes the loss infinite.
pub fn log_loss(weights: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), f.len());
    let mut total = 0.0;
    for (&w, &v) in weights.iter().zip(f) {
        if w == 0.0 {
            continue;
        }
        if v <= 0.0 {
            return f64::INFINITY;
        }
        total -= w * v.ln();
    }
    total
}

/// `w · ln(num/den)` with the zero-mass convention on `w`.
fn weighted_log_ratio(w: f64, num: f64, den: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    if den <= 0.0 {
        return f64::INFINITY;
    }
    if num <= 0.0 {
        return f64::NEG_INFINITY;
    }
    w * (num / den).ln()
}

/// Exact-risk evaluator for one target site of one model.
///
/// Precomputes the joint table, the marginal of everything but the target,
/// and the full-set conditional; caches per-subset marginal and conditional
/// tables behind a lock so one engine can serve parallel sweeps.
pub struct RiskEngine<'a> {
    model: &'a GibbsModel,
    site: usize,
    sites: usize,
    a: usize,
    /// P(x) over full configurations.
    joint: Vec<f64>,
    /// P(x(S\{i})) indexed by the encoding of the complement subset.
    context_full: Vec<f64>,
    /// P(x(i) | x(S\{i})) indexed by the full encoding.
    cond_full: Vec<f64>,
    marginals: RwLock<HashMap<u32, Arc<Vec<f64>>>>,
    conditionals: RwLock<HashMap<u32, Arc<Vec<f64>>>>,
}

impl<'a> RiskEngine<'a> {
    pub fn new(model: &'a GibbsModel, site: usize) -> Result<Self> {
        let sites = model.site_count();
        if site >= sites {
            return Err(Error::validation(format!(
                "target site {site} outside 0..{sites}"
            )));
        }
        let a = model.alphabet_size();
        let full = model.site_set().full_subset();
        let joint = model.joint_table().to_vec();
        let context_full = model.marginal_table(full.without(site))?;
        let cond_full = model.conditional_table(site, full)?;
        Ok(RiskEngine {
            model,
            site,
            sites,
            a,
            joint,
            context_full,
            cond_full,
            marginals: RwLock::new(HashMap::new()),
            conditionals: RwLock::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &GibbsModel {
        self.model
    }

    pub fn site(&self) -> usize {
        self.site
    }

    /// True marginal table of `subset`, cached.
    pub fn true_mass(&self, subset: SiteSubset) -> Arc<Vec<f64>> {
        if let Some(t) = self.marginals.read().unwrap().get(&subset.mask()) {
            return Arc::clone(t);
        }
        let table = Arc::new(self.model.marginal_table(subset).expect("valid subset"));
        self.marginals
            .write()
            .unwrap()
            .entry(subset.mask())
            .or_insert_with(|| Arc::clone(&table));
        table
    }

    /// True conditional table of the target on `subset`, cached.
    pub fn true_conditional(&self, subset: SiteSubset) -> Arc<Vec<f64>> {
        if let Some(t) = self.conditionals.read().unwrap().get(&subset.mask()) {
            return Arc::clone(t);
        }
        let table = Arc::new(
            self.model
                .conditional_table(self.site, subset)
                .expect("valid subset"),
        );
        self.conditionals
            .write()
            .unwrap()
            .entry(subset.mask())
            .or_insert_with(|| Arc::clone(&table));
        table
    }

    fn check_subset(&self, subset: SiteSubset) -> Result<()> {
        if !subset.contains(self.site) {
            return Err(Error::validation(format!(
                "candidate {subset} does not contain the target site {}",
                self.site
            )));
        }
        if !subset.is_subset_of(self.model.site_set().full_subset()) {
            return Err(Error::validation(format!(
                "candidate {subset} is not contained in the observed sites"
            )));
        }
        Ok(())
    }

    /// Quadratic risk of the plug-in estimator on `subset`, decomposed.
    /// All three entries are direct sums over the full configuration table.
    pub fn l2_decomposition(&self, est: Estimator<'_>, subset: SiteSubset) -> Result<RiskReport> {
        self.check_subset(subset)?;
        let est_cond = est.conditional_table(self.site, subset);
        let inv_a = 1.0 / self.a as f64;
        let complement = self.full_subset().without(self.site);
        let full = self.full_subset();
        let (mut total, mut variance, mut bias) = (0.0, 0.0, 0.0);
        for idx in 0..self.joint.len() {
            let w =
                self.context_full[tables::project_between(idx, full, complement, self.a)] * inv_a;
            if w == 0.0 {
                continue;
            }
            let fitted = est_cond[tables::project_between(idx, full, subset, self.a)];
            let projected =
                self.true_conditional(subset)[tables::project_between(idx, full, subset, self.a)];
            let truth = self.cond_full[idx];
            total += w * (fitted - truth) * (fitted - truth);
            variance += w * (fitted - projected) * (fitted - projected);
            bias += w * (projected - truth) * (projected - truth);
        }
        Ok(RiskReport {
            loss: LossKind::L2,
            total,
            variance,
            bias,
            subset,
            n: est.sample_size().unwrap_or(0),
        })
    }

    /// Küllback risk of the plug-in estimator on `subset`, decomposed. The
    /// total is the difference of two logarithmic losses; the variance and
    /// bias parts are separate weighted log-ratio sums.
    pub fn kl_decomposition(&self, est: Estimator<'_>, subset: SiteSubset) -> Result<RiskReport> {
        self.check_subset(subset)?;
        let est_cond = est.conditional_table(self.site, subset);
        let full = self.full_subset();
        let fitted_on_full: Vec<f64> = (0..self.joint.len())
            .map(|idx| est_cond[tables::project_between(idx, full, subset, self.a)])
            .collect();
        let total = log_loss(&self.joint, &fitted_on_full) - log_loss(&self.joint, &self.cond_full);

        let true_cond = self.true_conditional(subset);
        let (mut variance, mut bias) = (0.0, 0.0);
        for idx in 0..self.joint.len() {
            let w = self.joint[idx];
            if w == 0.0 {
                continue;
            }
            let sub = tables::project_between(idx, full, subset, self.a);
            variance += weighted_log_ratio(w, true_cond[sub], est_cond[sub]);
            bias += weighted_log_ratio(w, self.cond_full[idx], true_cond[sub]);
        }
        Ok(RiskReport {
            loss: LossKind::Kullback,
            total,
            variance,
            bias,
            subset,
            n: est.sample_size().unwrap_or(0),
        })
    }

    pub fn decomposition(
        &self,
        est: Estimator<'_>,
        subset: SiteSubset,
        loss: LossKind,
    ) -> Result<RiskReport> {
        match loss {
            LossKind::L2 => self.l2_decomposition(est, subset),
            LossKind::Kullback => self.kl_decomposition(est, subset),
        }
    }

    /// Total risk only; the fast path for oracle sweeps.
    pub fn total_risk(
        &self,
        est: Estimator<'_>,
        subset: SiteSubset,
        loss: LossKind,
    ) -> Result<f64> {
        self.check_subset(subset)?;
        let est_cond = est.conditional_table(self.site, subset);
        self.total_risk_of_table(&est_cond, subset, loss)
    }

    /// Same as [`RiskEngine::total_risk`] but for a prebuilt conditional table.
    pub fn total_risk_of_table(
        &self,
        est_cond: &[f64],
        subset: SiteSubset,
        loss: LossKind,
    ) -> Result<f64> {
        self.check_subset(subset)?;
        let full = self.full_subset();
        let complement = full.without(self.site);
        let inv_a = 1.0 / self.a as f64;
        let mut total = 0.0;
        match loss {
            LossKind::L2 => {
                for idx in 0..self.joint.len() {
                    let w = self.context_full
                        [tables::project_between(idx, full, complement, self.a)]
                        * inv_a;
                    if w == 0.0 {
                        continue;
                    }
                    let diff = est_cond[tables::project_between(idx, full, subset, self.a)]
                        - self.cond_full[idx];
                    total += w * diff * diff;
                }
            }
            LossKind::Kullback => {
                for idx in 0..self.joint.len() {
                    let w = self.joint[idx];
                    if w == 0.0 {
                        continue;
                    }
                    let fitted = est_cond[tables::project_between(idx, full, subset, self.a)];
                    total += weighted_log_ratio(w, self.cond_full[idx], fitted);
                    if total == f64::INFINITY {
                        return Ok(total);
                    }
                }
            }
        }
        Ok(total)
    }

    /// `‖P_{i|V} - fitted‖²` under the estimator's own context weights; the
    /// random complexity measure of the quadratic slope theory.
    pub fn empirical_l2_variance(&self, est: Estimator<'_>, subset: SiteSubset) -> Result<f64> {
        self.check_subset(subset)?;
        let est_mass = est.mass_table(subset);
        let est_ctx = tables::contract_site(&est_mass, subset, self.site, self.a);
        let est_cond = tables::conditional_from_mass(&est_mass, subset, self.site, self.a);
        let true_cond = self.true_conditional(subset);
        let diff: Vec<f64> = true_cond
            .iter()
            .zip(&est_cond)
            .map(|(t, e)| t - e)
            .collect();
        Ok(l2_norm_sq(&diff, &est_ctx, subset, self.site, self.a))
    }

    /// `Σ_x fitted-mass(x(V)) ln(fitted/true)` on `subset`; the random
    /// complexity measure of the Küllback slope theory.
    pub fn empirical_kl_variance(&self, est: Estimator<'_>, subset: SiteSubset) -> Result<f64> {
        self.check_subset(subset)?;
        let est_mass = est.mass_table(subset);
        let est_cond = tables::conditional_from_mass(&est_mass, subset, self.site, self.a);
        let true_cond = self.true_conditional(subset);
        let mut total = 0.0;
        for (idx, &w) in est_mass.iter().enumerate() {
            total += weighted_log_ratio(w, est_cond[idx], true_cond[idx]);
        }
        Ok(total)
    }

    fn full_subset(&self) -> SiteSubset {
        SiteSubset::full(self.sites)
    }
}

/// One-shot quadratic decomposition; builds a throwaway engine.
pub fn l2_risk_decomposition(
    model: &GibbsModel,
    est: Estimator<'_>,
    site: usize,
    subset: SiteSubset,
) -> Result<RiskReport> {
    RiskEngine::new(model, site)?.l2_decomposition(est, subset)
}

/// One-shot Küllback decomposition; builds a throwaway engine.
pub fn kullback_risk_decomposition(
    model: &GibbsModel,
    est: Estimator<'_>,
    site: usize,
    subset: SiteSubset,
) -> Result<RiskReport> {
    RiskEngine::new(model, site)?.kl_decomposition(est, subset)
}

/// Scalar diagnostics of the gap between the fitted and the true conditional
/// on one candidate subset, plus the simultaneous deviation check.
#[derive(Debug, Clone, Copy)]
pub struct ProofDiagnostics {
    /// `Σ_x P(x(V)) ln(P_{i|V}(x) / fitted(x))`.
    pub true_weighted_divergence: f64,
    /// `Σ_x fitted-mass(x(V)) ln(fitted(x) / P_{i|V}(x))`.
    pub empirical_weighted_divergence: f64,
    /// `Σ_x (fitted-mass - P)(x(V)) ln(1 / P_{i|V}(x))`.
    pub log_loss_fluctuation: f64,
    /// Smallest positive true mass of a configuration of `V`.
    pub min_positive_mass: f64,
    /// Whether the simultaneous mass-deviation bound holds over the whole
    /// cardinality-bounded subset family at the given confidence level.
    pub deviation_bound_holds: bool,
}

/// Number of subsets of an `m`-site set with cardinality at most `s`.
pub fn all_subsets_count(m: usize, s: usize) -> u64 {
    let s = s.min(m);
    let mut total = 0u64;
    let mut binom = 1u64;
    for k in 0..=s {
        if k > 0 {
            binom = binom * (m - k + 1) as u64 / k as u64;
        }
        total += binom;
    }
    total
}

/// The deviation threshold `ln(2 a^s N_s δ)` shared by the mass filters and
/// the typicality check, with `N_s` counting all subsets of cardinality
/// at most `s`.
pub fn deviation_log_term(a: usize, s: usize, m: usize, delta: f64) -> f64 {
    let n_s = all_subsets_count(m, s) as f64;
    (2.0 * (a as f64).powi(s as i32) * n_s * delta).ln()
}

/// Checks whether `|P(x(V)) - fitted(x(V))| ≤ sqrt(2 P(x(V)) L / n) + L/(3n)`
/// holds simultaneously for every subset `V` of cardinality at most `s` and
/// every configuration, with `L = ln(2 a^s N_s δ)`. The event has
/// probability at least `1 - 1/δ` under sampling from the model.
pub fn typicality_event_holds(
    model: &GibbsModel,
    em: &EmpiricalMeasure,
    s: usize,
    delta: f64,
) -> Result<bool> {
    let m = model.site_count();
    if em.site_count() != m || em.alphabet_size() != model.alphabet_size() {
        return Err(Error::validation(
            "empirical measure does not match the model",
        ));
    }
    if delta <= 1.0 {
        return Err(Error::validation("delta must exceed 1"));
    }
    let a = model.alphabet_size();
    let n = em.sample_size() as f64;
    let log_term = deviation_log_term(a, s, m, delta);
    let additive = log_term / (3.0 * n);
    for mask in 1u32..1 << m {
        let subset = SiteSubset::from_mask(mask);
        if subset.cardinality() > s {
            continue;
        }
        let truth = model.marginal_table(subset)?;
        let counts = em.count_table(subset);
        for (cell, &p) in truth.iter().enumerate() {
            let fitted = counts[cell] as f64 / n;
            let bound = (2.0 * p * log_term / n).sqrt() + additive;
            if (p - fitted).abs() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Computes the divergence diagnostics for one candidate subset together
/// with the outcome of the simultaneous deviation check at level `delta`
/// over the family of subsets of cardinality at most `s`.
pub fn proof_diagnostics(
    model: &GibbsModel,
    em: &EmpiricalMeasure,
    site: usize,
    subset: SiteSubset,
    delta: f64,
    s: usize,
) -> Result<ProofDiagnostics> {
    if !subset.contains(site) {
        return Err(Error::validation(format!(
            "candidate {subset} does not contain the target site {site}"
        )));
    }
    if em.site_count() != model.site_count() || em.alphabet_size() != model.alphabet_size() {
        return Err(Error::validation(
            "empirical measure does not match the model",
        ));
    }
    let a = model.alphabet_size();
    let true_mass = model.marginal_table(subset)?;
    let true_cond = tables::conditional_from_mass(&true_mass, subset, site, a);
    let est = Estimator::Empirical(em);
    let est_mass = est.mass_table(subset);
    let est_cond = tables::conditional_from_mass(&est_mass, subset, site, a);

    let mut true_weighted = 0.0;
    let mut empirical_weighted = 0.0;
    let mut fluctuation = 0.0;
    let mut min_positive = f64::INFINITY;
    for idx in 0..true_mass.len() {
        let p = true_mass[idx];
        let q = est_mass[idx];
        if p > 0.0 && p < min_positive {
            min_positive = p;
        }
        true_weighted += weighted_log_ratio(p, true_cond[idx], est_cond[idx]);
        empirical_weighted += weighted_log_ratio(q, est_cond[idx], true_cond[idx]);
        let dw = q - p;
        if dw != 0.0 {
            if true_cond[idx] <= 0.0 {
                fluctuation = if dw > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                };
                break;
            }
            fluctuation -= dw * true_cond[idx].ln();
        }
    }
    let deviation_bound_holds = typicality_event_holds(model, em, s, delta)?;
    Ok(ProofDiagnostics {
        true_weighted_divergence: true_weighted,
        empirical_weighted_divergence: empirical_weighted,
        log_loss_fluctuation: fluctuation,
        min_positive_mass: min_positive,
        deviation_bound_holds,
    })
}
