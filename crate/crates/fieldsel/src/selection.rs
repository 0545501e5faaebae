//! Candidate-neighborhood collections, mass filters, penalized criteria,
//! and the penalized/oracle minimizers.
//!
//! Candidates always contain the target site: a candidate `V` is a
//! neighborhood `N ⊆ V_M \ {i}` together with `i` itself, so the criterion
//! and penalty tables are indexed by the full conditioning set.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{GibbsModel, SiteSet, SiteSubset};
use crate::risk::{self, LossKind, RiskEngine};
use crate::tables::{self, Estimator};

/// Which mass condition the collection was filtered by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    None,
    /// Every fitted cell mass is zero or above the threshold.
    EmpiricalMass,
    /// Every true cell mass is zero or above the threshold.
    TrueMass,
    /// `EmpiricalMass` plus a floor on fitted conditionals.
    EmpiricalMassConditional,
    /// `TrueMass` plus a floor on true conditionals.
    TrueMassConditional,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FilterKind::None => "none",
            FilterKind::EmpiricalMass => "empirical-mass",
            FilterKind::TrueMass => "true-mass",
            FilterKind::EmpiricalMassConditional => "empirical-mass+conditional",
            FilterKind::TrueMassConditional => "true-mass+conditional",
        };
        write!(f, "{s}")
    }
}

/// An enumerated (possibly filtered) family of candidate conditioning sets
/// for one target site.
#[derive(Debug, Clone)]
pub struct ModelCollection {
    pub target: usize,
    pub candidates: Vec<SiteSubset>,
    /// Cardinality bound `s` (counting the target).
    pub max_cardinality: usize,
    /// Number of candidates before any filtering, under the convention that
    /// the target belongs to every candidate. This is the count entering the
    /// filter thresholds; the all-subsets convention is available through
    /// [`risk::all_subsets_count`].
    pub unfiltered_count: usize,
    pub filter: FilterKind,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub p_star: Option<f64>,
    /// Set when a filter was applied with parameters outside the supported
    /// range (`lambda < 100` or `delta ≤ 1`).
    pub hypothesis_warning: bool,
    site_count: usize,
}

impl ModelCollection {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// The mass-filter threshold `Λ ln(2 a^s N_s δ) / n` for this collection.
    pub fn filter_threshold(&self, a: usize, lambda: f64, delta: f64, n: usize) -> f64 {
        let log_term = (2.0
            * (a as f64).powi(self.max_cardinality as i32)
            * self.unfiltered_count as f64
            * delta)
            .ln();
        lambda * log_term / n as f64
    }
}

/// Enumerate every candidate `N ∪ {target}` with `N ⊆ V_M \ {target}` and
/// total cardinality at most `s`, ordered by cardinality then mask value.
pub fn enumerate_models(sites: &SiteSet, target: usize, s: usize) -> Result<ModelCollection> {
    let m = sites.len();
    if target >= m {
        return Err(Error::validation(format!(
            "target site {target} outside 0..{m}"
        )));
    }
    if s < 1 || s > m {
        return Err(Error::validation(format!(
            "cardinality bound s={s} outside 1..={m}"
        )));
    }
    let complement = SiteSubset::full(m).without(target).mask();
    let mut candidates = Vec::new();
    // Carry-rippler walk over the subsets of the complement mask.
    let mut sub = 0u32;
    loop {
        let candidate = SiteSubset::from_mask(sub).with(target);
        if candidate.cardinality() <= s {
            candidates.push(candidate);
        }
        sub = sub.wrapping_sub(complement) & complement;
        if sub == 0 {
            break;
        }
    }
    candidates.sort_by_key(|c| (c.cardinality(), c.mask()));
    let count = candidates.len();
    Ok(ModelCollection {
        target,
        candidates,
        max_cardinality: s,
        unfiltered_count: count,
        filter: FilterKind::None,
        lambda: None,
        delta: None,
        p_star: None,
        hypothesis_warning: false,
        site_count: m,
    })
}

/// Keep the candidates whose cell masses under `source` are all either zero
/// or above `Λ ln(2 a^s N_s δ)/n`; with `p_star`, additionally require every
/// conditional value to be zero or at least `p_star`.
///
/// The filter reads masses from `source`: a fitted measure gives the
/// practitioner-checkable variant, the exact model the oracle variant.
/// Out-of-range parameters flag the result instead of failing.
pub fn filter_collection(
    coll: &ModelCollection,
    source: Estimator<'_>,
    n: usize,
    lambda: f64,
    delta: f64,
    p_star: Option<f64>,
) -> Result<ModelCollection> {
    if source.site_count() != coll.site_count {
        return Err(Error::validation(
            "mass source does not match the collection's site set",
        ));
    }
    if n == 0 {
        return Err(Error::validation("sample size must be positive"));
    }
    if let Some(en) = source.sample_size() {
        if en != n {
            return Err(Error::validation(format!(
                "sample size {n} does not match the fitted measure ({en})"
            )));
        }
    }
    let a = source.alphabet_size();
    let threshold = coll.filter_threshold(a, lambda, delta, n);
    let empirical = matches!(source, Estimator::Empirical(_));
    let mut kept = Vec::new();
    for &candidate in &coll.candidates {
        let mass = source.mass_table(candidate);
        if mass.iter().any(|&p| p != 0.0 && p < threshold) {
            continue;
        }
        if let Some(floor) = p_star {
            let cond = tables::conditional_from_mass(&mass, candidate, coll.target, a);
            if cond.iter().any(|&c| c != 0.0 && c < floor) {
                continue;
            }
        }
        kept.push(candidate);
    }
    let filter = match (empirical, p_star.is_some()) {
        (true, false) => FilterKind::EmpiricalMass,
        (true, true) => FilterKind::EmpiricalMassConditional,
        (false, false) => FilterKind::TrueMass,
        (false, true) => FilterKind::TrueMassConditional,
    };
    Ok(ModelCollection {
        target: coll.target,
        candidates: kept,
        max_cardinality: coll.max_cardinality,
        unfiltered_count: coll.unfiltered_count,
        filter,
        lambda: Some(lambda),
        delta: Some(delta),
        p_star,
        hypothesis_warning: lambda < 100.0 || delta <= 1.0,
        site_count: coll.site_count,
    })
}

/// How the penalty of a candidate is computed.
#[derive(Debug, Clone)]
pub enum PenaltyForm {
    /// `constant · a^v / n`.
    DimensionOverSamples,
    /// `constant · table[V]`; the table must cover every candidate.
    Explicit(BTreeMap<SiteSubset, f64>),
}

#[derive(Debug, Clone)]
pub struct PenaltySpec {
    pub loss: LossKind,
    /// Full multiplier of the complexity unit (`a^v/n` or a table entry).
    pub constant: f64,
    pub form: PenaltyForm,
}

impl PenaltySpec {
    pub fn dimension(loss: LossKind, constant: f64) -> Result<Self> {
        if !(constant >= 0.0) {
            return Err(Error::validation("penalty constant must be nonnegative"));
        }
        Ok(PenaltySpec {
            loss,
            constant,
            form: PenaltyForm::DimensionOverSamples,
        })
    }

    /// The quadratic-loss penalty `(6K/a) a^v / n`.
    pub fn theoretical_l2(k: f64, a: usize) -> Result<Self> {
        PenaltySpec::dimension(LossKind::L2, 6.0 * k / a as f64)
    }

    /// The Küllback penalty `9K a^v / n`.
    pub fn theoretical_kl(k: f64) -> Result<Self> {
        PenaltySpec::dimension(LossKind::Kullback, 9.0 * k)
    }

    pub fn explicit(
        loss: LossKind,
        constant: f64,
        table: BTreeMap<SiteSubset, f64>,
    ) -> Result<Self> {
        if !(constant >= 0.0) {
            return Err(Error::validation("penalty constant must be nonnegative"));
        }
        Ok(PenaltySpec {
            loss,
            constant,
            form: PenaltyForm::Explicit(table),
        })
    }

    pub fn value(&self, candidate: SiteSubset, a: usize, n: usize) -> Result<f64> {
        match &self.form {
            PenaltyForm::DimensionOverSamples => {
                let dim = (a as f64).powi(candidate.cardinality() as i32);
                Ok(self.constant * dim / n as f64)
            }
            PenaltyForm::Explicit(table) => table
                .get(&candidate)
                .map(|&delta| self.constant * delta)
                .ok_or_else(|| {
                    Error::validation(format!(
                        "explicit penalty table misses candidate {candidate}"
                    ))
                }),
        }
    }
}

/// Empirical fit term of the quadratic criterion: `-‖fitted‖²` under the
/// estimator's own context weights.
pub fn l2_fit_term(est: Estimator<'_>, site: usize, subset: SiteSubset) -> f64 {
    let a = est.alphabet_size();
    let mass = est.mass_table(subset);
    let ctx = tables::contract_site(&mass, subset, site, a);
    let cond = tables::conditional_from_mass(&mass, subset, site, a);
    -risk::l2_norm_sq(&cond, &ctx, subset, site, a)
}

/// Empirical fit term of the Küllback criterion: the negative log-likelihood
/// `-Σ_x mass(x(V)) ln fitted(x)`; unobserved cells contribute nothing.
pub fn kl_fit_term(est: Estimator<'_>, site: usize, subset: SiteSubset) -> f64 {
    let a = est.alphabet_size();
    let mass = est.mass_table(subset);
    let cond = tables::conditional_from_mass(&mass, subset, site, a);
    risk::log_loss(&mass, &cond)
}

pub fn fit_term(est: Estimator<'_>, site: usize, subset: SiteSubset, loss: LossKind) -> f64 {
    match loss {
        LossKind::L2 => l2_fit_term(est, site, subset),
        LossKind::Kullback => kl_fit_term(est, site, subset),
    }
}

/// Quadratic penalized criterion `-‖fitted‖² + pen(V)`.
pub fn l2_criterion(
    est: Estimator<'_>,
    site: usize,
    subset: SiteSubset,
    pen: &PenaltySpec,
    n: usize,
) -> Result<f64> {
    Ok(l2_fit_term(est, site, subset) + pen.value(subset, est.alphabet_size(), n)?)
}

/// Küllback penalized criterion: negative conditional log-likelihood plus
/// the penalty.
pub fn kl_criterion(
    est: Estimator<'_>,
    site: usize,
    subset: SiteSubset,
    pen: &PenaltySpec,
    n: usize,
) -> Result<f64> {
    Ok(kl_fit_term(est, site, subset) + pen.value(subset, est.alphabet_size(), n)?)
}

/// Deterministic argmin: smallest value, ties broken by smaller cardinality
/// then smaller mask. Returns the winner and whether a tie at the minimum
/// had to be broken. `NaN` values are treated as `+∞`.
pub(crate) fn argmin_candidates<I>(items: I) -> Option<(SiteSubset, f64, bool)>
where
    I: IntoIterator<Item = (SiteSubset, f64)>,
{
    let mut best: Option<(SiteSubset, f64)> = None;
    let mut tied = false;
    for (candidate, raw) in items {
        let value = if raw.is_nan() { f64::INFINITY } else { raw };
        match best {
            None => best = Some((candidate, value)),
            Some((bc, bv)) => {
                if value < bv {
                    best = Some((candidate, value));
                    tied = false;
                } else if value == bv {
                    tied = true;
                    if (candidate.cardinality(), candidate.mask()) < (bc.cardinality(), bc.mask()) {
                        best = Some((candidate, value));
                    }
                }
            }
        }
    }
    best.map(|(c, v)| (c, v, tied))
}

/// Outcome of one penalized minimization, with the full criterion map
/// retained for penalty-path reuse and reporting.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub chosen: SiteSubset,
    pub criterion_values: BTreeMap<SiteSubset, f64>,
    pub penalty_values: BTreeMap<SiteSubset, f64>,
    pub tie_break_applied: bool,
}

/// Minimize the penalized criterion over the collection.
pub fn select(
    coll: &ModelCollection,
    est: Estimator<'_>,
    pen: &PenaltySpec,
    n: usize,
) -> Result<SelectionResult> {
    if coll.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if est.site_count() != coll.site_count {
        return Err(Error::validation(
            "estimator does not match the collection's site set",
        ));
    }
    let a = est.alphabet_size();
    let mut criterion_values = BTreeMap::new();
    let mut penalty_values = BTreeMap::new();
    for &candidate in &coll.candidates {
        let penalty = pen.value(candidate, a, n)?;
        let fit = fit_term(est, coll.target, candidate, pen.loss);
        criterion_values.insert(candidate, fit + penalty);
        penalty_values.insert(candidate, penalty);
    }
    let (chosen, _, tie_break_applied) =
        argmin_candidates(criterion_values.iter().map(|(&c, &v)| (c, v)))
            .ok_or(Error::EmptyCollection)?;
    Ok(SelectionResult {
        chosen,
        criterion_values,
        penalty_values,
        tie_break_applied,
    })
}

/// True risk of the plug-in estimator for every candidate.
pub fn true_risk_map(
    engine: &RiskEngine<'_>,
    est: Estimator<'_>,
    coll: &ModelCollection,
    loss: LossKind,
) -> Result<BTreeMap<SiteSubset, f64>> {
    let mut risks = BTreeMap::new();
    for &candidate in &coll.candidates {
        risks.insert(candidate, engine.total_risk(est, candidate, loss)?);
    }
    Ok(risks)
}

/// The candidate whose plug-in estimator has the smallest true risk, with
/// the same tie-break as [`select`]. Needs the ground-truth model.
pub fn oracle(
    model: &GibbsModel,
    est: Estimator<'_>,
    coll: &ModelCollection,
    loss: LossKind,
) -> Result<SiteSubset> {
    if coll.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let engine = RiskEngine::new(model, coll.target)?;
    let risks = true_risk_map(&engine, est, coll, loss)?;
    let (chosen, _, _) =
        argmin_candidates(risks.iter().map(|(&c, &v)| (c, v))).ok_or(Error::EmptyCollection)?;
    Ok(chosen)
}

/// Write the per-candidate selection report: one row per candidate of the
/// unfiltered collection, flagging the ones removed by the filter and
/// marking the chosen row.
pub fn write_selection_report<W: Write>(
    w: W,
    unfiltered: &ModelCollection,
    result: &SelectionResult,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer
        .write_record([
            "mask",
            "cardinality",
            "criterion",
            "penalty",
            "filtered_out",
            "chosen",
        ])
        .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    for &candidate in &unfiltered.candidates {
        let (criterion, penalty, filtered_out) = match result.criterion_values.get(&candidate) {
            Some(&c) => (
                format!("{c}"),
                format!("{}", result.penalty_values[&candidate]),
                "0",
            ),
            None => (String::new(), String::new(), "1"),
        };
        let chosen = if candidate == result.chosen { "1" } else { "0" };
        writer
            .write_record([
                format!("{}", candidate.mask()),
                format!("{}", candidate.cardinality()),
                criterion,
                penalty,
                filtered_out.to_string(),
                chosen.to_string(),
            ])
            .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::validation(format!("csv flush failed: {e}")))?;
    Ok(())
}
