//! Dense probability tables over configurations of site subsets, and the
//! projections between them.
//!
//! Every table is indexed mixed-radix little-endian over the subset's sites
//! in increasing dense order: the lowest site index is the least significant
//! digit. Tables over the full site set therefore share the encoding of
//! [`crate::field::Configuration::encode`].

use crate::empirical::EmpiricalMeasure;
use crate::field::{GibbsModel, SiteSubset};

/// Index of `x(subset)` in a subset table, given the index of the full
/// configuration `x`.
pub fn project_index(full_idx: usize, subset: SiteSubset, a: usize, sites: usize) -> usize {
    let mut sub = 0usize;
    let mut place = 1usize;
    let mut rest = full_idx;
    for s in 0..sites {
        let digit = rest % a;
        rest /= a;
        if subset.contains(s) {
            sub += digit * place;
            place *= a;
        }
    }
    sub
}

/// Index of `x(inner)` given the index of `x(outer)`, for `inner ⊆ outer`.
pub fn project_between(outer_idx: usize, outer: SiteSubset, inner: SiteSubset, a: usize) -> usize {
    debug_assert!(inner.is_subset_of(outer));
    let mut sub = 0usize;
    let mut place = 1usize;
    let mut rest = outer_idx;
    for s in outer.sites() {
        let digit = rest % a;
        rest /= a;
        if inner.contains(s) {
            sub += digit * place;
            place *= a;
        }
    }
    sub
}

/// Subset-table index of a full configuration given per-site values.
pub fn sub_encode(values: &[u8], subset: SiteSubset, a: usize) -> usize {
    let mut sub = 0usize;
    let mut place = 1usize;
    for s in subset.sites() {
        sub += values[s] as usize * place;
        place *= a;
    }
    sub
}

/// Sum a table over `subset` down to a table over `subset \ {site}`.
pub fn contract_site(table: &[f64], subset: SiteSubset, site: usize, a: usize) -> Vec<f64> {
    debug_assert!(subset.contains(site));
    let inner = subset.without(site);
    let mut out = vec![0.0; table.len() / a];
    for (idx, &p) in table.iter().enumerate() {
        out[project_between(idx, subset, inner, a)] += p;
    }
    out
}

/// Conditional table `Q(x(site) | x(subset\{site}))` from a mass table over
/// `subset`, applying the uniform `1/a` convention on zero-mass contexts.
pub fn conditional_from_mass(mass: &[f64], subset: SiteSubset, site: usize, a: usize) -> Vec<f64> {
    let inner = subset.without(site);
    let context = contract_site(mass, subset, site, a);
    let uniform = 1.0 / a as f64;
    mass.iter()
        .enumerate()
        .map(|(idx, &p)| {
            let ctx = context[project_between(idx, subset, inner, a)];
            if ctx > 0.0 {
                p / ctx
            } else {
                uniform
            }
        })
        .collect()
}

/// A probability measure on the observed sites that can serve as the
/// plug-in estimate in criteria and risks: either a fitted empirical
/// measure or the exact model itself (useful to isolate bias terms).
#[derive(Clone, Copy)]
pub enum Estimator<'a> {
    Empirical(&'a EmpiricalMeasure),
    Exact(&'a GibbsModel),
}

impl<'a> Estimator<'a> {
    pub fn site_count(&self) -> usize {
        match self {
            Estimator::Empirical(em) => em.site_count(),
            Estimator::Exact(model) => model.site_count(),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Estimator::Empirical(em) => em.alphabet_size(),
            Estimator::Exact(model) => model.alphabet_size(),
        }
    }

    /// Sample size behind the estimate; `None` for the exact model.
    pub fn sample_size(&self) -> Option<usize> {
        match self {
            Estimator::Empirical(em) => Some(em.sample_size()),
            Estimator::Exact(_) => None,
        }
    }

    /// Mass table of `subset`: frequencies for the empirical measure, exact
    /// marginals for the model.
    pub fn mass_table(&self, subset: SiteSubset) -> Vec<f64> {
        match self {
            Estimator::Empirical(em) => em.mass_table(subset),
            Estimator::Exact(model) => model
                .marginal_table(subset)
                .expect("subset checked by caller"),
        }
    }

    /// Conditional table over `subset` with the uniform convention.
    pub fn conditional_table(&self, site: usize, subset: SiteSubset) -> Vec<f64> {
        let mass = self.mass_table(subset);
        conditional_from_mass(&mass, subset, site, self.alphabet_size())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Alphabet, GibbsModel, SiteSet};

    #[test]
    fn projections_agree_with_reencoding() {
        let a = 3usize;
        let m = 4usize;
        let subset = SiteSubset::from_sites(&[1, 3]);
        for idx in 0..a.pow(m as u32) {
            let x = crate::field::Configuration::decode(idx, m, a);
            let direct = sub_encode(x.values(), subset, a);
            assert_eq!(project_index(idx, subset, a, m), direct);
        }
    }

    #[test]
    fn contraction_preserves_total_mass() {
        let model = GibbsModel::ising_grid_nn(2, 3, 0.4).unwrap();
        let subset = SiteSubset::from_sites(&[0, 2, 5]);
        let table = model.marginal_table(subset).unwrap();
        let contracted = contract_site(&table, subset, 2, 2);
        let before: f64 = table.iter().sum();
        let after: f64 = contracted.iter().sum();
        assert!((before - after).abs() < 1e-14);
        assert_eq!(contracted.len(), 4);
    }

    #[test]
    fn conditional_rows_sum_to_one() {
        let model = GibbsModel::ising_grid_nn(2, 2, 0.8).unwrap();
        let subset = SiteSubset::from_sites(&[0, 1, 3]);
        let mass = model.marginal_table(subset).unwrap();
        let cond = conditional_from_mass(&mass, subset, 1, 2);
        let inner = subset.without(1);
        let mut row_sums = vec![0.0; 4];
        for (idx, &c) in cond.iter().enumerate() {
            row_sums[project_between(idx, subset, inner, 2)] += c;
        }
        for s in row_sums {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_estimator_matches_model_tables() {
        let sites = SiteSet::new(vec!["x".into(), "y".into()]).unwrap();
        let model =
            GibbsModel::from_weights(sites, Alphabet::spin(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let est = Estimator::Exact(&model);
        let subset = SiteSubset::from_sites(&[0, 1]);
        let direct = model.marginal_table(subset).unwrap();
        assert_eq!(est.mass_table(subset), direct);
        assert_eq!(est.sample_size(), None);
    }
}
