//! Exact representation of a finite discrete random field in Gibbs form.
//!
//! A model holds the full joint table over all `a^M` configurations of the
//! observed sites, so every marginal and conditional probability is available
//! by exact enumeration. This is the ground-truth engine behind all risk
//! computations: nothing in this module is estimated.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Exact enumeration keeps an `a^M` table; beyond this site count the table
/// stops fitting in memory for any alphabet.
pub const MAX_SITES: usize = 20;

/// Hard cap on the joint-table length (`a^M`), reached by non-binary
/// alphabets before `MAX_SITES` does.
pub const MAX_TABLE_LEN: usize = 1 << 26;

/// Ordered set of observed sites with dense indices `0..M`.
#[derive(Debug, Clone)]
pub struct SiteSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl SiteSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::validation("site set must not be empty"));
        }
        if labels.len() > MAX_SITES {
            return Err(Error::capacity(format!(
                "{} sites exceed the enumeration bound of {MAX_SITES}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (k, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), k).is_some() {
                return Err(Error::validation(format!("duplicate site label {label:?}")));
            }
        }
        Ok(SiteSet { labels, index })
    }

    /// Row-major grid of sites labelled `(r,c)`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("grid dimensions must be positive"));
        }
        let labels = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| format!("({r},{c})")))
            .collect();
        SiteSet::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn full_subset(&self) -> SiteSubset {
        SiteSubset::full(self.len())
    }
}

/// Finite alphabet of spin values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<i64>,
}

impl Alphabet {
    pub fn new(symbols: Vec<i64>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::validation("alphabet needs at least two symbols"));
        }
        for (k, s) in symbols.iter().enumerate() {
            if symbols[..k].contains(s) {
                return Err(Error::validation(format!("duplicate alphabet symbol {s}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// The binary spin alphabet `{-1, +1}`, index 0 mapping to -1.
    pub fn spin() -> Self {
        Alphabet {
            symbols: vec![-1, 1],
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, idx: usize) -> i64 {
        self.symbols[idx]
    }

    pub fn symbols(&self) -> &[i64] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: i64) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }

    pub fn is_spin(&self) -> bool {
        self.symbols == [-1, 1]
    }
}

/// A complete configuration: one symbol index per observed site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    values: Vec<u8>,
}

impl Configuration {
    pub fn new(values: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        for &v in &values {
            if v as usize >= alphabet_size {
                return Err(Error::validation(format!(
                    "symbol index {v} out of range for alphabet of size {alphabet_size}"
                )));
            }
        }
        Ok(Configuration { values })
    }

    /// Build from raw symbol values (e.g. `-1`/`+1`), mapped through the alphabet.
    pub fn from_symbols(alphabet: &Alphabet, symbols: &[i64]) -> Result<Self> {
        let values = symbols
            .iter()
            .map(|&s| {
                alphabet
                    .index_of(s)
                    .map(|i| i as u8)
                    .ok_or_else(|| Error::validation(format!("symbol {s} not in alphabet")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Configuration { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, site: usize) -> u8 {
        self.values[site]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Mixed-radix little-endian encoding over the dense site order:
    /// site 0 is the least significant digit. This layout is stable and is
    /// what all probability tables are indexed by.
    pub fn encode(&self, alphabet_size: usize) -> usize {
        let mut idx = 0usize;
        for &v in self.values.iter().rev() {
            idx = idx * alphabet_size + v as usize;
        }
        idx
    }

    pub fn decode(idx: usize, sites: usize, alphabet_size: usize) -> Self {
        let mut values = Vec::with_capacity(sites);
        let mut rest = idx;
        for _ in 0..sites {
            values.push((rest % alphabet_size) as u8);
            rest /= alphabet_size;
        }
        Configuration { values }
    }
}

/// A subset of the observed sites, stored as a bitmask over dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSubset(u32);

impl SiteSubset {
    pub fn empty() -> Self {
        SiteSubset(0)
    }

    pub fn full(sites: usize) -> Self {
        debug_assert!(sites <= MAX_SITES);
        SiteSubset(((1u64 << sites) - 1) as u32)
    }

    pub fn from_mask(mask: u32) -> Self {
        SiteSubset(mask)
    }

    pub fn from_sites(sites: &[usize]) -> Self {
        let mut mask = 0u32;
        for &s in sites {
            debug_assert!(s < MAX_SITES);
            mask |= 1 << s;
        }
        SiteSubset(mask)
    }

    pub fn singleton(site: usize) -> Self {
        SiteSubset(1 << site)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn with(self, site: usize) -> Self {
        SiteSubset(self.0 | 1 << site)
    }

    pub fn without(self, site: usize) -> Self {
        SiteSubset(self.0 & !(1 << site))
    }

    pub fn union(self, other: Self) -> Self {
        SiteSubset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Dense site indices in increasing order.
    pub fn sites(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(s)
            }
        })
    }
}

impl fmt::Display for SiteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.sites().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Interaction structure a model was built from; retained so that pairwise
/// binary models can answer closed-form conditional queries.
#[derive(Debug, Clone)]
pub enum Potential {
    Pairwise {
        couplings: Vec<(usize, usize, f64)>,
        fields: Vec<f64>,
    },
    Cliques(Vec<CliquePotential>),
    /// Built directly from a weight table; no interaction structure known.
    Explicit,
}

/// Log-weight table attached to a clique of sites. The table is indexed by
/// the mixed-radix little-endian encoding of the clique's configuration in
/// the order the sites are listed.
#[derive(Debug, Clone)]
pub struct CliquePotential {
    pub sites: Vec<usize>,
    pub log_weights: Vec<f64>,
}

/// Exact joint distribution of a finite random field.
#[derive(Debug, Clone)]
pub struct GibbsModel {
    sites: SiteSet,
    alphabet: Alphabet,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    log_z: f64,
    potential: Potential,
}

fn table_len(sites: usize, alphabet: usize) -> Result<usize> {
    if sites > MAX_SITES {
        return Err(Error::capacity(format!(
            "{sites} sites exceed the enumeration bound of {MAX_SITES}"
        )));
    }
    let mut len = 1usize;
    for _ in 0..sites {
        len = len
            .checked_mul(alphabet)
            .filter(|&l| l <= MAX_TABLE_LEN)
            .ok_or_else(|| {
                Error::capacity(format!(
                    "joint table of {alphabet}^{sites} entries exceeds {MAX_TABLE_LEN}"
                ))
            })?;
    }
    Ok(len)
}

fn normalize_log_weights(mut energies: Vec<f64>) -> (Vec<f64>, f64) {
    // Log-domain normalization so large couplings cannot overflow.
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = energies.iter().map(|e| (e - max).exp()).sum();
    let log_z = max + sum_exp.ln();
    for e in energies.iter_mut() {
        *e = (*e - log_z).exp();
    }
    (energies, log_z)
}

impl GibbsModel {
    fn from_energies(
        sites: SiteSet,
        alphabet: Alphabet,
        energies: Vec<f64>,
        potential: Potential,
    ) -> Self {
        let (probs, log_z) = normalize_log_weights(energies);
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        GibbsModel {
            sites,
            alphabet,
            probs,
            cdf,
            log_z,
            potential,
        }
    }

    /// Pairwise binary model: `P(x) ∝ exp(Σ J_uv x(u)x(v) + Σ h_u x(u))`
    /// with spins in `{-1, +1}`. Each undirected interaction appears once in
    /// `pairs`.
    pub fn build_ising(
        sites: SiteSet,
        pairs: &[(usize, usize, f64)],
        external_fields: Option<&[f64]>,
    ) -> Result<GibbsModel> {
        let m = sites.len();
        let alphabet = Alphabet::spin();
        let len = table_len(m, alphabet.size())?;
        for &(u, v, j) in pairs {
            if u >= m || v >= m {
                return Err(Error::validation(format!(
                    "pair ({u}, {v}) references a site outside 0..{m}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-pair ({u}, {u})")));
            }
            if !j.is_finite() {
                return Err(Error::validation(format!(
                    "coupling for pair ({u}, {v}) is not finite"
                )));
            }
        }
        let fields = match external_fields {
            Some(h) => {
                if h.len() != m {
                    return Err(Error::validation(format!(
                        "expected {m} external fields, got {}",
                        h.len()
                    )));
                }
                if h.iter().any(|x| !x.is_finite()) {
                    return Err(Error::validation("external field is not finite"));
                }
                h.to_vec()
            }
            None => vec![0.0; m],
        };

        let mut energies = Vec::with_capacity(len);
        let mut spins = vec![-1.0f64; m];
        for idx in 0..len {
            for (s, spin) in spins.iter_mut().enumerate() {
                *spin = if idx >> s & 1 == 1 { 1.0 } else { -1.0 };
            }
            let mut e = 0.0;
            for &(u, v, j) in pairs {
                e += j * spins[u] * spins[v];
            }
            for (u, &h) in fields.iter().enumerate() {
                e += h * spins[u];
            }
            energies.push(e);
        }
        Ok(GibbsModel::from_energies(
            sites,
            alphabet,
            energies,
            Potential::Pairwise {
                couplings: pairs.to_vec(),
                fields,
            },
        ))
    }

    /// Ising model on a `rows x cols` grid with all nearest-neighbour edges
    /// carrying the same coupling.
    pub fn ising_grid_nn(rows: usize, cols: usize, coupling: f64) -> Result<GibbsModel> {
        let sites = SiteSet::grid(rows, cols)?;
        let mut pairs = Vec::new();
        let at = |r: usize, c: usize| r * cols + c;
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    pairs.push((at(r, c), at(r, c + 1), coupling));
                }
                if r + 1 < rows {
                    pairs.push((at(r, c), at(r + 1, c), coupling));
                }
            }
        }
        GibbsModel::build_ising(sites, &pairs, None)
    }

    /// General Gibbs model over an arbitrary finite alphabet:
    /// `P(x) ∝ exp(Σ_c φ_c(x(c)))` for a list of clique potentials.
    pub fn from_clique_potentials(
        sites: SiteSet,
        alphabet: Alphabet,
        cliques: Vec<CliquePotential>,
    ) -> Result<GibbsModel> {
        let m = sites.len();
        let a = alphabet.size();
        let len = table_len(m, a)?;
        for clique in &cliques {
            let expect = a.pow(clique.sites.len() as u32);
            if clique.log_weights.len() != expect {
                return Err(Error::validation(format!(
                    "clique on {:?} needs {expect} log-weights, got {}",
                    clique.sites,
                    clique.log_weights.len()
                )));
            }
            if clique.sites.iter().any(|&s| s >= m) {
                return Err(Error::validation(
                    "clique references a site outside the set",
                ));
            }
            if clique.log_weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::validation("clique log-weight is not finite"));
            }
        }
        let mut energies = vec![0.0; len];
        for clique in &cliques {
            for (idx, e) in energies.iter_mut().enumerate() {
                let mut sub = 0usize;
                let mut place = 1usize;
                for &s in &clique.sites {
                    sub += idx / a.pow(s as u32) % a * place;
                    place *= a;
                }
                *e += clique.log_weights[sub];
            }
        }
        Ok(GibbsModel::from_energies(
            sites,
            alphabet,
            energies,
            Potential::Cliques(cliques),
        ))
    }

    /// Normalize an explicit nonnegative weight table into a model.
    pub fn from_weights(sites: SiteSet, alphabet: Alphabet, weights: &[f64]) -> Result<GibbsModel> {
        let len = table_len(sites.len(), alphabet.size())?;
        if weights.len() != len {
            return Err(Error::validation(format!(
                "expected {len} weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::validation("weights must not all be zero"));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(GibbsModel {
            sites,
            alphabet,
            probs,
            cdf,
            log_z: total.ln(),
            potential: Potential::Explicit,
        })
    }

    pub fn uniform(sites: SiteSet, alphabet: Alphabet) -> Result<GibbsModel> {
        let len = table_len(sites.len(), alphabet.size())?;
        GibbsModel::from_weights(sites, alphabet, &vec![1.0; len])
    }

    pub fn site_set(&self) -> &SiteSet {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Log-normalizer of the weight table, kept for diagnostics.
    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn joint_table(&self) -> &[f64] {
        &self.probs
    }

    pub fn joint_probability(&self, x: &Configuration) -> Result<f64> {
        if x.len() != self.sites.len() {
            return Err(Error::validation(format!(
                "configuration has {} entries, model has {} sites",
                x.len(),
                self.sites.len()
            )));
        }
        Ok(self.probs[x.encode(self.alphabet.size())])
    }

    /// Marginal table of `P(x(V))` over all configurations of `subset`,
    /// indexed by the subset encoding (see [`crate::tables::project_index`]).
    pub fn marginal_table(&self, subset: SiteSubset) -> Result<Vec<f64>> {
        self.check_subset(subset)?;
        let a = self.alphabet.size();
        let m = self.sites.len();
        let mut table = vec![0.0; a.pow(subset.cardinality() as u32)];
        for (idx, &p) in self.probs.iter().enumerate() {
            table[crate::tables::project_index(idx, subset, a, m)] += p;
        }
        Ok(table)
    }

    /// `P(x(V))`: the probability that the sites of `subset` take the values
    /// `x` assigns them. Only the entries of `x` inside `subset` are read.
    pub fn marginal_probability(&self, subset: SiteSubset, x: &Configuration) -> Result<f64> {
        if x.len() != self.sites.len() {
            return Err(Error::validation(format!(
                "configuration has {} entries, model has {} sites",
                x.len(),
                self.sites.len()
            )));
        }
        let table = self.marginal_table(subset)?;
        Ok(table[crate::tables::sub_encode(x.values(), subset, self.alphabet.size())])
    }

    /// Conditional table `P(x(i) | x(V\{i}))` over all configurations of
    /// `subset` (which must contain `site`). Contexts with zero marginal mass
    /// follow the uniform convention `1/a`.
    pub fn conditional_table(&self, site: usize, subset: SiteSubset) -> Result<Vec<f64>> {
        if !subset.contains(site) {
            return Err(Error::validation(format!(
                "conditioning set {subset} does not contain site {site}"
            )));
        }
        let mass = self.marginal_table(subset)?;
        Ok(crate::tables::conditional_from_mass(
            &mass,
            subset,
            site,
            self.alphabet.size(),
        ))
    }

    /// `P(x(i) | x(V\{i}))` for a single configuration; `1/a` when the
    /// context has zero mass.
    pub fn exact_conditional(
        &self,
        site: usize,
        subset: SiteSubset,
        x: &Configuration,
    ) -> Result<f64> {
        let table = self.conditional_table(site, subset)?;
        Ok(table[crate::tables::sub_encode(x.values(), subset, self.alphabet.size())])
    }

    /// Closed-form one-point conditional of a pairwise spin model:
    /// `1 / (1 + exp(-2 x(i) (Σ_j J_ij x(j) + h_i)))`.
    pub fn ising_closed_form_conditional(&self, site: usize, x: &Configuration) -> Result<f64> {
        let Potential::Pairwise { couplings, fields } = &self.potential else {
            return Err(Error::unsupported(
                "closed-form conditional requires a pairwise model",
            ));
        };
        if !self.alphabet.is_spin() {
            return Err(Error::unsupported(
                "closed-form conditional requires the {-1,+1} alphabet",
            ));
        }
        if x.len() != self.sites.len() {
            return Err(Error::validation(format!(
                "configuration has {} entries, model has {} sites",
                x.len(),
                self.sites.len()
            )));
        }
        let spin = |s: usize| self.alphabet.symbol(x.value(s) as usize) as f64;
        let mut local = fields[site];
        for &(u, v, j) in couplings {
            if u == site {
                local += j * spin(v);
            } else if v == site {
                local += j * spin(u);
            }
        }
        Ok(1.0 / (1.0 + (-2.0 * spin(site) * local).exp()))
    }

    /// Sites interacting with `site` through a nonzero coupling, plus `site`
    /// itself. Only defined for pairwise models.
    pub fn true_neighborhood(&self, site: usize) -> Result<SiteSubset> {
        let Potential::Pairwise { couplings, .. } = &self.potential else {
            return Err(Error::unsupported(
                "interaction neighborhood requires a pairwise model",
            ));
        };
        let mut subset = SiteSubset::singleton(site);
        for &(u, v, j) in couplings {
            if j != 0.0 {
                if u == site {
                    subset = subset.with(v);
                } else if v == site {
                    subset = subset.with(u);
                }
            }
        }
        Ok(subset)
    }

    /// Draw `n` i.i.d. configurations by inverse CDF over the joint table.
    /// Reproducible for a fixed `(seed, stream)`; distinct streams yield
    /// statistically independent batches.
    pub fn sample(&self, n: usize, seed: u64, stream: u64) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::validation("sample count must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let last = self.cdf.len() - 1;
        let rows = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                self.cdf.partition_point(|&c| c <= u).min(last) as u32
            })
            .collect();
        Ok(SampleBatch {
            rows,
            sites: self.sites.len(),
            alphabet_size: self.alphabet.size(),
            provenance: Some((seed, stream)),
        })
    }

    /// Checks the normalization invariants of the joint table.
    pub fn validate(&self) -> Result<()> {
        if self.probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::validation("joint table has a negative entry"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "joint table sums to {total}, not 1"
            )));
        }
        if self.cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation("cdf is not nondecreasing"));
        }
        if (self.cdf[self.cdf.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::validation("cdf does not end at 1"));
        }
        Ok(())
    }

    fn check_subset(&self, subset: SiteSubset) -> Result<()> {
        if !subset.is_subset_of(self.sites.full_subset()) {
            return Err(Error::validation(format!(
                "subset {subset} is not contained in the {}-site set",
                self.sites.len()
            )));
        }
        Ok(())
    }
}

/// An i.i.d. sample of configurations on the observed sites, stored in
/// encoded form.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    rows: Vec<u32>,
    sites: usize,
    alphabet_size: usize,
    /// `(seed, stream)` when the batch was drawn by [`GibbsModel::sample`];
    /// `None` for batches loaded from files.
    provenance: Option<(u64, u64)>,
}

impl SampleBatch {
    pub fn from_rows(rows: Vec<u32>, sites: usize, alphabet_size: usize) -> Result<Self> {
        let len = table_len(sites, alphabet_size)?;
        if rows.iter().any(|&r| r as usize >= len) {
            return Err(Error::validation("encoded row out of range"));
        }
        Ok(SampleBatch {
            rows,
            sites,
            alphabet_size,
            provenance: None,
        })
    }

    pub fn from_configurations(
        configs: &[Configuration],
        sites: usize,
        alphabet_size: usize,
    ) -> Result<Self> {
        let rows = configs
            .iter()
            .map(|c| {
                if c.len() != sites {
                    Err(Error::validation("configuration length mismatch"))
                } else {
                    Ok(c.encode(alphabet_size) as u32)
                }
            })
            .collect::<Result<Vec<u32>>>()?;
        SampleBatch::from_rows(rows, sites, alphabet_size)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn encoded_rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> Configuration {
        Configuration::decode(self.rows[k] as usize, self.sites, self.alphabet_size)
    }

    pub fn provenance(&self) -> Option<(u64, u64)> {
        self.provenance
    }
}
