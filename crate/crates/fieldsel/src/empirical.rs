//! Empirical measure fitted from a sample batch.
//!
//! Counts are kept as exact integers and turned into frequencies only on
//! demand, so count-level identities (tables summing to `n`, conditional
//! rows summing to 1) hold exactly. Subset count tables are cached by mask
//! because selection sweeps revisit the same subsets many times.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::field::{Alphabet, Configuration, SampleBatch, SiteSet, SiteSubset};
use crate::tables;

#[derive(Debug)]
pub struct EmpiricalMeasure {
    n: usize,
    sites: usize,
    alphabet_size: usize,
    counts: HashMap<u32, u64>,
    cache: RwLock<HashMap<u32, Arc<Vec<u64>>>>,
}

impl EmpiricalMeasure {
    /// Aggregate a sample batch into exact counts.
    pub fn fit(batch: &SampleBatch) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::validation("cannot fit an empty sample batch"));
        }
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for &row in batch.encoded_rows() {
            *counts.entry(row).or_insert(0) += 1;
        }
        Ok(EmpiricalMeasure {
            n: batch.len(),
            sites: batch.sites(),
            alphabet_size: batch.alphabet_size(),
            counts,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Count table over the configurations of `subset`; entries sum to `n`.
    pub fn count_table(&self, subset: SiteSubset) -> Arc<Vec<u64>> {
        if let Some(table) = self.cache.read().unwrap().get(&subset.mask()) {
            return Arc::clone(table);
        }
        let a = self.alphabet_size;
        let mut table = vec![0u64; a.pow(subset.cardinality() as u32)];
        for (&row, &c) in &self.counts {
            table[tables::project_index(row as usize, subset, a, self.sites)] += c;
        }
        let table = Arc::new(table);
        self.cache
            .write()
            .unwrap()
            .entry(subset.mask())
            .or_insert_with(|| Arc::clone(&table));
        Arc::clone(&table)
    }

    /// Frequency table over the configurations of `subset`.
    pub fn mass_table(&self, subset: SiteSubset) -> Vec<f64> {
        let n = self.n as f64;
        self.count_table(subset)
            .iter()
            .map(|&c| c as f64 / n)
            .collect()
    }

    /// Fraction of rows matching `x` on `subset`. Only the entries of `x`
    /// inside `subset` are read; the empty subset has frequency 1.
    pub fn empirical_marginal(&self, subset: SiteSubset, x: &Configuration) -> f64 {
        let idx = tables::sub_encode(x.values(), subset, self.alphabet_size);
        self.count_table(subset)[idx] as f64 / self.n as f64
    }

    /// Ratio of matching counts `#(x(V)) / #(x(V\{site}))`, or the uniform
    /// `1/a` when the context was never observed.
    pub fn empirical_conditional(
        &self,
        site: usize,
        subset: SiteSubset,
        x: &Configuration,
    ) -> Result<f64> {
        if !subset.contains(site) {
            return Err(Error::validation(format!(
                "conditioning set {subset} does not contain site {site}"
            )));
        }
        let a = self.alphabet_size;
        let cell = self.count_table(subset)[tables::sub_encode(x.values(), subset, a)];
        let inner = subset.without(site);
        let ctx = self.count_table(inner)[tables::sub_encode(x.values(), inner, a)];
        if ctx == 0 {
            Ok(1.0 / a as f64)
        } else {
            Ok(cell as f64 / ctx as f64)
        }
    }

    /// Precompute the count tables for a list of subsets so that later reads
    /// never take the write lock.
    pub fn warm_cache<I: IntoIterator<Item = SiteSubset>>(&self, subsets: I) {
        for subset in subsets {
            let _ = self.count_table(subset);
        }
    }
}

/// Write a sample batch as CSV: a header naming the sites, then one row per
/// observation with raw symbol values.
pub fn write_samples_csv<W: Write>(
    w: W,
    batch: &SampleBatch,
    sites: &SiteSet,
    alphabet: &Alphabet,
) -> Result<()> {
    if sites.len() != batch.sites() || alphabet.size() != batch.alphabet_size() {
        return Err(Error::validation(
            "site set or alphabet does not match the batch",
        ));
    }
    let mut writer = csv::Writer::from_writer(w);
    writer
        .write_record(sites.labels())
        .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    for k in 0..batch.len() {
        let row = batch.row(k);
        let record: Vec<String> = row
            .values()
            .iter()
            .map(|&v| alphabet.symbol(v as usize).to_string())
            .collect();
        writer
            .write_record(&record)
            .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::validation(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Read a sample batch back from CSV. The header must name exactly the sites
/// of `sites` (any order); symbols must belong to `alphabet`.
pub fn read_samples_csv<R: Read>(
    r: R,
    sites: &SiteSet,
    alphabet: &Alphabet,
) -> Result<SampleBatch> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader
        .headers()
        .map_err(|e| Error::validation(format!("csv header: {e}")))?
        .clone();
    if header.len() != sites.len() {
        return Err(Error::validation(format!(
            "sample file names {} sites, model has {}",
            header.len(),
            sites.len()
        )));
    }
    // Column order in the file may differ from the dense site order.
    let mut col_to_site = Vec::with_capacity(header.len());
    for name in header.iter() {
        let site = sites
            .index_of(name)
            .ok_or_else(|| Error::validation(format!("unknown site {name:?} in sample header")))?;
        col_to_site.push(site);
    }
    let mut configs = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::validation(format!("csv row {}: {e}", line + 2)))?;
        let mut values = vec![0u8; sites.len()];
        for (col, cell) in record.iter().enumerate() {
            let symbol: i64 = cell.trim().parse().map_err(|_| {
                Error::validation(format!(
                    "row {}: symbol {cell:?} is not an integer",
                    line + 2
                ))
            })?;
            let idx = alphabet.index_of(symbol).ok_or_else(|| {
                Error::validation(format!("row {}: symbol {symbol} not in alphabet", line + 2))
            })?;
            values[col_to_site[col]] = idx as u8;
        }
        configs.push(Configuration::new(values, alphabet.size())?);
    }
    SampleBatch::from_configurations(&configs, sites.len(), alphabet.size())
}

pub fn write_samples_file(
    path: &Path,
    batch: &SampleBatch,
    sites: &SiteSet,
    alphabet: &Alphabet,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_samples_csv(file, batch, sites, alphabet)
}

pub fn read_samples_file(path: &Path, sites: &SiteSet, alphabet: &Alphabet) -> Result<SampleBatch> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_samples_csv(file, sites, alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GibbsModel;

    fn batch_from_symbol_rows(rows: &[&[i64]]) -> SampleBatch {
        let alphabet = Alphabet::spin();
        let configs: Vec<Configuration> = rows
            .iter()
            .map(|r| Configuration::from_symbols(&alphabet, r).unwrap())
            .collect();
        SampleBatch::from_configurations(&configs, rows[0].len(), 2).unwrap()
    }

    #[test]
    fn single_row_has_frequency_one() {
        let batch = batch_from_symbol_rows(&[&[1, -1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, -1]).unwrap();
        let full = SiteSubset::from_sites(&[0, 1]);
        assert_eq!(em.empirical_marginal(full, &x), 1.0);
    }

    #[test]
    fn duplicate_rows_aggregate() {
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, 1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, 1]).unwrap();
        let full = SiteSubset::from_sites(&[0, 1]);
        assert_eq!(em.empirical_marginal(full, &x), 1.0);
    }

    #[test]
    fn fit_rejects_empty_batch() {
        let batch = SampleBatch::from_rows(vec![], 2, 2).unwrap();
        assert!(matches!(
            EmpiricalMeasure::fit(&batch),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn empty_subset_has_frequency_one() {
        let batch = batch_from_symbol_rows(&[&[1, -1], &[-1, -1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, 1]).unwrap();
        assert_eq!(em.empirical_marginal(SiteSubset::empty(), &x), 1.0);
    }

    #[test]
    fn unobserved_cell_has_frequency_zero() {
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, -1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[-1, 1]).unwrap();
        let full = SiteSubset::from_sites(&[0, 1]);
        assert_eq!(em.empirical_marginal(full, &x), 0.0);
    }

    #[test]
    fn marginal_counts_match_by_hand() {
        // Rows ++, +-, ++ on two sites: site 0 is + in every row.
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, -1], &[1, 1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, 1]).unwrap();
        assert_eq!(em.empirical_marginal(SiteSubset::singleton(0), &x), 1.0);
    }

    #[test]
    fn conditional_counts_match_by_hand() {
        // Rows ++, ++, +-, -+; conditioning site 1 on site 0 at (+,+):
        // two of the three rows with first coordinate + have second +.
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, 1], &[1, -1], &[-1, 1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, 1]).unwrap();
        let v = SiteSubset::from_sites(&[0, 1]);
        let p = em.empirical_conditional(1, v, &x).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unobserved_context_gets_uniform_law() {
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, 1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[-1, 1]).unwrap();
        let v = SiteSubset::from_sites(&[0, 1]);
        let p = em.empirical_conditional(1, v, &x).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn conditioning_on_self_only_is_the_marginal() {
        let batch = batch_from_symbol_rows(&[&[1, 1], &[1, -1], &[-1, -1], &[1, 1]]);
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let x = Configuration::from_symbols(&Alphabet::spin(), &[1, 1]).unwrap();
        let v = SiteSubset::singleton(0);
        let cond = em.empirical_conditional(0, v, &x).unwrap();
        let marg = em.empirical_marginal(v, &x);
        assert_eq!(cond, marg);
    }

    #[test]
    fn conditional_rows_sum_to_one_exactly() {
        let model = GibbsModel::ising_grid_nn(2, 2, 0.5).unwrap();
        let batch = model.sample(257, 5, 0).unwrap();
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        let v = SiteSubset::from_sites(&[0, 1, 2]);
        let cells = em.count_table(v);
        let ctx = em.count_table(v.without(1));
        for c in 0..ctx.len() {
            if ctx[c] == 0 {
                continue;
            }
            // Integer counts split a context exactly.
            let mut total = 0u64;
            for (idx, &count) in cells.iter().enumerate() {
                if tables::project_between(idx, v, v.without(1), 2) == c {
                    total += count;
                }
            }
            assert_eq!(total, ctx[c]);
        }
    }

    #[test]
    fn subset_tables_sum_to_n() {
        let model = GibbsModel::ising_grid_nn(3, 3, 0.2).unwrap();
        let batch = model.sample(1000, 11, 3).unwrap();
        let em = EmpiricalMeasure::fit(&batch).unwrap();
        for mask in [0u32, 1, 5, 0b101010101, 0b111111111] {
            let table = em.count_table(SiteSubset::from_mask(mask));
            assert_eq!(table.iter().sum::<u64>(), 1000);
        }
    }

    #[test]
    fn csv_round_trip() {
        let model = GibbsModel::ising_grid_nn(2, 2, 0.4).unwrap();
        let batch = model.sample(50, 9, 1).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &batch, model.site_set(), model.alphabet()).unwrap();
        let back = read_samples_csv(buf.as_slice(), model.site_set(), model.alphabet()).unwrap();
        assert_eq!(back.encoded_rows(), batch.encoded_rows());
        assert_eq!(back.provenance(), None);
    }

    #[test]
    fn csv_rejects_unknown_site() {
        let model = GibbsModel::ising_grid_nn(2, 2, 0.4).unwrap();
        let data = "a,b,c,d\n1,1,1,1\n";
        let err = read_samples_csv(data.as_bytes(), model.site_set(), model.alphabet());
        assert!(err.is_err());
    }

    #[test]
    fn csv_rejects_foreign_symbol() {
        let model = GibbsModel::ising_grid_nn(1, 2, 0.0).unwrap();
        let data = "(0,0),(0,1)\n1,2\n";
        let err = read_samples_csv(data.as_bytes(), model.site_set(), model.alphabet());
        assert!(err.is_err());
    }
}
