//! Acceptance suite: the study-level checks the artifact must pass, one
//! test per criterion, each printing a `PASS` line with the measured
//! numbers (run with `--nocapture` to see them).

mod common;

use rayon::prelude::*;

use fieldsel::bench::{parse_config, run_risk_ratio, run_variance_experiment, ExperimentConfig};
use fieldsel::empirical::EmpiricalMeasure;
use fieldsel::field::{Alphabet, Configuration, GibbsModel, SiteSet, SiteSubset};
use fieldsel::risk::{self, LossKind, RiskEngine};
use fieldsel::selection::{enumerate_models, oracle, select, PenaltySpec, SelectionResult};
use fieldsel::slope::{default_k_grid, detect_kmin, penalty_path, ComplexityKind};
use fieldsel::tables::Estimator;

use common::{repo_root, study_model};

fn study_config(extra: &str) -> ExperimentConfig {
    let text = format!(
        "model = {}\ntarget = (1,1)\n{extra}",
        repo_root().join("configs/ising3x3.field").display()
    );
    parse_config(&text, &repo_root().join("acceptance.cfg")).unwrap()
}

/// 1. On the configured 3x3 study model, the enumeration conditional equals
///    the pairwise closed form on all 512 configurations to 1e-12.
#[test]
fn acceptance_01_conditional_oracle_equivalence() {
    let start = std::time::Instant::now();
    let model = study_model();
    let target = model.site_set().index_of("(1,1)").unwrap();
    let full = model.site_set().full_subset();
    let mut worst = 0.0f64;
    for idx in 0..512 {
        let x = Configuration::decode(idx, 9, 2);
        let exact = model.exact_conditional(target, full, &x).unwrap();
        let closed = model.ising_closed_form_conditional(target, &x).unwrap();
        worst = worst.max((exact - closed).abs());
    }
    assert!(worst <= 1e-12, "max abs error {worst}");
    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!(
        "ACCEPTANCE 1 conditional-oracle-equivalence: PASS (max abs error {worst:.2e}, {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

/// 2. Quadratic and Küllback decompositions are additive to 1e-10 over a
///    randomized grid of at least 200 (model, sample, candidate) triples,
///    including uniform, strong-coupling and single-sample cases.
#[test]
fn acceptance_02_decomposition_identities() {
    use rand::Rng;
    use rand::SeedableRng;
    let start = std::time::Instant::now();

    let mut models = vec![
        GibbsModel::ising_grid_nn(3, 3, 0.0).unwrap(),
        study_model(),
        GibbsModel::ising_grid_nn(3, 3, 1.0).unwrap(),
    ];
    for seed in 0..3u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
        let weights: Vec<f64> = (0..16).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sites = SiteSet::new((0..4).map(|k| format!("w{k}")).collect()).unwrap();
        models.push(GibbsModel::from_weights(sites, Alphabet::spin(), &weights).unwrap());
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0usize;
    let mut finite_kl = 0usize;
    let mut worst = 0.0f64;
    for (mk, model) in models.iter().enumerate() {
        let m = model.site_count();
        let target = if m == 9 { 4 } else { 0 };
        let engine = RiskEngine::new(model, target).unwrap();
        for &n in &[1usize, 7, 50, 300] {
            for rep in 0..3u64 {
                let batch = model.sample(n, 100 * mk as u64 + rep, 0).unwrap();
                let em = EmpiricalMeasure::fit(&batch).unwrap();
                let est = Estimator::Empirical(&em);
                for _ in 0..3 {
                    let extra = rng.random::<u32>() & ((1 << m) - 1);
                    let subset = SiteSubset::from_mask(extra).with(target);
                    let l2 = engine.l2_decomposition(est, subset).unwrap();
                    assert!(
                        l2.additivity_gap() <= 1e-10,
                        "l2 gap {} on model {mk}, n {n}, subset {subset}",
                        l2.additivity_gap()
                    );
                    assert!(l2.variance >= -1e-12 && l2.bias >= -1e-12);
                    worst = worst.max(l2.additivity_gap());
                    let kl = engine.kl_decomposition(est, subset).unwrap();
                    if kl.is_finite() {
                        finite_kl += 1;
                        assert!(
                            kl.additivity_gap() <= 1e-10,
                            "kl gap {} on model {mk}, n {n}, subset {subset}",
                            kl.additivity_gap()
                        );
                        assert!(kl.variance >= -1e-12 && kl.bias >= -1e-12);
                        worst = worst.max(kl.additivity_gap());
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 200, "only {checked} triples");
    // Small-sample cases legitimately flag infinite Küllback risks; the
    // additivity identity is asserted on the finite ones, which must still
    // make up a substantial share of the grid.
    assert!(finite_kl >= 50, "only {finite_kl} finite Küllback cases");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed}s");
    println!(
        "ACCEPTANCE 2 decomposition-identities: PASS ({checked} triples, {finite_kl} finite KL, worst gap {worst:.2e}, {elapsed:.2}s)"
    );
}

/// 3. Scaled variance terms stay level in n: the least-squares drift across
///    the grid is at most a quarter of the mean level, for both losses.
#[test]
fn acceptance_03_variance_scaling() {
    let start = std::time::Instant::now();
    let model = study_model();
    let cfg = study_config("n_grid = 100:5000:100\nreplicas = 100\nbase_seed = 20110901\n");
    let out = run_variance_experiment(&model, &cfg, 0).unwrap();
    let summary = &out.tables[1];
    let meta = |key: &str| -> f64 { summary.metadata[key].parse().unwrap() };
    let span = (5000 - 100) as f64;
    let drift_l2 = meta("slope_l2").abs() * span;
    let drift_kl = meta("slope_kl").abs() * span;
    let level_l2 = meta("mean_level_l2");
    let level_kl = meta("mean_level_kl");
    assert!(
        drift_l2 <= 0.25 * level_l2,
        "l2 drift {drift_l2} vs level {level_l2}"
    );
    assert!(
        drift_kl <= 0.25 * level_kl,
        "kl drift {drift_kl} vs level {level_kl}"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed}s");
    println!(
        "ACCEPTANCE 3 variance-scaling: PASS (l2 drift/level {:.3}, kl drift/level {:.3}, {elapsed:.1}s)",
        drift_l2 / level_l2,
        drift_kl / level_kl
    );
}

fn slope_runs() -> Vec<(bool, bool, f64, bool)> {
    // Per seeded run at n = 500 with the quadratic-variance complexity:
    // (maximal below 0.9, k_min in window, k_min, oracle match at 2 k_min).
    let model = study_model();
    let target = model.site_set().index_of("(1,1)").unwrap();
    let coll = enumerate_models(model.site_set(), target, 9).unwrap();
    let grid = default_k_grid();
    (0..100u64)
        .into_par_iter()
        .map(|run| {
            let stream =
                fieldsel::bench::derive_stream(20110901, "acceptance-slope", 500, run as usize);
            let batch = model.sample(500, 20110901, stream).unwrap();
            let em = EmpiricalMeasure::fit(&batch).unwrap();
            let est = Estimator::Empirical(&em);
            let path = penalty_path(
                &coll,
                est,
                Some(&model),
                LossKind::L2,
                ComplexityKind::L2Variance,
                &grid,
                500,
            )
            .unwrap();
            let max = path.max_complexity();
            let maximal_below = path
                .points
                .iter()
                .filter(|p| p.k < 0.9)
                .all(|p| p.complexity == max);
            let (k_min, in_window) = match detect_kmin(&path) {
                Ok((k_min, _)) => (k_min, (0.7..=1.5).contains(&k_min)),
                Err(_) => (f64::NAN, false),
            };
            let matches_oracle = if k_min.is_finite() {
                let chosen = path.select_at(2.0 * k_min).unwrap().chosen;
                let oracle_v = oracle(&model, est, &coll, LossKind::L2).unwrap();
                chosen == oracle_v
            } else {
                false
            };
            (maximal_below, in_window, k_min, matches_oracle)
        })
        .collect()
}

/// 4. In at least 90 of 100 seeded runs at n = 500, the selection stays
///    maximally complex below c = 0.9 and the detected jump lands in
///    [0.7, 1.5].
#[test]
fn acceptance_04_slope_heuristic_jump() {
    let start = std::time::Instant::now();
    let runs = slope_runs();
    let hits = runs.iter().filter(|r| r.0 && r.1).count();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(hits >= 90, "only {hits}/100 runs show the jump pattern");
    assert!(elapsed < 600.0, "took {elapsed}s");
    println!("ACCEPTANCE 4 slope-heuristic-jump: PASS ({hits}/100 runs, {elapsed:.1}s)");
}

/// 5. In at least 70 of the same runs, the model selected at twice the
///    detected constant is exactly the oracle model.
///
/// Under the documented nearest-neighbour reconstruction this threshold is
/// not met: at n = 500 the exact-identity rate is ~55-60% because dropping
/// one weak neighbour costs about as much bias (~0.007) as the calibrated
/// penalty saves (~0.005), so the two selections sit on a knife edge. The
/// rate rises to ~90% at n = 1000 and 100% at n = 2000 (see
/// `calibrated_selection_matches_oracle_at_larger_n` in the invariants
/// suite), which is the convergence the threshold was meant to capture.
/// The criterion is asserted as stated and left red; the README's
/// known-failure note carries the summary.
#[test]
fn acceptance_05_oracle_match_at_twice_kmin() {
    let start = std::time::Instant::now();
    let runs = slope_runs();
    let hits = runs.iter().filter(|r| r.3).count();
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 5 oracle-match-at-2kmin: measured {hits}/100 exact matches at n=500 ({elapsed:.1}s)"
    );
    assert!(
        hits >= 70,
        "only {hits}/100 exact oracle matches at n=500; the measured rate of this \
         statistic is ~55-60% under the documented nearest-neighbour edge set \
         (it reaches 100/100 by n=2000), so the 70% bar cannot be met honestly \
         at n=500 — see the known-failure note in the README"
    );
    println!("ACCEPTANCE 5 oracle-match-at-2kmin: PASS ({hits}/100 runs, {elapsed:.1}s)");
}

/// 6. Average slope-heuristic risk ratios: at most 1.5 at n = 2000, at most
///    1.2 at n = 10000, and no worse than the theoretical-constant ratio at
///    n = 10000.
#[test]
fn acceptance_06_risk_ratio_convergence() {
    let start = std::time::Instant::now();
    let model = study_model();
    let cfg =
        study_config("n_grid = 2000 10000\nreplicas = 100\nbase_seed = 20110901\ntheory_k = 2\n");
    let out = run_risk_ratio(&model, &cfg, 0).unwrap();
    let summary = &out.tables[1];
    let slope_ratios = summary.float_column("mean_slope_ratio");
    let theory_ratios = summary.float_column("mean_theory_ratio");
    let (slope_2k, slope_10k) = (slope_ratios[0], slope_ratios[1]);
    let theory_10k = theory_ratios[1];
    assert!(slope_2k <= 1.5, "slope ratio {slope_2k} at n=2000");
    assert!(slope_10k <= 1.2, "slope ratio {slope_10k} at n=10000");
    assert!(
        slope_10k <= theory_10k,
        "slope {slope_10k} vs theory {theory_10k} at n=10000"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1800.0, "took {elapsed}s");
    println!(
        "ACCEPTANCE 6 risk-ratio-convergence: PASS (n=2000: {slope_2k:.3}, n=10000: {slope_10k:.3} vs theory {theory_10k:.3}, {elapsed:.1}s)"
    );
}

/// 7. The simultaneous mass-deviation event at confidence 10 holds in at
///    least 900 of 1000 replicas at n = 2000.
#[test]
fn acceptance_07_typicality_frequency() {
    let start = std::time::Instant::now();
    let model = study_model();
    let hits: usize = (0..1000u64)
        .into_par_iter()
        .map(|replica| {
            let stream = fieldsel::bench::derive_stream(
                20110901,
                "acceptance-typicality",
                2000,
                replica as usize,
            );
            let batch = model.sample(2000, 20110901, stream).unwrap();
            let em = EmpiricalMeasure::fit(&batch).unwrap();
            risk::typicality_event_holds(&model, &em, 9, 10.0).unwrap() as usize
        })
        .sum();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(hits >= 900, "event held in only {hits}/1000 replicas");
    assert!(elapsed < 300.0, "took {elapsed}s");
    println!("ACCEPTANCE 7 typicality-frequency: PASS ({hits}/1000 replicas, {elapsed:.1}s)");
}

/// Straight-line reimplementation of the penalized selection: counts are
/// re-derived by scanning the raw rows for every cell — no count tables, no
/// caches, no shared code with the production path — and ties are broken by
/// cardinality then mask. The per-cell arithmetic mirrors the production
/// expressions (frequencies first, contexts accumulated in symbol order) so
/// that mathematically tied criteria stay bitwise ties; anything else makes
/// the tie-break comparison ill-posed.
fn brute_force_select(
    rows: &[Configuration],
    site: usize,
    m: usize,
    pen_constant: f64,
    loss: LossKind,
) -> (SiteSubset, f64) {
    let n = rows.len() as f64;
    let scan_count = |subset: SiteSubset, values: &[u8]| -> f64 {
        rows.iter()
            .filter(|r| subset.sites().all(|s| r.value(s) == values[s]))
            .count() as f64
    };
    let mut best: Option<(SiteSubset, f64)> = None;
    for raw in 0u32..(1 << m) {
        let subset = SiteSubset::from_mask(raw);
        if !subset.contains(site) {
            continue;
        }
        let v = subset.cardinality();
        let cells = 1usize << v;
        let mut fit = 0.0;
        for cell in 0..cells {
            // Decode the cell into per-site values on the subset.
            let mut values = vec![0u8; m];
            for (j, s) in subset.sites().enumerate() {
                values[s] = (cell >> j & 1) as u8;
            }
            let mass_cell = scan_count(subset, &values) / n;
            let mut mass_ctx = 0.0;
            for b in 0..2u8 {
                let mut sibling = values.clone();
                sibling[site] = b;
                mass_ctx += scan_count(subset, &sibling) / n;
            }
            match loss {
                LossKind::L2 => {
                    if mass_ctx > 0.0 {
                        let cond = mass_cell / mass_ctx;
                        fit -= mass_ctx * cond * cond * 0.5;
                    }
                }
                LossKind::Kullback => {
                    if mass_cell > 0.0 {
                        let cond = mass_cell / mass_ctx;
                        fit -= mass_cell * cond.ln();
                    }
                }
            }
        }
        let criterion = fit + pen_constant * 2f64.powi(v as i32) / n;
        let better = match best {
            None => true,
            Some((bc, bv)) => {
                criterion < bv
                    || (criterion == bv
                        && (subset.cardinality(), subset.mask()) < (bc.cardinality(), bc.mask()))
            }
        };
        if better {
            best = Some((subset, criterion));
        }
    }
    best.unwrap()
}

/// 8. On four-site models, the cached selection equals the cache-free
///    straight-line reimplementation on 500 random batches, tie-breaks
///    included, for both losses.
#[test]
fn acceptance_08_selection_brute_force_equivalence() {
    let start = std::time::Instant::now();
    let chain = |j: f64| {
        let sites = SiteSet::new((0..4).map(|k| format!("c{k}")).collect()).unwrap();
        GibbsModel::build_ising(sites, &[(0, 1, j), (1, 2, j), (2, 3, j)], None).unwrap()
    };
    let star = {
        let sites = SiteSet::new((0..4).map(|k| format!("t{k}")).collect()).unwrap();
        GibbsModel::build_ising(sites, &[(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)], None).unwrap()
    };
    let uniform = GibbsModel::ising_grid_nn(2, 2, 0.0).unwrap();
    let models = [chain(0.2), chain(1.0), star, uniform];

    let mut batches = 0usize;
    for (mk, model) in models.iter().enumerate() {
        let coll = enumerate_models(model.site_set(), 0, 4).unwrap();
        for rep in 0..125u64 {
            let n = 20 + (rep as usize % 7) * 40;
            let batch = model.sample(n, 500 * mk as u64 + rep, 1).unwrap();
            let em = EmpiricalMeasure::fit(&batch).unwrap();
            let rows: Vec<Configuration> = (0..batch.len()).map(|k| batch.row(k)).collect();
            for (loss, constant) in [
                (LossKind::L2, 0.0),
                (LossKind::L2, 1.5),
                (LossKind::Kullback, 3.0),
            ] {
                let pen = PenaltySpec::dimension(loss, constant).unwrap();
                let fast: SelectionResult =
                    select(&coll, Estimator::Empirical(&em), &pen, n).unwrap();
                let (slow_choice, slow_value) = brute_force_select(&rows, 0, 4, constant, loss);
                assert_eq!(
                    fast.chosen, slow_choice,
                    "model {mk}, rep {rep}, loss {loss}, constant {constant}"
                );
                let fast_value = fast.criterion_values[&fast.chosen];
                assert!(
                    (fast_value - slow_value).abs() < 1e-12,
                    "criterion mismatch {fast_value} vs {slow_value}"
                );
            }
            batches += 1;
        }
    }
    assert_eq!(batches, 500);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed}s");
    println!(
        "ACCEPTANCE 8 selection-brute-force-equivalence: PASS (500 batches x 3 criteria, 0 mismatches, {elapsed:.1}s)"
    );
}

/// 9. Two `risk-ratio` runs with the same config and seed but worker counts
///    1 and 8 produce byte-identical CSV bodies.
#[test]
fn acceptance_09_cli_determinism() {
    let start = std::time::Instant::now();
    let dir = std::env::temp_dir().join(format!("fieldsel-acc9-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("exp.cfg");
    std::fs::write(
        &cfg_path,
        format!(
            "model = {}\ntarget = (1,1)\nn_grid = 300 600\nreplicas = 4\nbase_seed = 77\n",
            repo_root().join("configs/ising3x3.field").display()
        ),
    )
    .unwrap();
    let run = |workers: &str, out: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_fieldsel"))
            .args(["risk-ratio", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(out)
            .args(["--seed", "77", "--workers", workers])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    };
    let out1 = dir.join("w1");
    let out8 = dir.join("w8");
    run("1", &out1);
    run("8", &out8);
    for file in ["riskratio_replicas.csv", "riskratio_summary.csv"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out8.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between worker counts");
        assert!(!a.is_empty());
    }
    std::fs::remove_dir_all(&dir).ok();
    println!(
        "ACCEPTANCE 9 cli-determinism: PASS (byte-identical CSV bodies, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}
