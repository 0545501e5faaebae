//! Shared helpers for the integration suites.

#![allow(dead_code)]

use std::path::PathBuf;

use fieldsel::field::GibbsModel;
use fieldsel::model_file;

/// Repository root, two levels above the crate manifest.
pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repo root")
}

/// The configured 3x3 study model (J = 0.2, nearest-neighbour edges).
pub fn study_model() -> GibbsModel {
    model_file::load_model(&repo_root().join("configs/ising3x3.field")).expect("study model")
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, good to ~1e-13 for x > 0.
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut ser = 1.000000000190015;
    let mut denom = x;
    for c in COEFFS {
        denom += 1.0;
        ser += c / denom;
    }
    let tmp = x + 5.5;
    (x + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * ser / x).ln()
}

fn gamma_series(a: f64, x: f64) -> f64 {
    // Lower regularized incomplete gamma by series expansion.
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    // Upper regularized incomplete gamma by Lentz's continued fraction.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper regularized incomplete gamma `Q(a, x)`.
pub fn gammq(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

/// Survival function of the chi-squared distribution.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    gammq(df / 2.0, stat / 2.0)
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn chi2_sf_matches_known_points() {
        // Chi-squared with 2 df is Exp(1/2): Q(x) = exp(-x/2).
        for x in [0.5, 2.0, 10.0] {
            assert!((chi2_sf(x, 2.0) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        // Median of chi-squared(1) is ~0.4549.
        assert!((chi2_sf(0.454936, 1.0) - 0.5).abs() < 1e-5);
    }
}
