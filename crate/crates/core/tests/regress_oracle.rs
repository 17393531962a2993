//! The regression implementation checked against an independent
//! normal-equations oracle and seeded Monte-Carlo experiments with known
//! ground truth.

use epiharm_core::diagnostics::{
    change_point_recovery, prediction_band_coverage, slope_ci_coverage,
};
use epiharm_core::regress::{change_point, ols_fit, prediction_band, slope_ratio, to_half_life};
use epiharm_core::stats::t_quantile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed-form normal equations on raw (uncentered) sums: a deliberately
/// different algebraic route than the centered two-pass in the library.
fn oracle_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(t, _)| t).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(t, _)| t * t).sum();
    let sxy: f64 = points.iter().map(|(t, y)| t * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let n = rng.random_range(3..=200);
    (0..n)
        .map(|i| {
            // spread plus jitter keeps the time axis non-degenerate
            let t = i as f64 + rng.random_range(-0.3..0.3);
            let y = rng.random_range(-10.0..10.0);
            (t, y)
        })
        .collect()
}

#[test]
fn matches_normal_equations_oracle_on_1000_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20200224);
    for _ in 0..1000 {
        let pts = random_instance(&mut rng);
        let fit = ols_fit(&pts).unwrap();
        let (slope, intercept) = oracle_fit(&pts);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        assert!(rel(fit.slope, slope) < 1e-10, "{} vs {slope}", fit.slope);
        assert!(
            rel(fit.intercept, intercept) < 1e-10,
            "{} vs {intercept}",
            fit.intercept
        );
    }
}

#[test]
fn fit_minimizes_rss() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let pts = random_instance(&mut rng);
        let fit = ols_fit(&pts).unwrap();
        let rss = |a: f64, b: f64| -> f64 {
            pts.iter().map(|&(t, y)| (y - a * t - b).powi(2)).sum()
        };
        let best = rss(fit.slope, fit.intercept);
        for (da, db) in [(1e-4, 0.0), (-1e-4, 0.0), (0.0, 1e-4), (0.0, -1e-4), (1e-4, -1e-4)] {
            assert!(best <= rss(fit.slope + da, fit.intercept + db) + 1e-12);
        }
    }
}

#[test]
fn shift_invariance_in_y() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts = random_instance(&mut rng);
    let fit = ols_fit(&pts).unwrap();
    let c = 3.7;
    let shifted: Vec<(f64, f64)> = pts.iter().map(|&(t, y)| (t, y + c)).collect();
    let fit2 = ols_fit(&shifted).unwrap();
    assert!((fit2.slope - fit.slope).abs() < 1e-12);
    assert!((fit2.intercept - (fit.intercept + c)).abs() < 1e-12);
    let w1 = fit.slope_ci_95.1 - fit.slope_ci_95.0;
    let w2 = fit2.slope_ci_95.1 - fit2.slope_ci_95.0;
    assert!((w1 - w2).abs() < 1e-12);
    let (lo1, hi1) = prediction_band(&fit, 4.2);
    let (lo2, hi2) = prediction_band(&fit2, 4.2);
    assert!(((hi1 - lo1) - (hi2 - lo2)).abs() < 1e-10);
}

#[test]
fn time_origin_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = random_instance(&mut rng);
    let fit = ols_fit(&pts).unwrap();
    let delta = 17.0;
    let shifted: Vec<(f64, f64)> = pts.iter().map(|&(t, y)| (t + delta, y)).collect();
    let fit2 = ols_fit(&shifted).unwrap();
    assert!((fit2.slope - fit.slope).abs() < 1e-12);
    // predicted values at corresponding times coincide
    for &(t, _) in pts.iter().take(5) {
        assert!((fit.predict(t) - fit2.predict(t + delta)).abs() < 1e-9);
    }
}

#[test]
fn count_scale_invariance_of_log_slopes() {
    // scaling counts by lambda adds ln(lambda) to the log series and must
    // leave the slope untouched: conclusions are unit-free
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<(f64, f64)> = (0..60)
        .map(|i| {
            let t = i as f64;
            (t, (-0.05 * t + 4.0 + rng.random_range(-0.2..0.2)).exp())
        })
        .collect();
    let lambda = 3.5f64;
    let logged: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    let scaled: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, (lambda * v).ln())).collect();
    let f1 = ols_fit(&logged).unwrap();
    let f2 = ols_fit(&scaled).unwrap();
    assert!((f1.slope - f2.slope).abs() < 1e-12);
}

#[test]
fn slope_ci_covers_truth_in_at_least_93_percent_of_trials() {
    let coverage = slope_ci_coverage(1000, 50, -0.05, 0.3, 20200305);
    assert!(coverage >= 0.93, "coverage {coverage}");
}

#[test]
fn prediction_band_coverage_is_95_percent_within_one_point() {
    let coverage = prediction_band_coverage(10_000, 20, 20200510);
    assert!(
        (coverage - 0.95).abs() <= 0.01,
        "coverage {coverage} outside 95% +/- 1%"
    );
}

#[test]
fn change_point_recovered_within_two_days_in_95_percent_of_trials() {
    let frac = change_point_recovery(500, 0.05, 2.0, 20200315);
    assert!(frac >= 0.95, "recovery fraction {frac}");
}

#[test]
fn t_quantile_matches_published_table() {
    assert!((t_quantile(0.975, 10.0) - 2.228139).abs() < 1e-5);
}

#[test]
fn half_life_identities() {
    // a = -ln 2 gives exactly one day: pin the slope to the exact value
    // (a fitted slope would carry 1-ulp rounding)
    let pts: Vec<(f64, f64)> = (0..10)
        .map(|i| (i as f64, -std::f64::consts::LN_2 * i as f64))
        .collect();
    let mut fit = ols_fit(&pts).unwrap();
    fit.slope = -std::f64::consts::LN_2;
    fit.slope_ci_95 = (fit.slope - 1e-9, fit.slope + 1e-9);
    let hl = to_half_life(&fit).unwrap();
    assert_eq!(hl.value, 1.0);
    // ln2 / value recovers |a| exactly
    assert_eq!(std::f64::consts::LN_2 / hl.value, fit.slope.abs());
}

#[test]
fn half_life_ratio_times_slope_ratio_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let a_f = -rng.random_range(0.01..0.2);
        let a_raw = -rng.random_range(0.01..0.2);
        let mk = |slope: f64| {
            let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, slope * i as f64)).collect();
            ols_fit(&pts).unwrap()
        };
        let r = slope_ratio(&mk(a_f), &mk(a_raw)).unwrap();
        let product = r.ratio * r.half_life_ratio;
        assert!(
            (product - 1.0).abs() <= f64::EPSILON,
            "product {product} for ratio {}",
            r.ratio
        );
    }
}

#[test]
fn two_segment_rss_never_exceeds_global_rss() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| (i as f64, rng.random_range(-1.0..1.0)))
            .collect();
        let global = ols_fit(&pts).unwrap();
        let cp = change_point(&pts, 5).unwrap();
        assert!(cp.total_rss <= global.rss() + 1e-9);
    }
}
