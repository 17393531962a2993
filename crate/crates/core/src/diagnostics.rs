//! Seeded Monte-Carlo self-checks for the regression machinery. Each
//! experiment generates synthetic data with known ground truth and
//! reports how often the estimator recovers it; the property-test suite
//! and the CLI `selftest` command both run these with explicit seeds, so
//! results are reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::regress::{change_point, ols_fit, prediction_band};

/// Fraction of trials in which the fitted slope's 95% CI covers the true
/// slope. Data: `n` evenly spaced days, y = slope*t + N(0, sigma^2).
pub fn slope_ci_coverage(trials: usize, n: usize, slope: f64, sigma: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut hits = 0usize;
    for _ in 0..trials {
        let points: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = i as f64;
                (t, slope * t + normal.sample(&mut rng))
            })
            .collect();
        let fit = ols_fit(&points).expect("well-posed synthetic data");
        let (lo, hi) = fit.slope_ci_95;
        if lo <= slope && slope <= hi {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Empirical coverage of the 95% prediction band. Each trial fits a
/// fresh small dataset and then draws one new observation at a uniformly
/// random in-range time; unconditionally on the refits, the band covers
/// the new point with exactly the nominal probability.
pub fn prediction_band_coverage(trials: usize, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slope = -0.04;
    let intercept = 1.3;
    let sigma = 0.5;
    let mut hits = 0usize;
    for _ in 0..trials {
        let points: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = i as f64;
                let eps: f64 = rng.sample(StandardNormal);
                (t, slope * t + intercept + sigma * eps)
            })
            .collect();
        let fit = ols_fit(&points).expect("well-posed synthetic data");
        let t_new = rng.random_range(0.0..(n as f64 - 1.0));
        let eps: f64 = rng.sample(StandardNormal);
        let y_new = slope * t_new + intercept + sigma * eps;
        let (lo, hi) = prediction_band(&fit, t_new);
        if lo <= y_new && y_new <= hi {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Fraction of trials recovering a known break within `tol_days`. The
/// synthetic series rises at +0.05/day for 30 days, then falls at
/// -0.05/day to day 80, with N(0, noise^2) jitter.
pub fn change_point_recovery(trials: usize, noise: f64, tol_days: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise).expect("noise > 0");
    let break_t = 30.0;
    let mut hits = 0usize;
    for _ in 0..trials {
        let points: Vec<(f64, f64)> = (0..=80)
            .map(|i| {
                let t = i as f64;
                let level = if t <= break_t {
                    0.05 * t
                } else {
                    0.05 * break_t - 0.05 * (t - break_t)
                };
                (t, level + normal.sample(&mut rng))
            })
            .collect();
        let cp = change_point(&points, 5).expect("enough points");
        if (cp.break_t - break_t).abs() <= tol_days {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_experiments_are_deterministic() {
        let a = slope_ci_coverage(50, 30, -0.05, 0.3, 7);
        let b = slope_ci_coverage(50, 30, -0.05, 0.3, 7);
        assert_eq!(a, b);
        let c = prediction_band_coverage(200, 20, 11);
        let d = prediction_band_coverage(200, 20, 11);
        assert_eq!(c, d);
    }

    #[test]
    fn change_point_recovery_is_sharp_at_low_noise() {
        let frac = change_point_recovery(50, 0.01, 2.0, 3);
        assert!(frac > 0.95, "got {frac}");
    }
}
