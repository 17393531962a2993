//! Ordinary least squares of a log series on time, with the derived
//! quantities the analysis layer reports: confidence intervals for the
//! slope, prediction bands, half-life/doubling-time transforms, slope
//! ratios and an exhaustive two-segment change-point fit.
//!
//! Time is measured in days since a regression origin, so a slope is
//! directly a rate per day and `ln(2)/|slope|` is a half-life (slope
//! negative) or doubling time (slope positive) in days.

use chrono::NaiveDate;

use crate::error::Error;
use crate::stats::t_quantile;
use crate::Result;

/// A simple linear fit `y = slope * t + intercept` with the sufficient
/// statistics needed to reconstruct intervals at any point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// Rate per day.
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
    /// 95% confidence interval for the slope, lo < hi.
    pub slope_ci_95: (f64, f64),
    /// RSS / (n - 2).
    pub residual_variance: f64,
    /// Σ (t_i - t̄)², in day².
    pub sxx: f64,
    pub t_mean: f64,
    /// The calendar date mapped to t = 0, when the fit was made on dated
    /// data.
    pub time_origin: Option<NaiveDate>,
}

impl RegressionFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }

    pub fn rss(&self) -> f64 {
        self.residual_variance * (self.n as f64 - 2.0)
    }

    pub fn with_origin(mut self, origin: NaiveDate) -> Self {
        self.time_origin = Some(origin);
        self
    }

    /// Standard error of the slope.
    pub fn slope_se(&self) -> f64 {
        (self.residual_variance / self.sxx).sqrt()
    }
}

/// Least-squares fit of `y ~ t`. Needs at least three points (two
/// parameters plus one residual degree of freedom) and a non-degenerate
/// time axis.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<RegressionFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { need: 3, got: n });
    }
    let nf = n as f64;
    let t_mean = points.iter().map(|(t, _)| t).sum::<f64>() / nf;
    let y_mean = points.iter().map(|(_, y)| y).sum::<f64>() / nf;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(t, y) in points {
        sxx += (t - t_mean) * (t - t_mean);
        sxy += (t - t_mean) * (y - y_mean);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateTimeAxis);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;

    let mut rss = 0.0;
    for &(t, y) in points {
        let r = y - (slope * t + intercept);
        rss += r * r;
    }
    let residual_variance = rss / (nf - 2.0);
    let se = (residual_variance / sxx).sqrt();
    let q = t_quantile(0.975, nf - 2.0);

    Ok(RegressionFit {
        slope,
        intercept,
        n,
        slope_ci_95: (slope - q * se, slope + q * se),
        residual_variance,
        sxx,
        t_mean,
        time_origin: None,
    })
}

/// Interval expected to contain a NEW observation at time `t` with 95%
/// probability: wider than the confidence band for the mean because it
/// carries the residual variance term. Narrowest at t = t̄ and strictly
/// widening as |t - t̄| grows.
pub fn prediction_band(fit: &RegressionFit, t: f64) -> (f64, f64) {
    prediction_band_at_level(fit, t, 0.95)
}

pub fn prediction_band_at_level(fit: &RegressionFit, t: f64, level: f64) -> (f64, f64) {
    let df = fit.n as f64 - 2.0;
    let q = t_quantile(1.0 - (1.0 - level) / 2.0, df);
    let d = t - fit.t_mean;
    let half = q
        * (fit.residual_variance * (1.0 + 1.0 / fit.n as f64 + d * d / fit.sxx)).sqrt();
    let center = fit.predict(t);
    (center - half, center + half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthKind {
    /// Slope negative: days to halve.
    HalfLife,
    /// Slope positive: days to double.
    DoublingTime,
}

impl GrowthKind {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthKind::HalfLife => "half_life",
            GrowthKind::DoublingTime => "doubling_time",
        }
    }
}

/// ln(2)/|slope| in days, with the slope CI pushed through the same
/// monotone transform.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLife {
    pub value: f64,
    pub ci_95: (f64, f64),
    pub kind: GrowthKind,
}

/// Converts a slope to a half-life (slope < 0) or doubling time
/// (slope > 0). When the slope CI straddles zero the growth direction is
/// not resolved and no finite time can honestly be reported; the error
/// carries the slope CI so callers can still print it.
pub fn to_half_life(fit: &RegressionFit) -> Result<HalfLife> {
    let (lo, hi) = fit.slope_ci_95;
    if fit.slope == 0.0 || (lo <= 0.0 && hi >= 0.0) {
        return Err(Error::IndeterminateGrowth { slope_ci: (lo, hi) });
    }
    let ln2 = std::f64::consts::LN_2;
    let value = ln2 / fit.slope.abs();
    let (a, b) = (ln2 / lo.abs(), ln2 / hi.abs());
    Ok(HalfLife {
        value,
        ci_95: (a.min(b), a.max(b)),
        kind: if fit.slope < 0.0 {
            GrowthKind::HalfLife
        } else {
            GrowthKind::DoublingTime
        },
    })
}

/// Ratio of two slopes and the corresponding ratio of their half-lives
/// (the exact reciprocal, since ln 2 cancels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeRatio {
    pub ratio: f64,
    pub half_life_ratio: f64,
}

pub fn slope_ratio(fit_fraction: &RegressionFit, fit_raw: &RegressionFit) -> Result<SlopeRatio> {
    if fit_raw.slope == 0.0 {
        return Err(Error::ZeroSlope);
    }
    let ratio = fit_fraction.slope / fit_raw.slope;
    Ok(SlopeRatio {
        ratio,
        half_life_ratio: 1.0 / ratio,
    })
}

/// Best two-segment split of a series: the break index minimizing the sum
/// of the two segment residual sums of squares, searched exhaustively.
#[derive(Debug, Clone)]
pub struct ChangePointFit {
    /// Index of the first point of the right segment.
    pub break_index: usize,
    /// Time coordinate of that point.
    pub break_t: f64,
    pub left: RegressionFit,
    pub right: RegressionFit,
    pub total_rss: f64,
}

/// Exhaustive two-segment least squares. Every break leaving at least
/// `min_segment` points on each side is evaluated; ties go to the
/// earliest break. With the n ≲ 100 points a regional series has, the
/// O(n²) scan is exact and instantaneous.
pub fn change_point(points: &[(f64, f64)], min_segment: usize) -> Result<ChangePointFit> {
    let n = points.len();
    let min_segment = min_segment.max(3);
    if n < 2 * min_segment + 1 {
        return Err(Error::TooFewPoints {
            need: 2 * min_segment + 1,
            got: n,
        });
    }
    let mut best: Option<ChangePointFit> = None;
    for k in min_segment..=(n - min_segment) {
        let left = ols_fit(&points[..k])?;
        let right = ols_fit(&points[k..])?;
        let total_rss = left.rss() + right.rss();
        // rounding keeps exactly-tied RSS values from comparing equal on a
        // noiseless series; improvements below this threshold count as
        // ties and the earliest break stands
        let better = match &best {
            None => true,
            Some(b) => b.total_rss - total_rss > 1e-12 * b.total_rss + 1e-18,
        };
        if better {
            best = Some(ChangePointFit {
                break_index: k,
                break_t: points[k].0,
                left,
                right,
                total_rss,
            });
        }
    }
    Ok(best.expect("at least one admissible break"))
}
