//! Per-region analysis orchestration: builds the four log-series
//! regressions from a screened panel, converts slopes to half-lives,
//! forms the fraction/raw slope ratio, locates the change point and
//! assembles the curve set.

use chrono::NaiveDate;

use epiharm_core::curves::{
    baseline_for, build_curve, BaselineMortality, CurveKind, CurveSeries,
};
use epiharm_core::mortality::{MortalityTable, Sex};
use epiharm_core::panel::EpiPanel;
use epiharm_core::quality::{
    apply_exclusions, apply_exclusions_scoped, regression_start, ExclusionScope, QualityReport,
};
use epiharm_core::regress::{
    change_point, ols_fit, slope_ratio, to_half_life, ChangePointFit, HalfLife, RegressionFit,
    SlopeRatio,
};
use epiharm_core::{Error, RegionId, Result};

use crate::config::QualityConfig;

/// The four regressions reported per region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesKind {
    /// ln(daily confirmed) - ln(daily tests) ~ time.
    DailyLogFraction,
    /// ln(daily confirmed) ~ time.
    DailyConfirmed,
    /// ln(daily tests) ~ time.
    DailyTests,
    /// ln(cumulative confirmed) - ln(cumulative tests) ~ time.
    CumulativeLogFraction,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 4] = [
        SeriesKind::DailyLogFraction,
        SeriesKind::DailyConfirmed,
        SeriesKind::DailyTests,
        SeriesKind::CumulativeLogFraction,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SeriesKind::DailyLogFraction => "daily_log_fraction",
            SeriesKind::DailyConfirmed => "daily_confirmed",
            SeriesKind::DailyTests => "daily_tests",
            SeriesKind::CumulativeLogFraction => "cumulative_log_fraction",
        }
    }
}

/// A slope converted to effect size, or the honest admission that the
/// CI straddles zero and no growth direction is resolved.
#[derive(Debug, Clone)]
pub enum GrowthTime {
    Resolved(HalfLife),
    Indeterminate { slope_ci: (f64, f64) },
}

#[derive(Debug, Clone)]
pub struct FitBundle {
    pub kind: SeriesKind,
    pub fit: RegressionFit,
    pub growth: GrowthTime,
    /// The fitted points, as (date, t offset in days, y).
    pub points: Vec<(NaiveDate, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ChangePointSummary {
    pub break_date: NaiveDate,
    pub fit: ChangePointFit,
}

/// Everything the regress command reports for one region.
#[derive(Debug)]
pub struct RegionAnalysis {
    pub region: RegionId,
    pub start: NaiveDate,
    pub fits: Vec<FitBundle>,
    pub ratio: Option<SlopeRatio>,
    pub change_point: Option<ChangePointSummary>,
    pub report: QualityReport,
}

impl RegionAnalysis {
    pub fn fit(&self, kind: SeriesKind) -> Option<&FitBundle> {
        self.fits.iter().find(|f| f.kind == kind)
    }
}

fn log_points(
    view: &EpiPanel,
    start: NaiveDate,
    values: impl Fn(&EpiPanel, usize) -> Option<f64>,
) -> Vec<(NaiveDate, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..view.len() {
        let date = view.dates[i];
        if date < start {
            continue;
        }
        if let Some(y) = values(view, i) {
            let t = (date - start).num_days() as f64;
            out.push((date, t, y));
        }
    }
    out
}

fn ln_pos(v: i64) -> Option<f64> {
    (v > 0).then(|| (v as f64).ln())
}

/// Runs the full regression suite for one region's panel under the given
/// quality settings. The daily regressions run on the exclusion-screened
/// view; the cumulative regression only honours all-curve exclusions
/// (cumulative values on a zero-test day are still valid data).
pub fn region_suite(
    panel: &EpiPanel,
    quality: &QualityConfig,
    min_segment: usize,
) -> Result<RegionAnalysis> {
    let rules = quality.rules_for(panel.region);
    let (daily_view, report) = apply_exclusions(panel, &rules, quality.auto_drop_zero_tests)?;
    let (cumulative_view, _) =
        apply_exclusions_scoped(panel, &rules, false, ExclusionScope::AllCurves)?;

    let policy = quality
        .policy_for(panel.region)
        .map_err(|e| Error::InvalidInput(e.message()))?;
    let start = regression_start(panel, &policy)?;

    let daily_confirmed = daily_view.daily_confirmed();
    let daily_tests = daily_view.daily_tests();

    let fraction_points = log_points(&daily_view, start, |_, i| {
        match (ln_pos(daily_confirmed.points[i].1), ln_pos(daily_tests.points[i].1)) {
            (Some(c), Some(t)) => Some(c - t),
            _ => None,
        }
    });
    let confirmed_points =
        log_points(&daily_view, start, |_, i| ln_pos(daily_confirmed.points[i].1));
    let tests_points = log_points(&daily_view, start, |_, i| ln_pos(daily_tests.points[i].1));
    let cumulative_points = log_points(&cumulative_view, start, |view, i| {
        match (ln_pos(view.confirmed_cum[i]), ln_pos(view.tests_cum[i])) {
            (Some(c), Some(t)) => Some(c - t),
            _ => None,
        }
    });

    let mut report = report;
    report.regression_start = Some(start);

    let mut fits = Vec::new();
    for (kind, points) in [
        (SeriesKind::DailyLogFraction, fraction_points),
        (SeriesKind::DailyConfirmed, confirmed_points),
        (SeriesKind::DailyTests, tests_points),
        (SeriesKind::CumulativeLogFraction, cumulative_points),
    ] {
        let ts: Vec<(f64, f64)> = points.iter().map(|&(_, t, y)| (t, y)).collect();
        let fit = ols_fit(&ts)?.with_origin(start);
        let growth = match to_half_life(&fit) {
            Ok(hl) => GrowthTime::Resolved(hl),
            Err(Error::IndeterminateGrowth { slope_ci }) => {
                GrowthTime::Indeterminate { slope_ci }
            }
            Err(e) => return Err(e),
        };
        fits.push(FitBundle {
            kind,
            fit,
            growth,
            points,
        });
    }

    let ratio = {
        let fraction = fits.iter().find(|f| f.kind == SeriesKind::DailyLogFraction);
        let raw = fits.iter().find(|f| f.kind == SeriesKind::DailyConfirmed);
        match (fraction, raw) {
            (Some(f), Some(r)) => slope_ratio(&f.fit, &r.fit).ok(),
            _ => None,
        }
    };

    // the change point lives in the full fraction history, not just the
    // post-start fit window
    let change_point = {
        let all_fraction = log_points(&daily_view, daily_view.first_date(), |_, i| {
            match (ln_pos(daily_confirmed.points[i].1), ln_pos(daily_tests.points[i].1)) {
                (Some(c), Some(t)) => Some(c - t),
                _ => None,
            }
        });
        let ts: Vec<(f64, f64)> = all_fraction.iter().map(|&(_, t, y)| (t, y)).collect();
        change_point(&ts, min_segment).ok().map(|fit| {
            let break_date = all_fraction[fit.break_index].0;
            ChangePointSummary { break_date, fit }
        })
    };

    Ok(RegionAnalysis {
        region: panel.region,
        start,
        fits,
        ratio,
        change_point,
        report,
    })
}

/// The curves drawn for one region, plus notices for anything skipped.
pub struct RegionCurves {
    pub region: RegionId,
    pub curves: Vec<CurveSeries>,
    pub notices: Vec<String>,
}

/// Builds every applicable curve kind for a region. Death-ratio kinds are
/// skipped with a notice when the region has no mortality slice of its
/// own (the autonomous provinces are merged in the death tables).
pub fn region_curves(
    panel: &EpiPanel,
    quality: &QualityConfig,
    mortality: Option<&MortalityTable>,
    baselines: &[BaselineMortality],
) -> Result<RegionCurves> {
    let rules = quality.rules_for(panel.region);
    let (view, _) = apply_exclusions_scoped(panel, &rules, false, ExclusionScope::AllCurves)?;

    let baseline = baseline_for(baselines, panel.region, Sex::Total, None);
    let mut curves = Vec::new();
    let mut notices = Vec::new();

    for kind in CurveKind::REGIONAL {
        let has_mortality = mortality
            .map(|m| m.weekly_region_total(panel.region, 2020).is_some())
            .unwrap_or(false);
        if kind.needs_mortality() && !has_mortality {
            notices.push(format!(
                "{}: {} skipped, no mortality data for this region key",
                panel.region,
                kind.label()
            ));
            continue;
        }
        if kind.needs_baseline() && baseline.is_none() {
            notices.push(format!(
                "{}: {} skipped, no baseline mortality for this region key",
                panel.region,
                kind.label()
            ));
            continue;
        }
        curves.push(build_curve(kind, &view, mortality, baseline, None)?);
    }

    Ok(RegionCurves {
        region: panel.region,
        curves,
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    /// Synthetic panel with a known fraction decay of -0.05/day and test
    /// growth of +0.02/day from 1 March.
    fn synthetic_panel(region: RegionId) -> EpiPanel {
        let start = d(2020, 3, 1);
        let n = 60usize;
        let dates: Vec<NaiveDate> = (0..n as u64).map(|i| start + Days::new(i)).collect();
        let mut tests_cum = Vec::new();
        let mut confirmed_cum = Vec::new();
        let mut deaths_cum = Vec::new();
        let mut t_sum = 0i64;
        let mut c_sum = 0i64;
        for i in 0..n {
            let t = i as f64;
            let daily_tests = (2000.0 * (0.02 * t).exp()).round() as i64;
            let fraction = 0.3 * (-0.05 * t).exp();
            let daily_confirmed = (daily_tests as f64 * fraction).round() as i64;
            t_sum += daily_tests;
            c_sum += daily_confirmed;
            tests_cum.push(t_sum);
            confirmed_cum.push(c_sum);
            deaths_cum.push((i as i64 + 1) * 3);
        }
        EpiPanel::new(region, dates, confirmed_cum, deaths_cum, tests_cum, None).unwrap()
    }

    #[test]
    fn suite_recovers_known_slopes() {
        let panel = synthetic_panel(RegionId::Lombardia);
        let mut quality = QualityConfig::default();
        quality
            .start
            .explicit
            .insert(RegionId::Lombardia, d(2020, 3, 3));
        let analysis = region_suite(&panel, &quality, 5).unwrap();
        assert_eq!(analysis.start, d(2020, 3, 3));

        let fraction = analysis.fit(SeriesKind::DailyLogFraction).unwrap();
        assert!((fraction.fit.slope + 0.05).abs() < 0.003, "{}", fraction.fit.slope);
        let tests = analysis.fit(SeriesKind::DailyTests).unwrap();
        assert!((tests.fit.slope - 0.02).abs() < 0.003);
        let raw = analysis.fit(SeriesKind::DailyConfirmed).unwrap();
        assert!((raw.fit.slope + 0.03).abs() < 0.003);

        let ratio = analysis.ratio.unwrap();
        assert!((ratio.ratio - 0.05 / 0.03).abs() < 0.2);
        assert_eq!(ratio.half_life_ratio, 1.0 / ratio.ratio);

        match &fraction.growth {
            GrowthTime::Resolved(hl) => {
                assert!((hl.value - std::f64::consts::LN_2 / 0.05).abs() < 1.0)
            }
            GrowthTime::Indeterminate { .. } => panic!("slope is clearly negative"),
        }
    }

    #[test]
    fn time_axis_uses_day_offsets_across_gaps() {
        let panel = synthetic_panel(RegionId::Veneto);
        // knock out three mid-window days: offsets must keep calendar
        // spacing, so the slope estimate stays unbiased
        let gap_panel = panel.retain_dates(|date| {
            !(d(2020, 3, 20)..=d(2020, 3, 22)).contains(&date)
        });
        let mut quality = QualityConfig::default();
        quality
            .start
            .explicit
            .insert(RegionId::Veneto, d(2020, 3, 3));
        let analysis = region_suite(&gap_panel, &quality, 5).unwrap();
        let fraction = analysis.fit(SeriesKind::DailyLogFraction).unwrap();
        assert!((fraction.fit.slope + 0.05).abs() < 0.003);
        // the excluded dates are absent from the fitted points
        assert!(fraction
            .points
            .iter()
            .all(|(date, _, _)| *date < d(2020, 3, 20) || *date > d(2020, 3, 22)));
    }
}
