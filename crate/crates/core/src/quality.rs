//! Detection of the data pathologies official feeds are known to carry,
//! and the exclusion rules applied before regression. Source panels are
//! never mutated: exclusion produces a filtered copy plus an auditable
//! report listing every removed point.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::panel::EpiPanel;
use crate::region::RegionId;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    /// Daily confirmed exceeds daily tests (both positive): a reporting
    /// or protocol artifact, retained for cumulative curves but worth
    /// flagging.
    FractionExceedsOne,
    /// Daily tests drop to zero between positive neighbours.
    ZeroTestsSpike,
    /// A cumulative series decreased.
    CumulativeDecrease,
    /// A calendar day missing from the interior of the coverage window.
    MissingDay,
}

impl AnomalyKind {
    pub fn label(&self) -> &'static str {
        match self {
            AnomalyKind::FractionExceedsOne => "fraction_exceeds_one",
            AnomalyKind::ZeroTestsSpike => "zero_tests_spike",
            AnomalyKind::CumulativeDecrease => "cumulative_decrease",
            AnomalyKind::MissingDay => "missing_day",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnomalyFlag {
    pub region: RegionId,
    pub date: NaiveDate,
    pub kind: AnomalyKind,
    pub detail: String,
}

/// Which analyses an exclusion applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionScope {
    /// Removed from the daily regressions only.
    DailyRegression,
    /// Removed from every derived curve and regression.
    AllCurves,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExclusionRule {
    pub region: RegionId,
    pub dates: Vec<NaiveDate>,
    pub reason: String,
    pub applies_to: ExclusionScope,
}

/// One removed data point, with the reason it was removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub date: NaiveDate,
    pub reason: String,
    pub scope: ExclusionScope,
}

/// Audit record of everything done to a region's data on the way into an
/// analysis: anomalies observed, points removed, the regression start
/// chosen.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub region: RegionId,
    pub flags: Vec<AnomalyFlag>,
    pub removals: Vec<Removal>,
    pub regression_start: Option<NaiveDate>,
}

impl QualityReport {
    pub fn new(region: RegionId) -> Self {
        QualityReport {
            region,
            flags: Vec::new(),
            removals: Vec::new(),
            regression_start: None,
        }
    }
}

/// Scans a panel for the known pathologies. Deterministic, order
/// independent (the panel's date order is canonical) and idempotent.
pub fn detect_anomalies(panel: &EpiPanel) -> Vec<AnomalyFlag> {
    let mut flags = Vec::new();
    let daily_confirmed = panel.daily_confirmed();
    let daily_tests = panel.daily_tests();

    for i in 0..panel.len() {
        let date = panel.dates[i];
        let conf = daily_confirmed.points[i].1;
        let tests = daily_tests.points[i].1;

        if tests > 0 && conf > tests {
            flags.push(AnomalyFlag {
                region: panel.region,
                date,
                kind: AnomalyKind::FractionExceedsOne,
                detail: format!("daily confirmed {conf} exceeds daily tests {tests}"),
            });
        }

        if tests == 0 && i > 0 && i + 1 < panel.len() {
            let prev = daily_tests.points[i - 1].1;
            let next = daily_tests.points[i + 1].1;
            if prev > 0 && next > 0 {
                flags.push(AnomalyFlag {
                    region: panel.region,
                    date,
                    kind: AnomalyKind::ZeroTestsSpike,
                    detail: format!(
                        "daily tests dropped to 0 between positive neighbours ({prev}, {next})"
                    ),
                });
            }
        }

        if i > 0 {
            for (field, values) in [
                ("confirmed_cum", &panel.confirmed_cum),
                ("deaths_cum", &panel.deaths_cum),
                ("tests_cum", &panel.tests_cum),
            ] {
                if values[i] < values[i - 1] {
                    flags.push(AnomalyFlag {
                        region: panel.region,
                        date,
                        kind: AnomalyKind::CumulativeDecrease,
                        detail: format!(
                            "{field} decreased from {} to {}",
                            values[i - 1],
                            values[i]
                        ),
                    });
                }
            }
        }
    }

    for gap in panel.gaps() {
        flags.push(AnomalyFlag {
            region: panel.region,
            date: gap,
            kind: AnomalyKind::MissingDay,
            detail: "no report for this date".to_string(),
        });
    }

    flags.sort_by_key(|f| (f.date, f.kind));
    flags
}

/// The analysis view used for the daily regressions: dates removed per
/// rule, zero-daily-test days removed when `auto_drop_zero_tests` (their
/// logs would be infinite). Returns the filtered copy and the audit
/// report; the source panel is untouched.
pub fn apply_exclusions(
    panel: &EpiPanel,
    rules: &[ExclusionRule],
    auto_drop_zero_tests: bool,
) -> Result<(EpiPanel, QualityReport)> {
    apply_exclusions_scoped(panel, rules, auto_drop_zero_tests, ExclusionScope::DailyRegression)
}

/// Like [`apply_exclusions`], but for a stated scope: the curve view only
/// honours `all_curves` rules and never auto-drops zero-test days (ratio
/// curves handle zero denominators themselves).
pub fn apply_exclusions_scoped(
    panel: &EpiPanel,
    rules: &[ExclusionRule],
    auto_drop_zero_tests: bool,
    scope: ExclusionScope,
) -> Result<(EpiPanel, QualityReport)> {
    let mut report = QualityReport::new(panel.region);
    report.flags = detect_anomalies(panel);

    let mut removed: BTreeSet<NaiveDate> = BTreeSet::new();
    for rule in rules {
        if rule.region != panel.region {
            return Err(Error::RuleRegionMismatch {
                rule_region: rule.region,
                panel_region: panel.region,
            });
        }
        let in_scope = match scope {
            // the regression view honours both scopes: a date dropped
            // from every curve is certainly dropped from the regression
            ExclusionScope::DailyRegression => true,
            ExclusionScope::AllCurves => rule.applies_to == ExclusionScope::AllCurves,
        };
        if !in_scope {
            continue;
        }
        for &date in &rule.dates {
            if panel.date_index(date).is_some() && removed.insert(date) {
                report.removals.push(Removal {
                    date,
                    reason: rule.reason.clone(),
                    scope: rule.applies_to,
                });
            }
        }
    }

    if auto_drop_zero_tests && scope == ExclusionScope::DailyRegression {
        for (date, tests) in panel.daily_tests().points {
            if tests == 0 && removed.insert(date) {
                report.removals.push(Removal {
                    date,
                    reason: "daily tests are 0: log undefined".to_string(),
                    scope: ExclusionScope::DailyRegression,
                });
            }
        }
    }

    report.removals.sort_by(|a, b| a.date.cmp(&b.date));
    let view = panel.retain_dates(|d| !removed.contains(&d));
    Ok((view, report))
}

/// How the regression start date for a region is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// Earliest date with a positive cumulative death count.
    FirstDeath,
    /// A configured date; must exist in the panel.
    Explicit(NaiveDate),
    /// First date opening a run of `run` consecutive days with daily
    /// tests at or above `floor`. The default policy: it reproduces
    /// "skip the initial noise" without pretending to recover any
    /// particular hand-picked start.
    SustainedTests { floor: i64, run: usize },
}

/// Resolves the regression start date under a policy. The returned date
/// always exists in the panel.
pub fn regression_start(panel: &EpiPanel, policy: &StartPolicy) -> Result<NaiveDate> {
    if panel.is_empty() {
        return Err(Error::NoRows);
    }
    match *policy {
        StartPolicy::FirstDeath => panel
            .dates
            .iter()
            .zip(&panel.deaths_cum)
            .find(|(_, &d)| d > 0)
            .map(|(date, _)| *date)
            .ok_or(Error::NoDeaths),
        StartPolicy::Explicit(date) => {
            if panel.date_index(date).is_some() {
                Ok(date)
            } else {
                Err(Error::StartOutsideCoverage { date })
            }
        }
        StartPolicy::SustainedTests { floor, run } => {
            let daily = panel.daily_tests();
            let run = run.max(1);
            let mut streak = 0usize;
            for (i, &(_, tests)) in daily.points.iter().enumerate() {
                if tests >= floor {
                    streak += 1;
                    if streak >= run {
                        return Ok(panel.dates[i + 1 - run]);
                    }
                } else {
                    streak = 0;
                }
            }
            Err(Error::NoStartDate(format!(
                "no run of {run} days with daily tests >= {floor}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn panel_with_tests(tests_cum: Vec<i64>) -> EpiPanel {
        let n = tests_cum.len();
        let dates: Vec<NaiveDate> = (0..n as u32)
            .map(|i| d(2020, 3, 1) + chrono::Days::new(i as u64))
            .collect();
        EpiPanel::new(
            RegionId::Basilicata,
            dates,
            vec![1; n],
            vec![0; n],
            tests_cum,
            None,
        )
        .unwrap()
    }

    #[test]
    fn flags_fraction_exceeding_one() {
        let p = EpiPanel::new(
            RegionId::Marche,
            vec![d(2020, 3, 1), d(2020, 3, 2)],
            vec![10, 15], // daily [10, 5]
            vec![0, 0],
            vec![20, 23], // daily [20, 3]
            None,
        )
        .unwrap();
        let flags = detect_anomalies(&p);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].kind, AnomalyKind::FractionExceedsOne);
        assert_eq!(flags[0].date, d(2020, 3, 2));
    }

    #[test]
    fn flags_zero_test_spike() {
        let p = panel_with_tests(vec![10, 10, 25]); // daily [10, 0, 15]
        let flags = detect_anomalies(&p);
        let spike: Vec<_> = flags
            .iter()
            .filter(|f| f.kind == AnomalyKind::ZeroTestsSpike)
            .collect();
        assert_eq!(spike.len(), 1);
        assert_eq!(spike[0].date, d(2020, 3, 2));
    }

    #[test]
    fn clean_panel_has_no_flags() {
        let p = EpiPanel::new(
            RegionId::Veneto,
            vec![d(2020, 3, 1), d(2020, 3, 2), d(2020, 3, 3)],
            vec![5, 9, 14],
            vec![0, 1, 2],
            vec![50, 120, 200],
            None,
        )
        .unwrap();
        assert!(detect_anomalies(&p).is_empty());
    }

    #[test]
    fn flags_cumulative_decrease_and_missing_day() {
        let p = EpiPanel::new(
            RegionId::Umbria,
            vec![d(2020, 3, 1), d(2020, 3, 2), d(2020, 3, 4)],
            vec![10, 8, 12],
            vec![0, 0, 0],
            vec![100, 150, 200],
            None,
        )
        .unwrap();
        let flags = detect_anomalies(&p);
        assert!(flags
            .iter()
            .any(|f| f.kind == AnomalyKind::CumulativeDecrease && f.date == d(2020, 3, 2)));
        assert!(flags
            .iter()
            .any(|f| f.kind == AnomalyKind::MissingDay && f.date == d(2020, 3, 3)));
    }

    #[test]
    fn detection_is_idempotent() {
        let p = panel_with_tests(vec![10, 10, 25]);
        assert_eq!(detect_anomalies(&p), detect_anomalies(&p));
    }

    fn march_panel() -> EpiPanel {
        let dates: Vec<NaiveDate> = (25..=31).map(|day| d(2020, 3, day)).collect();
        let n = dates.len();
        EpiPanel::new(
            RegionId::EmiliaRomagna,
            dates,
            (1..=n as i64).map(|i| i * 10).collect(),
            vec![1; n],
            (1..=n as i64).map(|i| i * 100).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn exclusion_rule_removes_exactly_the_named_dates() {
        let p = march_panel();
        let rule = ExclusionRule {
            region: RegionId::EmiliaRomagna,
            dates: vec![d(2020, 3, 28), d(2020, 3, 29), d(2020, 3, 30)],
            reason: "test-count dips".to_string(),
            applies_to: ExclusionScope::DailyRegression,
        };
        let (view, report) = apply_exclusions(&p, &[rule], false).unwrap();
        assert_eq!(view.len(), p.len() - 3);
        assert_eq!(report.removals.len(), 3);
        for day in 28..=30 {
            assert!(view.date_index(d(2020, 3, day)).is_none());
        }
    }

    #[test]
    fn no_rules_is_identity() {
        let p = march_panel();
        let (view, report) = apply_exclusions(&p, &[], false).unwrap();
        assert_eq!(view, p);
        assert!(report.removals.is_empty());
    }

    #[test]
    fn auto_drop_removes_zero_test_days_and_reports_them() {
        let p = panel_with_tests(vec![10, 10, 25]);
        let (view, report) = apply_exclusions(&p, &[], true).unwrap();
        assert!(view.date_index(d(2020, 3, 2)).is_none());
        assert_eq!(view.len(), 2);
        assert_eq!(report.removals.len(), 1);
        assert_eq!(report.removals[0].date, d(2020, 3, 2));
    }

    #[test]
    fn rule_for_wrong_region_is_refused() {
        let p = march_panel();
        let rule = ExclusionRule {
            region: RegionId::Lazio,
            dates: vec![d(2020, 3, 28)],
            reason: "misdirected".to_string(),
            applies_to: ExclusionScope::DailyRegression,
        };
        assert!(matches!(
            apply_exclusions(&p, &[rule], false),
            Err(Error::RuleRegionMismatch { .. })
        ));
    }

    #[test]
    fn curve_scope_ignores_regression_only_rules() {
        let p = march_panel();
        let rule = ExclusionRule {
            region: RegionId::EmiliaRomagna,
            dates: vec![d(2020, 3, 28)],
            reason: "regression only".to_string(),
            applies_to: ExclusionScope::DailyRegression,
        };
        let (view, _) =
            apply_exclusions_scoped(&p, &[rule], true, ExclusionScope::AllCurves).unwrap();
        assert_eq!(view, p);
    }

    fn deaths_panel(deaths_cum: Vec<i64>) -> EpiPanel {
        let n = deaths_cum.len();
        let dates: Vec<NaiveDate> = (0..n as u32)
            .map(|i| d(2020, 3, 1) + chrono::Days::new(i as u64))
            .collect();
        EpiPanel::new(
            RegionId::Puglia,
            dates,
            vec![1; n],
            deaths_cum,
            vec![100; n],
            None,
        )
        .unwrap()
    }

    #[test]
    fn first_death_start() {
        let p = deaths_panel(vec![0, 0, 1, 4]);
        assert_eq!(
            regression_start(&p, &StartPolicy::FirstDeath).unwrap(),
            d(2020, 3, 3)
        );
    }

    #[test]
    fn explicit_start() {
        let p = deaths_panel(vec![0, 0, 1, 4]);
        assert_eq!(
            regression_start(&p, &StartPolicy::Explicit(d(2020, 3, 2))).unwrap(),
            d(2020, 3, 2)
        );
        assert!(matches!(
            regression_start(&p, &StartPolicy::Explicit(d(2020, 6, 1))),
            Err(Error::StartOutsideCoverage { .. })
        ));
    }

    #[test]
    fn first_death_needs_a_death() {
        let p = deaths_panel(vec![0, 0, 0, 0]);
        assert!(matches!(
            regression_start(&p, &StartPolicy::FirstDeath),
            Err(Error::NoDeaths)
        ));
    }

    #[test]
    fn sustained_tests_start() {
        // daily tests: 50, 120, 150, 90, 130, 140, 160
        let p = panel_with_tests(vec![50, 170, 320, 410, 540, 680, 840]);
        let got = regression_start(
            &p,
            &StartPolicy::SustainedTests { floor: 100, run: 3 },
        )
        .unwrap();
        assert_eq!(got, d(2020, 3, 5));
    }
}
