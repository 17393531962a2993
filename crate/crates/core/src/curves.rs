//! Construction of the labeled analysis curves: testing-scaled case
//! counts, the death-ratio family built on weekly mortality, the raw
//! death-toll overlays and the national rollup.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate};

use crate::error::Error;
use crate::mortality::{AgeBand, MortalityCell, MortalityTable, Sex, REFERENCE_YEARS};
use crate::panel::EpiPanel;
use crate::region::RegionId;
use crate::series::{weekly_aggregate, WeekBin};
use crate::Result;

/// The closed set of curve kinds. The first twelve are the ratio/count
/// curves drawn for every region; `RawWeeklyDeathToll` is the per-year
/// overlay family built by [`raw_death_toll_curves`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveKind {
    /// Cruise-ship cumulative confirmed over the 3711 aboard.
    DpConfirmedScaled,
    /// Cumulative confirmed / cumulative tests.
    ConfirmedOverTests,
    /// Cumulative case fatalities / cumulative all-cause deaths in 2020.
    CovidFracCumulDeaths,
    /// Cumulative case fatalities / cumulative baseline deaths.
    CovidFracCumulDeathsWrtPast,
    /// Weekly case fatalities / weekly excess deaths (2020 minus baseline).
    CovidFracExcessDeaths,
    /// Weekly case fatalities / weekly all-cause deaths in 2020.
    CovidFracWeeklyDeaths,
    /// Weekly case fatalities / weekly baseline deaths.
    CovidFracWeeklyDeathsWrtPast,
    /// Weekly 2020 all-cause deaths / weekly baseline deaths.
    Deaths2020WrtPast,
    /// Daily confirmed count.
    ConfirmedDaily,
    /// ln(daily confirmed) - ln(daily tests).
    LogConfirmedMinusLogTestsDaily,
    /// ln(cumulative confirmed) - ln(cumulative tests).
    LogConfirmedMinusLogTestsCumulative,
    /// Daily test count.
    TestsDaily,
    /// One weekly death-toll curve per year, for cross-year overlays.
    RawWeeklyDeathToll,
}

impl CurveKind {
    pub const ALL: [CurveKind; 13] = [
        CurveKind::DpConfirmedScaled,
        CurveKind::ConfirmedOverTests,
        CurveKind::CovidFracCumulDeaths,
        CurveKind::CovidFracCumulDeathsWrtPast,
        CurveKind::CovidFracExcessDeaths,
        CurveKind::CovidFracWeeklyDeaths,
        CurveKind::CovidFracWeeklyDeathsWrtPast,
        CurveKind::Deaths2020WrtPast,
        CurveKind::ConfirmedDaily,
        CurveKind::LogConfirmedMinusLogTestsDaily,
        CurveKind::LogConfirmedMinusLogTestsCumulative,
        CurveKind::TestsDaily,
        CurveKind::RawWeeklyDeathToll,
    ];

    /// The ratio/count kinds drawn per region (everything except the DP
    /// reference and the per-year toll overlays).
    pub const REGIONAL: [CurveKind; 11] = [
        CurveKind::ConfirmedOverTests,
        CurveKind::CovidFracCumulDeaths,
        CurveKind::CovidFracCumulDeathsWrtPast,
        CurveKind::CovidFracExcessDeaths,
        CurveKind::CovidFracWeeklyDeaths,
        CurveKind::CovidFracWeeklyDeathsWrtPast,
        CurveKind::Deaths2020WrtPast,
        CurveKind::ConfirmedDaily,
        CurveKind::LogConfirmedMinusLogTestsDaily,
        CurveKind::LogConfirmedMinusLogTestsCumulative,
        CurveKind::TestsDaily,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::DpConfirmedScaled => "dp_confirmed_scaled",
            CurveKind::ConfirmedOverTests => "confirmed_over_tests",
            CurveKind::CovidFracCumulDeaths => "covid_frac_cumul_deaths",
            CurveKind::CovidFracCumulDeathsWrtPast => "covid_frac_cumul_deaths_wrt_past",
            CurveKind::CovidFracExcessDeaths => "covid_frac_excess_deaths",
            CurveKind::CovidFracWeeklyDeaths => "covid_frac_weekly_deaths",
            CurveKind::CovidFracWeeklyDeathsWrtPast => "covid_frac_weekly_deaths_wrt_past",
            CurveKind::Deaths2020WrtPast => "deaths_2020_wrt_past",
            CurveKind::ConfirmedDaily => "confirmed_daily",
            CurveKind::LogConfirmedMinusLogTestsDaily => "log_confirmed_minus_log_tests_daily",
            CurveKind::LogConfirmedMinusLogTestsCumulative => {
                "log_confirmed_minus_log_tests_cumulative"
            }
            CurveKind::TestsDaily => "tests_daily",
            CurveKind::RawWeeklyDeathToll => "raw_weekly_death_toll",
        }
    }

    /// Does this kind need the weekly 2020 all-cause deaths?
    pub fn needs_mortality(&self) -> bool {
        matches!(
            self,
            CurveKind::CovidFracCumulDeaths
                | CurveKind::CovidFracExcessDeaths
                | CurveKind::CovidFracWeeklyDeaths
                | CurveKind::Deaths2020WrtPast
        )
    }

    /// Does this kind need the 2015-2019 weekly baseline?
    pub fn needs_baseline(&self) -> bool {
        matches!(
            self,
            CurveKind::CovidFracCumulDeathsWrtPast
                | CurveKind::CovidFracExcessDeaths
                | CurveKind::CovidFracWeeklyDeathsWrtPast
                | CurveKind::Deaths2020WrtPast
        )
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveKind::ALL
            .iter()
            .copied()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown curve kind {s:?}")))
    }
}

/// X coordinate of a curve point: a calendar date for daily curves, a
/// week bin for weekly ones. Both print as an ISO date (the bin's first
/// day) so tidy tables stay uniformly sortable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurveX {
    Date(NaiveDate),
    Week(WeekBin),
}

impl CurveX {
    pub fn as_date(&self) -> NaiveDate {
        match self {
            CurveX::Date(d) => *d,
            CurveX::Week(w) => w.start_date(),
        }
    }
}

impl fmt::Display for CurveX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_date().format("%Y-%m-%d"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleHint {
    Linear,
    Log,
}

/// A point dropped during construction, with the reason. Ratio curves
/// never emit infinities: zero denominators land here instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Omission {
    pub x: CurveX,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub kind: CurveKind,
    pub region: RegionId,
    /// Set for the per-year death-toll overlays.
    pub year: Option<u16>,
    pub points: Vec<(CurveX, f64)>,
    pub scale_hint: ScaleHint,
    pub omitted: Vec<Omission>,
}

/// Five-year weekly mean deaths for one (region, sex, age band) slice,
/// plus the constant used to extrapolate past the end of the mortality
/// coverage: the mean of the final complete week (the one containing 15
/// April in the reference years).
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineMortality {
    pub region: RegionId,
    pub sex: Sex,
    /// `None` is the all-ages aggregate.
    pub age_band: Option<AgeBand>,
    pub weekly_mean: Vec<f64>,
    pub terminal_mean: f64,
}

/// Per-week arithmetic mean of the 2015-2019 death counts for every
/// (region, sex, age band) slice in the table, including all-ages
/// aggregates. A slice missing any reference year is an error.
pub fn build_baseline(table: &MortalityTable) -> Result<Vec<BaselineMortality>> {
    let n_weeks = table.n_weeks();
    // group cells by (region, sex, age) across years
    let mut slices: BTreeMap<(RegionId, Sex, AgeBand), Vec<u16>> = BTreeMap::new();
    for (cell, _) in table.iter() {
        slices
            .entry((cell.region, cell.sex, cell.age_band.clone()))
            .or_default()
            .push(cell.year);
    }

    let mut out = Vec::new();
    let mut totals: BTreeMap<(RegionId, Sex), Vec<f64>> = BTreeMap::new();

    for ((region, sex, age_band), years) in slices {
        let found = REFERENCE_YEARS
            .iter()
            .filter(|y| years.contains(y))
            .count();
        if found < REFERENCE_YEARS.len() {
            return Err(Error::MissingReferenceYears {
                need: REFERENCE_YEARS.len(),
                found,
            });
        }
        let mut mean = vec![0.0; n_weeks];
        for year in REFERENCE_YEARS {
            let weekly = table
                .weekly(region, sex, &age_band, year)
                .expect("year presence checked above");
            for (m, &w) in mean.iter_mut().zip(weekly) {
                *m += w as f64;
            }
        }
        for m in &mut mean {
            *m /= REFERENCE_YEARS.len() as f64;
        }
        let agg = totals
            .entry((region, sex))
            .or_insert_with(|| vec![0.0; n_weeks]);
        for (a, &m) in agg.iter_mut().zip(&mean) {
            *a += m;
        }
        let terminal_mean = *mean.last().expect("table has at least one week");
        out.push(BaselineMortality {
            region,
            sex,
            age_band: Some(age_band),
            weekly_mean: mean,
            terminal_mean,
        });
    }

    for ((region, sex), mean) in totals {
        let terminal_mean = *mean.last().expect("non-empty");
        out.push(BaselineMortality {
            region,
            sex,
            age_band: None,
            weekly_mean: mean,
            terminal_mean,
        });
    }
    Ok(out)
}

/// Finds the baseline entry for a slice.
pub fn baseline_for<'a>(
    baselines: &'a [BaselineMortality],
    region: RegionId,
    sex: Sex,
    age_band: Option<&AgeBand>,
) -> Option<&'a BaselineMortality> {
    baselines
        .iter()
        .find(|b| b.region == region && b.sex == sex && b.age_band.as_ref() == age_band)
}

impl BaselineMortality {
    /// Baseline deaths for week `w` (1-based), extrapolating with the
    /// terminal mean past the covered window.
    pub fn week(&self, w: usize) -> f64 {
        if w >= 1 && w <= self.weekly_mean.len() {
            self.weekly_mean[w - 1]
        } else {
            self.terminal_mean
        }
    }

    /// Cumulative baseline deaths through week `w`.
    pub fn cumulative_through(&self, w: usize) -> f64 {
        (1..=w).map(|k| self.week(k)).sum()
    }
}

const DP_POPULATION: u64 = 3711;

/// Builds one curve for one region.
///
/// `mortality` must hold the region's weekly 2020 all-cause deaths for
/// the death-ratio kinds; `baseline` the matching all-ages total
/// baseline. Points whose denominator is zero (or whose excess is
/// non-positive, for the excess-ratio curve) are omitted and recorded on
/// the returned series rather than emitted as infinities.
pub fn build_curve(
    kind: CurveKind,
    panel: &EpiPanel,
    mortality: Option<&MortalityTable>,
    baseline: Option<&BaselineMortality>,
    dp_population: Option<u64>,
) -> Result<CurveSeries> {
    let region = panel.region;
    let mut series = CurveSeries {
        kind,
        region,
        year: None,
        points: Vec::new(),
        scale_hint: match kind {
            CurveKind::LogConfirmedMinusLogTestsDaily
            | CurveKind::LogConfirmedMinusLogTestsCumulative => ScaleHint::Linear,
            _ => ScaleHint::Log,
        },
        omitted: Vec::new(),
    };

    if kind == CurveKind::DpConfirmedScaled && region != RegionId::DiamondPrincess {
        return Err(Error::CurveRegionMismatch {
            kind: kind.label(),
            expected: RegionId::DiamondPrincess,
            got: region,
        });
    }

    let weekly_2020: Option<Vec<u64>> = if kind.needs_mortality() {
        let table = mortality.ok_or(Error::CurveInput {
            kind: kind.label(),
            what: "weekly 2020 mortality",
        })?;
        Some(
            table
                .weekly_region_total(region, 2020)
                .ok_or(Error::CurveInput {
                    kind: kind.label(),
                    what: "weekly 2020 mortality for this region",
                })?,
        )
    } else {
        None
    };

    let baseline = if kind.needs_baseline() {
        let b = baseline.ok_or(Error::CurveInput {
            kind: kind.label(),
            what: "baseline mortality",
        })?;
        if b.region != region {
            return Err(Error::CurveInput {
                kind: kind.label(),
                what: "baseline mortality for this region",
            });
        }
        Some(b)
    } else {
        None
    };

    match kind {
        CurveKind::DpConfirmedScaled => {
            let population = dp_population.or(panel.population).unwrap_or(DP_POPULATION);
            for (i, &date) in panel.dates.iter().enumerate() {
                let confirmed = panel.confirmed_cum[i];
                if confirmed as u64 > population {
                    return Err(Error::InvalidInput(format!(
                        "confirmed {confirmed} exceeds closed population {population} on {date}"
                    )));
                }
                series
                    .points
                    .push((CurveX::Date(date), confirmed as f64 / population as f64));
            }
        }
        CurveKind::ConfirmedOverTests => {
            for (i, &date) in panel.dates.iter().enumerate() {
                if panel.tests_cum[i] == 0 {
                    series.omit(CurveX::Date(date), "cumulative tests are zero");
                } else {
                    series.points.push((
                        CurveX::Date(date),
                        panel.confirmed_cum[i] as f64 / panel.tests_cum[i] as f64,
                    ));
                }
            }
        }
        CurveKind::CovidFracCumulDeaths => {
            let weekly = weekly_2020.expect("resolved above");
            let mut cum_all_cause = 0.0;
            for (w, &deaths) in weekly.iter().enumerate() {
                let bin = WeekBin::new(2020, w as u32 + 1);
                cum_all_cause += deaths as f64;
                let Some(covid_cum) = covid_cum_at_week_end(panel, bin) else {
                    continue;
                };
                if cum_all_cause == 0.0 {
                    series.omit(CurveX::Week(bin), "cumulative all-cause deaths are zero");
                } else {
                    series
                        .points
                        .push((CurveX::Week(bin), covid_cum as f64 / cum_all_cause));
                }
            }
        }
        CurveKind::CovidFracCumulDeathsWrtPast => {
            let b = baseline.expect("resolved above");
            // extends past the mortality coverage: the baseline holds its
            // terminal value from there on
            for bin in panel_week_ends(panel) {
                let w = bin.week as usize;
                let covid_cum = covid_cum_at_week_end(panel, bin).expect("end date in panel");
                let denom = b.cumulative_through(w);
                if denom == 0.0 {
                    series.omit(CurveX::Week(bin), "cumulative baseline deaths are zero");
                } else {
                    series.points.push((CurveX::Week(bin), covid_cum as f64 / denom));
                }
            }
        }
        CurveKind::CovidFracExcessDeaths => {
            let weekly = weekly_2020.expect("resolved above");
            let b = baseline.expect("resolved above");
            for (bin, covid) in weekly_covid_deaths(panel)? {
                let w = bin.week as usize;
                if w > weekly.len() {
                    // no observed 2020 deaths past the coverage: the
                    // excess is not defined there
                    continue;
                }
                let excess = weekly[w - 1] as f64 - b.week(w);
                if excess <= 0.0 {
                    series.omit(
                        CurveX::Week(bin),
                        &format!("weekly excess is non-positive ({excess:.1})"),
                    );
                } else {
                    series.points.push((CurveX::Week(bin), covid as f64 / excess));
                }
            }
        }
        CurveKind::CovidFracWeeklyDeaths => {
            let weekly = weekly_2020.expect("resolved above");
            for (bin, covid) in weekly_covid_deaths(panel)? {
                let w = bin.week as usize;
                if w > weekly.len() {
                    continue;
                }
                let denom = weekly[w - 1] as f64;
                if denom == 0.0 {
                    series.omit(CurveX::Week(bin), "weekly all-cause deaths are zero");
                } else {
                    series.points.push((CurveX::Week(bin), covid as f64 / denom));
                }
            }
        }
        CurveKind::CovidFracWeeklyDeathsWrtPast => {
            let b = baseline.expect("resolved above");
            for (bin, covid) in weekly_covid_deaths(panel)? {
                let denom = b.week(bin.week as usize);
                if denom == 0.0 {
                    series.omit(CurveX::Week(bin), "weekly baseline deaths are zero");
                } else {
                    series.points.push((CurveX::Week(bin), covid as f64 / denom));
                }
            }
        }
        CurveKind::Deaths2020WrtPast => {
            let weekly = weekly_2020.expect("resolved above");
            let b = baseline.expect("resolved above");
            for (w, &deaths) in weekly.iter().enumerate() {
                let bin = WeekBin::new(2020, w as u32 + 1);
                let denom = b.week(w + 1);
                if denom == 0.0 {
                    series.omit(CurveX::Week(bin), "weekly baseline deaths are zero");
                } else {
                    series.points.push((CurveX::Week(bin), deaths as f64 / denom));
                }
            }
        }
        CurveKind::ConfirmedDaily => {
            for (date, v) in panel.daily_confirmed().points {
                series.points.push((CurveX::Date(date), v as f64));
            }
        }
        CurveKind::LogConfirmedMinusLogTestsDaily => {
            let confirmed = panel.daily_confirmed();
            let tests = panel.daily_tests();
            for i in 0..panel.len() {
                let date = panel.dates[i];
                let c = confirmed.points[i].1;
                let t = tests.points[i].1;
                if c <= 0 {
                    series.omit(CurveX::Date(date), "daily confirmed is non-positive");
                } else if t <= 0 {
                    series.omit(CurveX::Date(date), "daily tests are non-positive");
                } else {
                    series
                        .points
                        .push((CurveX::Date(date), (c as f64).ln() - (t as f64).ln()));
                }
            }
        }
        CurveKind::LogConfirmedMinusLogTestsCumulative => {
            for (i, &date) in panel.dates.iter().enumerate() {
                let c = panel.confirmed_cum[i];
                let t = panel.tests_cum[i];
                if c <= 0 {
                    series.omit(CurveX::Date(date), "cumulative confirmed is zero");
                } else if t <= 0 {
                    series.omit(CurveX::Date(date), "cumulative tests are zero");
                } else {
                    series
                        .points
                        .push((CurveX::Date(date), (c as f64).ln() - (t as f64).ln()));
                }
            }
        }
        CurveKind::TestsDaily => {
            for (date, v) in panel.daily_tests().points {
                series.points.push((CurveX::Date(date), v as f64));
            }
        }
        CurveKind::RawWeeklyDeathToll => {
            return Err(Error::InvalidInput(
                "raw death toll curves are built per year via raw_death_toll_curves".to_string(),
            ));
        }
    }

    Ok(series)
}

impl CurveSeries {
    fn omit(&mut self, x: CurveX, reason: &str) {
        self.omitted.push(Omission {
            x,
            reason: reason.to_string(),
        });
    }
}

/// Weekly case-fatality counts: daily differences of the panel's
/// cumulative deaths summed into complete week bins.
pub fn weekly_covid_deaths(panel: &EpiPanel) -> Result<Vec<(WeekBin, i64)>> {
    weekly_aggregate(&panel.daily_deaths().points)
}

/// Cumulative case fatalities at the end of `bin`, when the panel covers
/// that date. Weeks ending before the panel begins count zero: no case
/// fatalities existed before reporting started.
fn covid_cum_at_week_end(panel: &EpiPanel, bin: WeekBin) -> Option<i64> {
    let end = bin.start_date() + Days::new(6);
    if end < panel.first_date() {
        return Some(0);
    }
    panel.date_index(end).map(|i| panel.deaths_cum[i])
}

/// Week bins of the panel's year whose final day is covered by the panel
/// (the x axis for the cumulative weekly ratios).
fn panel_week_ends(panel: &EpiPanel) -> Vec<WeekBin> {
    let first = WeekBin::of(panel.first_date()).week;
    let last = WeekBin::of(panel.last_date()).week;
    (first..=last)
        .map(|w| WeekBin::new(panel.first_date().year(), w))
        .filter(|bin| panel.date_index(bin.start_date() + Days::new(6)).is_some())
        .collect()
}

/// Six weekly death-toll curves (2015-2020) for one region/sex/age slice,
/// on the same week-index axis, ready for cross-year overlay. `age_band
/// = None` aggregates all age bands.
pub fn raw_death_toll_curves(
    table: &MortalityTable,
    region: RegionId,
    sex: Sex,
    age_band: Option<&AgeBand>,
) -> Result<Vec<CurveSeries>> {
    let mut out = Vec::new();
    for year in table.years() {
        let weekly: Option<Vec<u64>> = match age_band {
            Some(band) => table.weekly(region, sex, band, year).map(|w| w.to_vec()),
            None => {
                let mut sum = vec![0u64; table.n_weeks()];
                let mut found = false;
                for (cell, weeks) in table.iter() {
                    if cell.region == region && cell.sex == sex && cell.year == year {
                        found = true;
                        for (s, &w) in sum.iter_mut().zip(weeks) {
                            *s += w;
                        }
                    }
                }
                found.then_some(sum)
            }
        };
        let Some(weekly) = weekly else { continue };
        out.push(CurveSeries {
            kind: CurveKind::RawWeeklyDeathToll,
            region,
            year: Some(year),
            points: weekly
                .iter()
                .enumerate()
                .map(|(w, &v)| {
                    (
                        CurveX::Week(WeekBin::new(year as i32, w as u32 + 1)),
                        v as f64,
                    )
                })
                .collect(),
            scale_hint: ScaleHint::Linear,
            omitted: Vec::new(),
        });
    }
    if out.is_empty() {
        return Err(Error::CurveInput {
            kind: CurveKind::RawWeeklyDeathToll.label(),
            what: "data for the requested slice",
        });
    }
    Ok(out)
}

/// Peak comparison the toll overlays support: the spring 2020 maximum
/// against the December/January seasonal maxima of the reference years
/// (only the January side falls inside the coverage window here). Peak
/// heights only; this says nothing about totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TollPeakSummary {
    pub spring_2020_max: f64,
    pub spring_2020_week: u32,
    pub past_winter_max: f64,
    pub past_winter_year: u16,
    pub past_winter_week: u32,
}

pub fn toll_peak_summary(curves: &[CurveSeries]) -> Option<TollPeakSummary> {
    const WINTER_WEEKS: std::ops::RangeInclusive<u32> = 1..=6;
    const SPRING_WEEKS: std::ops::RangeInclusive<u32> = 9..=15;

    let mut spring: Option<(f64, u32)> = None;
    let mut winter: Option<(f64, u16, u32)> = None;
    for curve in curves {
        if curve.kind != CurveKind::RawWeeklyDeathToll {
            continue;
        }
        for (x, v) in &curve.points {
            let CurveX::Week(bin) = x else { continue };
            match curve.year {
                Some(2020) if SPRING_WEEKS.contains(&bin.week) => {
                    if spring.is_none_or(|(best, _)| *v > best) {
                        spring = Some((*v, bin.week));
                    }
                }
                Some(year) if year < 2020 && WINTER_WEEKS.contains(&bin.week) => {
                    if winter.is_none_or(|(best, _, _)| *v > best) {
                        winter = Some((*v, year, bin.week));
                    }
                }
                _ => {}
            }
        }
    }
    let (spring_2020_max, spring_2020_week) = spring?;
    let (past_winter_max, past_winter_year, past_winter_week) = winter?;
    Some(TollPeakSummary {
        spring_2020_max,
        spring_2020_week,
        past_winter_max,
        past_winter_year,
        past_winter_week,
    })
}

/// Sums the 21 regional case panels into the national panel. Partial
/// rollups are refused: every case region must be present, on an
/// identical date axis.
pub fn national_rollup(panels: &[EpiPanel]) -> Result<EpiPanel> {
    let by_region: BTreeMap<RegionId, &EpiPanel> = panels
        .iter()
        .filter(|p| RegionId::CASE_REGIONS.contains(&p.region))
        .map(|p| (p.region, p))
        .collect();
    for region in RegionId::CASE_REGIONS {
        if !by_region.contains_key(&region) {
            return Err(Error::MissingRegion(region));
        }
    }
    let mut iter = by_region.values();
    let first = iter.next().expect("21 panels present");
    for panel in iter {
        if panel.dates != first.dates {
            return Err(Error::MisalignedDates);
        }
    }

    let n = first.len();
    let mut confirmed = vec![0i64; n];
    let mut deaths = vec![0i64; n];
    let mut tests = vec![0i64; n];
    let all_hospitalized = by_region.values().all(|p| p.hospitalized.is_some());
    let mut hosp = all_hospitalized.then(|| vec![0i64; n]);
    for panel in by_region.values() {
        for i in 0..n {
            confirmed[i] += panel.confirmed_cum[i];
            deaths[i] += panel.deaths_cum[i];
            tests[i] += panel.tests_cum[i];
            if let (Some(h), Some(src)) = (hosp.as_mut(), panel.hospitalized.as_ref()) {
                h[i] += src[i];
            }
        }
    }
    EpiPanel::new(
        RegionId::Italy,
        first.dates.clone(),
        confirmed,
        deaths,
        tests,
        hosp,
    )
}

/// Sums the 20 mortality regions into an Italy-keyed table. Refused when
/// any region is missing.
pub fn national_mortality(table: &MortalityTable) -> Result<MortalityTable> {
    let regions = table.regions();
    for region in RegionId::MORTALITY_REGIONS {
        if !regions.contains(&region) {
            return Err(Error::MissingRegion(region));
        }
    }
    let mut cells: BTreeMap<MortalityCell, Vec<u64>> = BTreeMap::new();
    for (cell, weeks) in table.iter() {
        if !RegionId::MORTALITY_REGIONS.contains(&cell.region) {
            continue;
        }
        let italy = MortalityCell {
            region: RegionId::Italy,
            sex: cell.sex,
            age_band: cell.age_band.clone(),
            year: cell.year,
        };
        let sum = cells
            .entry(italy)
            .or_insert_with(|| vec![0; weeks.len()]);
        for (s, &w) in sum.iter_mut().zip(weeks) {
            *s += w;
        }
    }
    MortalityTable::new(cells)
}
