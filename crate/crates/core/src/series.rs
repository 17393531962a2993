//! Pure time-series algebra shared by every analysis stage: conversion
//! between cumulative and daily counts, week binning and log transforms.
//!
//! Weeks are 7-day blocks anchored at 1 January of each year (day-of-year
//! blocks), so week `k` covers days `7(k-1)+1 ..= 7k` and is comparable
//! across years by construction. The final partial block of a coverage
//! window is dropped from cross-year comparisons.

use chrono::{Datelike, NaiveDate};

use crate::error::Error;
use crate::region::RegionId;
use crate::Result;

/// A per-day integer series. Values may be negative when derived by
/// differencing a cumulative series that decreases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailySeries {
    pub region: RegionId,
    pub points: Vec<(NaiveDate, i64)>,
}

impl DailySeries {
    pub fn values(&self) -> Vec<i64> {
        self.points.iter().map(|(_, v)| *v).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|(d, _)| *d).collect()
    }
}

/// First differences with the first value kept as-is, so the running sum
/// of the output reproduces the input exactly.
///
/// Negative outputs are legal: they mark decreases in an official
/// cumulative count and are the quality module's concern, not an error.
pub fn daily_from_cumulative(values: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = 0i64;
    for &v in values {
        out.push(v - prev);
        prev = v;
    }
    out
}

/// Exact inverse of [`daily_from_cumulative`].
pub fn cumulative_from_daily(values: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0i64;
    for &v in values {
        sum += v;
        out.push(sum);
    }
    out
}

/// A 7-day block within one calendar year. Week `k` covers day-of-year
/// `7(k-1)+1 ..= 7k`; the same index addresses the same days in every
/// year, which is what makes weekly death tolls comparable across years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeekBin {
    pub year: i32,
    /// 1-based block index.
    pub week: u32,
}

impl WeekBin {
    pub fn new(year: i32, week: u32) -> Self {
        WeekBin { year, week }
    }

    /// The block containing `date`.
    pub fn of(date: NaiveDate) -> Self {
        WeekBin {
            year: date.year(),
            week: (date.ordinal() - 1) / 7 + 1,
        }
    }

    /// First date of the block.
    pub fn start_date(&self) -> NaiveDate {
        NaiveDate::from_yo_opt(self.year, 7 * (self.week - 1) + 1)
            .expect("week start within year")
    }

    /// The dates of the block that actually exist in its year (the last
    /// block of a year is shorter than 7 days).
    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..7)
            .filter_map(|i| NaiveDate::from_yo_opt(self.year, 7 * (self.week - 1) + 1 + i))
            .collect()
    }
}

impl std::fmt::Display for WeekBin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-w{:02}", self.year, self.week)
    }
}

/// Sums a daily series into complete week bins.
///
/// A bin is emitted only when all 7 of its days are present in the input,
/// so leading and trailing partial blocks, and blocks interrupted by a
/// reporting gap, are dropped rather than silently under-counted. Totals
/// are conserved over the emitted bins.
pub fn weekly_aggregate(points: &[(NaiveDate, i64)]) -> Result<Vec<(WeekBin, i64)>> {
    if points.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut bins: Vec<(WeekBin, i64, u32)> = Vec::new();
    for &(date, value) in points {
        let bin = WeekBin::of(date);
        match bins.last_mut() {
            Some((b, sum, count)) if *b == bin => {
                *sum += value;
                *count += 1;
            }
            _ => bins.push((bin, value, 1)),
        }
    }
    Ok(bins
        .into_iter()
        .filter(|(_, _, count)| *count == 7)
        .map(|(bin, sum, _)| (bin, sum))
        .collect())
}

/// Natural logarithm, elementwise. Base e is load-bearing: the half-life
/// algebra ln(2)/(-a) downstream assumes it.
///
/// Non-positive entries are an error naming the offending date; they must
/// be removed upstream by the quality module before a log-scale analysis.
pub fn log_series(points: &[(NaiveDate, f64)]) -> Result<Vec<(NaiveDate, f64)>> {
    let mut out = Vec::with_capacity(points.len());
    for &(date, value) in points {
        if value <= 0.0 {
            return Err(Error::NonPositiveValue { date, value });
        }
        out.push((date, value.ln()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn dated(year: i32, start_doy: u32, values: &[i64]) -> Vec<(NaiveDate, i64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                (
                    NaiveDate::from_yo_opt(year, start_doy + i as u32).unwrap(),
                    v,
                )
            })
            .collect()
    }

    #[test]
    fn differencing() {
        assert_eq!(daily_from_cumulative(&[0, 3, 3, 7]), vec![0, 3, 0, 4]);
        assert_eq!(daily_from_cumulative(&[5]), vec![5]);
        // decreases in the official cumulative counts stay visible
        assert_eq!(daily_from_cumulative(&[10, 8]), vec![10, -2]);
    }

    #[test]
    fn cumulating() {
        assert_eq!(cumulative_from_daily(&[0, 3, 0, 4]), vec![0, 3, 3, 7]);
        assert_eq!(cumulative_from_daily(&[5]), vec![5]);
        assert_eq!(cumulative_from_daily(&[1, 1, 1]), vec![1, 2, 3]);
    }

    #[test]
    fn round_trip() {
        let x = vec![3, 0, -2, 7, 7, 100];
        assert_eq!(cumulative_from_daily(&daily_from_cumulative(&x)), x);
        assert_eq!(daily_from_cumulative(&cumulative_from_daily(&x)), x);
    }

    #[test]
    fn week_bins_follow_day_of_year_blocks() {
        assert_eq!(WeekBin::of(d(2020, 1, 1)), WeekBin::new(2020, 1));
        assert_eq!(WeekBin::of(d(2020, 1, 7)), WeekBin::new(2020, 1));
        assert_eq!(WeekBin::of(d(2020, 1, 8)), WeekBin::new(2020, 2));
        // 15 April: day 106 in the 2020 leap year, day 105 otherwise
        assert_eq!(WeekBin::of(d(2020, 4, 15)), WeekBin::new(2020, 16));
        assert_eq!(WeekBin::of(d(2019, 4, 15)), WeekBin::new(2019, 15));
        assert_eq!(WeekBin::new(2020, 2).start_date(), d(2020, 1, 8));
    }

    #[test]
    fn weekly_sums_constant_series() {
        let s = dated(2020, 1, &[1; 14]);
        let weekly = weekly_aggregate(&s).unwrap();
        assert_eq!(
            weekly,
            vec![(WeekBin::new(2020, 1), 7), (WeekBin::new(2020, 2), 7)]
        );
    }

    #[test]
    fn weekly_drops_partial_trailing_block() {
        let s = dated(2020, 1, &[1; 10]);
        assert_eq!(weekly_aggregate(&s).unwrap(), vec![(WeekBin::new(2020, 1), 7)]);
    }

    #[test]
    fn weekly_sums_first_block() {
        let s = dated(2020, 1, &[0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(weekly_aggregate(&s).unwrap(), vec![(WeekBin::new(2020, 1), 21)]);
    }

    #[test]
    fn weekly_rejects_empty() {
        assert!(matches!(weekly_aggregate(&[]), Err(Error::EmptySeries)));
    }

    #[test]
    fn weekly_drops_partial_leading_block() {
        // series starts on day 3 of block 1
        let s = dated(2020, 3, &[1; 12]);
        assert_eq!(weekly_aggregate(&s).unwrap(), vec![(WeekBin::new(2020, 2), 7)]);
    }

    #[test]
    fn log_of_exponentials() {
        let e = std::f64::consts::E;
        let s = dated(2020, 1, &[0, 0, 0])
            .iter()
            .zip([1.0, e, e * e])
            .map(|(&(date, _), v)| (date, v))
            .collect::<Vec<_>>();
        let logged = log_series(&s).unwrap();
        assert!((logged[0].1 - 0.0).abs() < 1e-12);
        assert!((logged[1].1 - 1.0).abs() < 1e-12);
        assert!((logged[2].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_rejects_non_positive_naming_the_date() {
        let s = vec![(d(2020, 3, 1), 0.0), (d(2020, 3, 2), 5.0)];
        match log_series(&s) {
            Err(Error::NonPositiveValue { date, .. }) => assert_eq!(date, d(2020, 3, 1)),
            other => panic!("expected NonPositiveValue, got {other:?}"),
        }
    }

    #[test]
    fn log_doubles() {
        let s = vec![(d(2020, 3, 1), 2.0), (d(2020, 3, 2), 4.0)];
        let logged = log_series(&s).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((logged[0].1 - ln2).abs() < 1e-12);
        assert!((logged[1].1 - 2.0 * ln2).abs() < 1e-12);
    }
}
