//! The canonical per-region daily panel of cumulative counts.

use chrono::NaiveDate;

use crate::error::Error;
use crate::region::RegionId;
use crate::series::{daily_from_cumulative, DailySeries};
use crate::Result;

/// Per-region daily panel of cumulative confirmed/death/test counts, plus
/// an optional hospitalisation census.
///
/// Dates are strictly increasing; gaps are permitted and carried (the
/// quality module flags them). Cumulative series are non-negative but NOT
/// necessarily monotone: official feeds do contain decreases, and those
/// are flagged downstream rather than rejected here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpiPanel {
    pub region: RegionId,
    pub dates: Vec<NaiveDate>,
    pub confirmed_cum: Vec<i64>,
    pub deaths_cum: Vec<i64>,
    pub tests_cum: Vec<i64>,
    pub hospitalized: Option<Vec<i64>>,
    /// Closed-population size, when the series describes one (the cruise
    /// ship reference carries 3711 here).
    pub population: Option<u64>,
}

impl EpiPanel {
    pub fn new(
        region: RegionId,
        dates: Vec<NaiveDate>,
        confirmed_cum: Vec<i64>,
        deaths_cum: Vec<i64>,
        tests_cum: Vec<i64>,
        hospitalized: Option<Vec<i64>>,
    ) -> Result<Self> {
        let n = dates.len();
        if n == 0 {
            return Err(Error::NoRows);
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::NonIncreasingDates { date: w[1] });
            }
        }
        for (field, values) in [
            ("confirmed_cum", &confirmed_cum),
            ("deaths_cum", &deaths_cum),
            ("tests_cum", &tests_cum),
        ] {
            if values.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{field} has {} values for {n} dates",
                    values.len()
                )));
            }
            for (i, &v) in values.iter().enumerate() {
                if v < 0 {
                    return Err(Error::NegativeCount {
                        field,
                        date: dates[i],
                        value: v,
                    });
                }
            }
        }
        if let Some(h) = &hospitalized {
            if h.len() != n {
                return Err(Error::InvalidInput(format!(
                    "hospitalized has {} values for {n} dates",
                    h.len()
                )));
            }
            if let Some(i) = h.iter().position(|&v| v < 0) {
                return Err(Error::NegativeCount {
                    field: "hospitalized",
                    date: dates[i],
                    value: h[i],
                });
            }
        }
        Ok(EpiPanel {
            region,
            dates,
            confirmed_cum,
            deaths_cum,
            tests_cum,
            hospitalized,
            population: None,
        })
    }

    pub fn with_population(mut self, population: u64) -> Self {
        self.population = Some(population);
        self
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        *self.dates.last().expect("panel is never empty")
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    fn daily(&self, values: &[i64]) -> DailySeries {
        DailySeries {
            region: self.region,
            points: self
                .dates
                .iter()
                .copied()
                .zip(daily_from_cumulative(values))
                .collect(),
        }
    }

    pub fn daily_confirmed(&self) -> DailySeries {
        self.daily(&self.confirmed_cum)
    }

    pub fn daily_deaths(&self) -> DailySeries {
        self.daily(&self.deaths_cum)
    }

    pub fn daily_tests(&self) -> DailySeries {
        self.daily(&self.tests_cum)
    }

    /// Calendar days missing from the interior of the coverage window.
    pub fn gaps(&self) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        for w in self.dates.windows(2) {
            let mut d = w[0].succ_opt().expect("date arithmetic");
            while d < w[1] {
                out.push(d);
                d = d.succ_opt().expect("date arithmetic");
            }
        }
        out
    }

    /// A copy keeping only the dates `keep` accepts. The source panel is
    /// never mutated; exclusion always works on copies.
    pub fn retain_dates(&self, keep: impl Fn(NaiveDate) -> bool) -> EpiPanel {
        let mut dates = Vec::new();
        let mut confirmed = Vec::new();
        let mut deaths = Vec::new();
        let mut tests = Vec::new();
        let mut hosp = self.hospitalized.as_ref().map(|_| Vec::new());
        for i in 0..self.len() {
            if keep(self.dates[i]) {
                dates.push(self.dates[i]);
                confirmed.push(self.confirmed_cum[i]);
                deaths.push(self.deaths_cum[i]);
                tests.push(self.tests_cum[i]);
                if let (Some(out), Some(src)) = (hosp.as_mut(), self.hospitalized.as_ref()) {
                    out.push(src[i]);
                }
            }
        }
        EpiPanel {
            region: self.region,
            dates,
            confirmed_cum: confirmed,
            deaths_cum: deaths,
            tests_cum: tests,
            hospitalized: hosp,
            population: self.population,
        }
    }
}
