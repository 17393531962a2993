//! Weekly death tables by region, sex and age band, years 2015-2020.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::region::RegionId;
use crate::series::WeekBin;
use crate::Result;

pub const FIRST_YEAR: u16 = 2015;
pub const LAST_YEAR: u16 = 2020;
/// Reference years averaged into the mortality baseline.
pub const REFERENCE_YEARS: [u16; 5] = [2015, 2016, 2017, 2018, 2019];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
    Total,
}

impl Sex {
    pub const ALL: [Sex; 3] = [Sex::Male, Sex::Female, Sex::Total];

    pub fn label(&self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
            Sex::Total => "total",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "male" => Ok(Sex::Male),
            "female" => Ok(Sex::Female),
            "total" => Ok(Sex::Total),
            other => Err(Error::InvalidInput(format!("unknown sex label {other:?}"))),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Age class exactly as carried from the source. The set of bands in a
/// table is closed: it is whatever the source declared, nothing else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgeBand(pub String);

impl AgeBand {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MortalityCell {
    pub region: RegionId,
    pub sex: Sex,
    pub age_band: AgeBand,
    pub year: u16,
}

/// Weekly death counts, one `Vec<u64>` of length [`MortalityTable::n_weeks`]
/// per (region, sex, age band, year) cell. Regions use the merged key set
/// (Bolzano and Trento appear only as [`RegionId::BolzanoTrento`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MortalityTable {
    cells: BTreeMap<MortalityCell, Vec<u64>>,
    n_weeks: usize,
}

impl MortalityTable {
    /// Validates year range, per-cell week counts and the male + female =
    /// total identity wherever all three sexes are present.
    pub fn new(cells: BTreeMap<MortalityCell, Vec<u64>>) -> Result<Self> {
        let n_weeks = cells
            .values()
            .next()
            .map(|v| v.len())
            .ok_or(Error::NoRows)?;
        for (cell, weeks) in &cells {
            if !(FIRST_YEAR..=LAST_YEAR).contains(&cell.year) {
                return Err(Error::YearOutOfRange(cell.year as i32));
            }
            if weeks.len() != n_weeks {
                return Err(Error::MortalityInconsistent(format!(
                    "cell {:?} has {} weeks, table has {}",
                    cell,
                    weeks.len(),
                    n_weeks
                )));
            }
        }
        let table = MortalityTable { cells, n_weeks };
        table.check_sex_totals()?;
        Ok(table)
    }

    fn check_sex_totals(&self) -> Result<()> {
        for (cell, total) in self.cells.iter().filter(|(c, _)| c.sex == Sex::Total) {
            let male = self.weekly(cell.region, Sex::Male, &cell.age_band, cell.year);
            let female = self.weekly(cell.region, Sex::Female, &cell.age_band, cell.year);
            if let (Some(m), Some(f)) = (male, female) {
                for week in 0..self.n_weeks {
                    if m[week] + f[week] != total[week] {
                        return Err(Error::MortalityInconsistent(format!(
                            "{} {} {}: week {} total {} != male {} + female {}",
                            cell.region,
                            cell.age_band,
                            cell.year,
                            week + 1,
                            total[week],
                            m[week],
                            f[week]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_weeks(&self) -> usize {
        self.n_weeks
    }

    pub fn regions(&self) -> BTreeSet<RegionId> {
        self.cells.iter().map(|(c, _)| c.region).collect()
    }

    pub fn age_bands(&self) -> BTreeSet<AgeBand> {
        self.cells.iter().map(|(c, _)| c.age_band.clone()).collect()
    }

    pub fn years(&self) -> BTreeSet<u16> {
        self.cells.iter().map(|(c, _)| c.year).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MortalityCell, &[u64])> {
        self.cells.iter().map(|(c, v)| (c, v.as_slice()))
    }

    pub fn weekly(
        &self,
        region: RegionId,
        sex: Sex,
        age_band: &AgeBand,
        year: u16,
    ) -> Option<&[u64]> {
        self.cells
            .get(&MortalityCell {
                region,
                sex,
                age_band: age_band.clone(),
                year,
            })
            .map(|v| v.as_slice())
    }

    /// All-age weekly deaths for one region and year, sex = total.
    pub fn weekly_region_total(&self, region: RegionId, year: u16) -> Option<Vec<u64>> {
        let mut sum = vec![0u64; self.n_weeks];
        let mut found = false;
        for (cell, weeks) in &self.cells {
            if cell.region == region && cell.year == year && cell.sex == Sex::Total {
                found = true;
                for (s, w) in sum.iter_mut().zip(weeks) {
                    *s += w;
                }
            }
        }
        found.then_some(sum)
    }

    /// The week bins the table covers, in a given year's calendar.
    pub fn week_bins(&self, year: u16) -> Vec<WeekBin> {
        (1..=self.n_weeks as u32)
            .map(|w| WeekBin::new(year as i32, w))
            .collect()
    }
}
