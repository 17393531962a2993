//! Parser for the municipal mortality source: per-municipality daily
//! death counts by sex and age class, one column per (sex, year), rolled
//! up to regions and binned to weeks at parse time. Municipal granularity
//! is not retained; the analyses are regional.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use crate::error::Error;
use crate::ingest::mapping::{SchemaMapping, SourceKind};
use crate::mortality::{AgeBand, MortalityCell, MortalityTable, Sex};
use crate::region::RegionId;
use crate::Result;

/// Complete weeks in the 1 January - 15 April coverage window.
pub const MORTALITY_WEEKS: usize = 15;

/// Parses the wide-format municipal file. Day-of-year blocks bin days to
/// weeks 1..=15; the one day beyond the final complete block (15 April in
/// the 2020 leap year) is dropped, matching the partial-bin rule used for
/// every cross-year comparison. Bolzano and Trento are merged into the
/// combined mortality key.
pub fn parse_mortality(raw: &str, mapping: &SchemaMapping) -> Result<MortalityTable> {
    if mapping.kind != SourceKind::Mortality {
        return Err(Error::Mapping(
            "mapping is not for a mortality source".to_string(),
        ));
    }
    let cols = mapping
        .mortality_columns
        .as_ref()
        .ok_or_else(|| Error::Mapping("mortality source needs [mortality_columns]".to_string()))?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .from_reader(raw.as_bytes());
    let header = reader.headers()?.clone();
    let locate = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };

    let region_col = locate(&cols.region)?;
    let age_col = locate(&cols.age_band)?;
    let day_col = locate(&cols.day)?;
    // municipality column must exist even though granularity is dropped
    locate(&cols.municipality)?;

    let mut year_cols: Vec<(Sex, u16, usize)> = Vec::new();
    for (sex, years) in [
        (Sex::Male, &cols.male),
        (Sex::Female, &cols.female),
        (Sex::Total, &cols.total),
    ] {
        for (year, column) in years {
            let year: u16 = year
                .parse()
                .map_err(|_| Error::Mapping(format!("bad year key {year:?}")))?;
            year_cols.push((sex, year, locate(column)?));
        }
    }

    let mut acc: BTreeMap<(RegionId, Sex, AgeBand, u16), Vec<u64>> = BTreeMap::new();
    let mut any_rows = false;

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        any_rows = true;

        let region = mapping
            .resolve_region(&record[region_col])
            .map_err(|e| Error::Row {
                row,
                message: e.to_string(),
            })?
            .mortality_key();
        let age_band = AgeBand(record[age_col].to_string());

        let day_raw = record[day_col].trim();
        if day_raw.len() != 4 || !day_raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Row {
                row,
                message: format!("day field {day_raw:?} is not MMDD"),
            });
        }
        let month: u32 = day_raw[..2].parse().expect("digits checked");
        let day: u32 = day_raw[2..].parse().expect("digits checked");

        for &(sex, year, col) in &year_cols {
            let cell = record[col].trim();
            // empty or explicitly not-available cells carry no count:
            // e.g. 29 February outside the leap year
            if cell.is_empty() || cell == "n.d." {
                continue;
            }
            let count: i64 = cell.parse().map_err(|_| Error::Row {
                row,
                message: format!("cannot parse count {cell:?}"),
            })?;
            if count < 0 {
                return Err(Error::NegativeCount {
                    field: "deaths",
                    date: NaiveDate::from_ymd_opt(year as i32, month, day)
                        .unwrap_or_default(),
                    value: count,
                });
            }
            let date = NaiveDate::from_ymd_opt(year as i32, month, day).ok_or_else(|| {
                Error::Row {
                    row,
                    message: format!("{day_raw:?} is not a date in {year}"),
                }
            })?;
            let doy = date.ordinal();
            if doy as usize > 7 * MORTALITY_WEEKS + 1 {
                return Err(Error::DayOutOfRange(doy));
            }
            if doy as usize > 7 * MORTALITY_WEEKS {
                // the single day past the last complete block
                continue;
            }
            let week = ((doy - 1) / 7) as usize; // 0-based
            let weeks = acc
                .entry((region, sex, age_band.clone(), year))
                .or_insert_with(|| vec![0; MORTALITY_WEEKS]);
            weeks[week] += count as u64;
        }
    }

    if !any_rows || acc.is_empty() {
        return Err(Error::NoRows);
    }

    let cells: BTreeMap<MortalityCell, Vec<u64>> = acc
        .into_iter()
        .map(|((region, sex, age_band, year), weeks)| {
            (
                MortalityCell {
                    region,
                    sex,
                    age_band,
                    year,
                },
                weeks,
            )
        })
        .collect();
    MortalityTable::new(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::mapping::parse_mapping_str;

    fn mapping() -> SchemaMapping {
        parse_mapping_str(
            r#"
source_id = "test-mortality"
kind = "mortality"
[mortality_columns]
region = "NOME_REGIONE"
municipality = "NOME_COMUNE"
age_band = "CL_ETA"
day = "GE"
[mortality_columns.male]
2019 = "M_19"
2020 = "M_20"
[mortality_columns.female]
2019 = "F_19"
2020 = "F_20"
[mortality_columns.total]
2019 = "T_19"
2020 = "T_20"
[region_aliases]
Lombardia = "Lombardia"
"Bolzano/Bozen" = "P.A. Bolzano"
Trento = "P.A. Trento"
"#,
        )
        .unwrap()
    }

    const HEADER: &str = "NOME_REGIONE,NOME_COMUNE,CL_ETA,GE,M_19,M_20,F_19,F_20,T_19,T_20\n";

    #[test]
    fn one_municipality_one_death_per_day() {
        let mut raw = HEADER.to_string();
        for day in 1..=7 {
            raw.push_str(&format!("Lombardia,Comune A,65+,010{day},0,1,0,0,0,1\n"));
        }
        let table = parse_mortality(&raw, &mapping()).unwrap();
        let weekly = table.weekly_region_total(RegionId::Lombardia, 2020).unwrap();
        assert_eq!(weekly[0], 7);
        assert!(weekly[1..].iter().all(|&w| w == 0));
    }

    #[test]
    fn municipalities_sum_into_their_region() {
        let raw = format!(
            "{HEADER}Lombardia,Comune A,65+,0101,0,3,0,0,0,3\n\
             Lombardia,Comune B,65+,0102,0,4,0,0,0,4\n"
        );
        let table = parse_mortality(&raw, &mapping()).unwrap();
        assert_eq!(
            table.weekly_region_total(RegionId::Lombardia, 2020).unwrap()[0],
            7
        );
    }

    #[test]
    fn bolzano_and_trento_merge() {
        let raw = format!(
            "{HEADER}Bolzano/Bozen,Comune C,65+,0101,0,2,0,1,0,3\n\
             Trento,Comune D,65+,0101,0,1,0,1,0,2\n"
        );
        let table = parse_mortality(&raw, &mapping()).unwrap();
        let regions = table.regions();
        assert!(regions.contains(&RegionId::BolzanoTrento));
        assert!(!regions.contains(&RegionId::Bolzano));
        assert_eq!(
            table
                .weekly_region_total(RegionId::BolzanoTrento, 2020)
                .unwrap()[0],
            5
        );
    }

    #[test]
    fn leap_day_is_empty_outside_2020() {
        let raw = format!("{HEADER}Lombardia,Comune A,65+,0229,,1,,0,,1\n");
        let table = parse_mortality(&raw, &mapping()).unwrap();
        // 29 Feb 2020 is day 60: block 9
        assert_eq!(
            table.weekly_region_total(RegionId::Lombardia, 2020).unwrap()[8],
            1
        );
        assert_eq!(
            table.weekly_region_total(RegionId::Lombardia, 2019),
            None
        );
    }

    #[test]
    fn negative_count_is_rejected() {
        let raw = format!("{HEADER}Lombardia,Comune A,65+,0101,0,-1,0,0,0,-1\n");
        assert!(matches!(
            parse_mortality(&raw, &mapping()),
            Err(Error::NegativeCount { .. })
        ));
    }

    #[test]
    fn unknown_region_is_rejected() {
        let raw = format!("{HEADER}Atlantis,Comune A,65+,0101,0,1,0,0,0,1\n");
        assert!(matches!(
            parse_mortality(&raw, &mapping()),
            Err(Error::Row { .. })
        ));
    }

    #[test]
    fn final_spare_day_is_dropped_from_weekly_tables() {
        // 15 April 2020 is day 106, one past the last complete block
        let raw = format!(
            "{HEADER}Lombardia,Comune A,65+,0415,0,9,0,0,0,9\n\
             Lombardia,Comune A,65+,0414,0,2,0,0,0,2\n"
        );
        let table = parse_mortality(&raw, &mapping()).unwrap();
        let weekly = table.weekly_region_total(RegionId::Lombardia, 2020).unwrap();
        // 14 April = day 105 (block 15) survives, the 15th does not
        assert_eq!(weekly[14], 2);
        assert_eq!(weekly.iter().sum::<u64>(), 2);
        // but 15 April 2019 is day 105: it lands in block 15
        let raw2019 = format!("{HEADER}Lombardia,Comune A,65+,0415,4,,0,,4,\n");
        let t = parse_mortality(&raw2019, &mapping()).unwrap();
        assert_eq!(t.weekly_region_total(RegionId::Lombardia, 2019).unwrap()[14], 4);
    }
}
