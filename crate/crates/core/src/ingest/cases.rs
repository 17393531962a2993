//! Parsers for regional case series and the cruise-ship reference series.

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::Error;
use crate::ingest::mapping::{CanonicalField, FieldSemantics, SchemaMapping};
use crate::panel::EpiPanel;
use crate::region::RegionId;
use crate::series::cumulative_from_daily;
use crate::Result;

pub const DIAMOND_PRINCESS_POPULATION: u64 = 3711;

struct ColumnIndex {
    date: usize,
    region: usize,
    confirmed: Option<usize>,
    deaths: Option<usize>,
    tests: Option<usize>,
    hospitalized: Option<usize>,
}

fn index_columns(header: &csv::StringRecord, mapping: &SchemaMapping) -> Result<ColumnIndex> {
    let find = |field: CanonicalField| -> Result<Option<usize>> {
        match mapping.columns.get(&field) {
            None => Ok(None),
            Some(name) => header
                .iter()
                .position(|h| h == name)
                .map(Some)
                .ok_or_else(|| Error::MissingColumn {
                    column: name.clone(),
                }),
        }
    };
    Ok(ColumnIndex {
        date: find(CanonicalField::Date)?.expect("date is never absent"),
        region: find(CanonicalField::Region)?.expect("region is never absent"),
        confirmed: find(CanonicalField::ConfirmedCum)?,
        deaths: find(CanonicalField::DeathsCum)?,
        tests: find(CanonicalField::TestsCum)?,
        hospitalized: find(CanonicalField::Hospitalized)?,
    })
}

fn parse_date(raw: &str, format: &str, row: usize) -> Result<NaiveDate> {
    let parsed = if format.contains("%H") {
        NaiveDateTime::parse_from_str(raw, format).map(|dt| dt.date())
    } else {
        NaiveDate::parse_from_str(raw, format)
    };
    parsed.map_err(|e| Error::Row {
        row,
        message: format!("cannot parse date {raw:?} with format {format:?}: {e}"),
    })
}

fn parse_count(raw: &str, column: &str, row: usize) -> Result<i64> {
    raw.trim().parse().map_err(|_| Error::Row {
        row,
        message: format!("cannot parse count {raw:?} in column {column:?}"),
    })
}

struct RawRows {
    // per region, per date: (confirmed, deaths, tests, hospitalized)
    rows: BTreeMap<RegionId, BTreeMap<NaiveDate, (i64, i64, i64, Option<i64>)>>,
}

fn collect_rows(raw: &str, mapping: &SchemaMapping) -> Result<RawRows> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .from_reader(raw.as_bytes());
    let header = reader.headers()?.clone();
    let idx = index_columns(&header, mapping)?;

    let mut rows: BTreeMap<RegionId, BTreeMap<NaiveDate, (i64, i64, i64, Option<i64>)>> =
        BTreeMap::new();

    for (i, record) in reader.records().enumerate() {
        let row = i + 1; // 1-based data row, matching what a person sees
        let record = record?;
        let date = parse_date(&record[idx.date], &mapping.date_format, row)?;
        let region = mapping.resolve_region(&record[idx.region]).map_err(|e| {
            Error::Row {
                row,
                message: e.to_string(),
            }
        })?;
        let get = |col: Option<usize>, field: CanonicalField| -> Result<i64> {
            match col {
                Some(c) => parse_count(&record[c], field.name(), row),
                None => Ok(0), // declared absent: materialised as zero
            }
        };
        let confirmed = get(idx.confirmed, CanonicalField::ConfirmedCum)?;
        let deaths = get(idx.deaths, CanonicalField::DeathsCum)?;
        let tests = get(idx.tests, CanonicalField::TestsCum)?;
        let hospitalized = match idx.hospitalized {
            Some(c) => Some(parse_count(
                &record[c],
                CanonicalField::Hospitalized.name(),
                row,
            )?),
            None => None,
        };
        if rows
            .entry(region)
            .or_default()
            .insert(date, (confirmed, deaths, tests, hospitalized))
            .is_some()
        {
            return Err(Error::DuplicateDate { region, date });
        }
    }

    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(RawRows { rows })
}

fn to_panel(
    region: RegionId,
    by_date: BTreeMap<NaiveDate, (i64, i64, i64, Option<i64>)>,
    mapping: &SchemaMapping,
) -> Result<EpiPanel> {
    let dates: Vec<NaiveDate> = by_date.keys().copied().collect();
    let mut confirmed: Vec<i64> = by_date.values().map(|v| v.0).collect();
    let mut deaths: Vec<i64> = by_date.values().map(|v| v.1).collect();
    let mut tests: Vec<i64> = by_date.values().map(|v| v.2).collect();
    let hospitalized: Option<Vec<i64>> = if by_date.values().all(|v| v.3.is_some()) {
        Some(by_date.values().map(|v| v.3.unwrap()).collect())
    } else {
        None
    };

    for (field, values) in [
        (CanonicalField::ConfirmedCum, &mut confirmed),
        (CanonicalField::DeathsCum, &mut deaths),
        (CanonicalField::TestsCum, &mut tests),
    ] {
        if mapping.semantics_of(field) == FieldSemantics::Incremental {
            *values = cumulative_from_daily(values);
        }
    }

    EpiPanel::new(region, dates, confirmed, deaths, tests, hospitalized)
}

/// Parses one delimited case-series file into one panel per region, rows
/// grouped by region and sorted by date. Duplicate (region, date) pairs,
/// unparseable dates and unmapped region spellings are hard errors with
/// the offending row named.
pub fn parse_regional_cases(raw: &str, mapping: &SchemaMapping) -> Result<Vec<EpiPanel>> {
    let collected = collect_rows(raw, mapping)?;
    collected
        .rows
        .into_iter()
        .map(|(region, by_date)| to_panel(region, by_date, mapping))
        .collect()
}

/// Parses the cruise-ship series: a single panel keyed
/// [`RegionId::DiamondPrincess`] with the closed population size 3711
/// recorded alongside.
pub fn parse_diamond_princess(raw: &str, mapping: &SchemaMapping) -> Result<EpiPanel> {
    let panels = parse_regional_cases(raw, mapping)?;
    let mut dp = None;
    for panel in panels {
        if panel.region != RegionId::DiamondPrincess {
            return Err(Error::InvalidInput(format!(
                "cruise-ship source contains rows for {}",
                panel.region
            )));
        }
        dp = Some(panel);
    }
    Ok(dp
        .expect("collect_rows rejects empty input")
        .with_population(DIAMOND_PRINCESS_POPULATION))
}
