//! Immutable, checksummed snapshot store.
//!
//! A snapshot is one directory holding canonical delimited-text tables
//! plus a `manifest.toml` naming the source, the fetch time, the
//! coverage window and the sha256 of every table file. Snapshots are
//! written atomically (to a temp directory, then renamed into place) and
//! never overwritten: a re-fetch is a new snapshot.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::mortality::{AgeBand, MortalityCell, MortalityTable, Sex};
use crate::panel::EpiPanel;
use crate::region::RegionId;
use crate::Result;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotPayload {
    Cases(Vec<EpiPanel>),
    Mortality(MortalityTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub source_id: String,
    /// RFC 3339 timestamp of the fetch that produced the snapshot.
    pub fetched_at: String,
    /// First and last date actually present in the payload.
    pub coverage: (NaiveDate, NaiveDate),
    pub payload: SnapshotPayload,
}

impl Snapshot {
    /// Coverage is computed from the payload, never trusted from input.
    pub fn new(source_id: String, fetched_at: String, payload: SnapshotPayload) -> Result<Self> {
        let coverage = coverage_of(&payload)?;
        Ok(Snapshot {
            source_id,
            fetched_at,
            coverage,
            payload,
        })
    }

    pub fn panels(&self) -> Option<&[EpiPanel]> {
        match &self.payload {
            SnapshotPayload::Cases(panels) => Some(panels),
            SnapshotPayload::Mortality(_) => None,
        }
    }

    pub fn mortality(&self) -> Option<&MortalityTable> {
        match &self.payload {
            SnapshotPayload::Mortality(t) => Some(t),
            SnapshotPayload::Cases(_) => None,
        }
    }
}

fn coverage_of(payload: &SnapshotPayload) -> Result<(NaiveDate, NaiveDate)> {
    match payload {
        SnapshotPayload::Cases(panels) => {
            let first = panels.iter().map(|p| p.first_date()).min();
            let last = panels.iter().map(|p| p.last_date()).max();
            match (first, last) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(Error::NoRows),
            }
        }
        SnapshotPayload::Mortality(table) => {
            let years = table.years();
            let first_year = *years.iter().next().ok_or(Error::NoRows)? as i32;
            let last_year = *years.iter().last().expect("non-empty") as i32;
            let first = NaiveDate::from_yo_opt(first_year, 1).expect("1 Jan exists");
            let last_week_start = 7 * (table.n_weeks() as u32 - 1) + 1;
            let last = NaiveDate::from_yo_opt(last_year, last_week_start)
                .expect("week start within year")
                + Days::new(6);
            Ok((first, last))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    source_id: String,
    fetched_at: String,
    kind: String,
    coverage: ManifestCoverage,
    tables: Vec<TableEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestCoverage {
    first: NaiveDate,
    last: NaiveDate,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    file: String,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn cases_csv(panels: &[EpiPanel]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&EpiPanel> = panels.iter().collect();
    sorted.sort_by_key(|p| p.region);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "region",
        "date",
        "confirmed_cum",
        "deaths_cum",
        "tests_cum",
        "hospitalized",
        "population",
    ])?;
    for panel in sorted {
        let population = panel
            .population
            .map(|p| p.to_string())
            .unwrap_or_default();
        for i in 0..panel.len() {
            let hosp = panel
                .hospitalized
                .as_ref()
                .map(|h| h[i].to_string())
                .unwrap_or_default();
            w.write_record([
                panel.region.code(),
                &panel.dates[i].format("%Y-%m-%d").to_string(),
                &panel.confirmed_cum[i].to_string(),
                &panel.deaths_cum[i].to_string(),
                &panel.tests_cum[i].to_string(),
                &hosp,
                &population,
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::SnapshotCorrupt(e.to_string()))
}

fn mortality_csv(table: &MortalityTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["region", "sex", "age_band", "year", "week", "deaths"])?;
    for (cell, weeks) in table.iter() {
        for (i, &deaths) in weeks.iter().enumerate() {
            w.write_record([
                cell.region.code(),
                cell.sex.label(),
                cell.age_band.as_str(),
                &cell.year.to_string(),
                &(i + 1).to_string(),
                &deaths.to_string(),
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::SnapshotCorrupt(e.to_string()))
}

fn parse_cases_csv(bytes: &[u8]) -> Result<Vec<EpiPanel>> {
    let mut reader = csv::Reader::from_reader(bytes);
    type Row = (i64, i64, i64, Option<i64>, Option<u64>);
    let mut by_region: BTreeMap<RegionId, BTreeMap<NaiveDate, Row>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let region = RegionId::from_code(&record[0])?;
        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d")
            .map_err(|e| Error::SnapshotCorrupt(format!("bad date {:?}: {e}", &record[1])))?;
        let parse_i64 = |s: &str| -> Result<i64> {
            s.parse()
                .map_err(|_| Error::SnapshotCorrupt(format!("bad count {s:?}")))
        };
        let hosp = if record[5].is_empty() {
            None
        } else {
            Some(parse_i64(&record[5])?)
        };
        let population = if record[6].is_empty() {
            None
        } else {
            Some(
                record[6]
                    .parse()
                    .map_err(|_| Error::SnapshotCorrupt("bad population".to_string()))?,
            )
        };
        by_region.entry(region).or_default().insert(
            date,
            (
                parse_i64(&record[2])?,
                parse_i64(&record[3])?,
                parse_i64(&record[4])?,
                hosp,
                population,
            ),
        );
    }
    let mut panels = Vec::new();
    for (region, rows) in by_region {
        let dates: Vec<NaiveDate> = rows.keys().copied().collect();
        let confirmed = rows.values().map(|r| r.0).collect();
        let deaths = rows.values().map(|r| r.1).collect();
        let tests = rows.values().map(|r| r.2).collect();
        let hosp: Option<Vec<i64>> = if rows.values().all(|r| r.3.is_some()) {
            Some(rows.values().map(|r| r.3.unwrap()).collect())
        } else if rows.values().all(|r| r.3.is_none()) {
            None
        } else {
            return Err(Error::SnapshotCorrupt(format!(
                "{region}: hospitalized present on some dates only"
            )));
        };
        let populations: std::collections::BTreeSet<Option<u64>> =
            rows.values().map(|r| r.4).collect();
        if populations.len() != 1 {
            return Err(Error::SnapshotCorrupt(format!(
                "{region}: inconsistent population"
            )));
        }
        let mut panel = EpiPanel::new(region, dates, confirmed, deaths, tests, hosp)?;
        if let Some(p) = populations.into_iter().next().flatten() {
            panel = panel.with_population(p);
        }
        panels.push(panel);
    }
    if panels.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(panels)
}

fn parse_mortality_csv(bytes: &[u8]) -> Result<MortalityTable> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut acc: BTreeMap<MortalityCell, BTreeMap<usize, u64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let cell = MortalityCell {
            region: RegionId::from_code(&record[0])?,
            sex: Sex::from_label(&record[1])?,
            age_band: AgeBand(record[2].to_string()),
            year: record[3]
                .parse()
                .map_err(|_| Error::SnapshotCorrupt("bad year".to_string()))?,
        };
        let week: usize = record[4]
            .parse()
            .map_err(|_| Error::SnapshotCorrupt("bad week".to_string()))?;
        let deaths: u64 = record[5]
            .parse()
            .map_err(|_| Error::SnapshotCorrupt("bad deaths".to_string()))?;
        acc.entry(cell).or_default().insert(week, deaths);
    }
    let n_weeks = acc
        .values()
        .map(|weeks| weeks.keys().max().copied().unwrap_or(0))
        .max()
        .ok_or(Error::NoRows)?;
    let cells: BTreeMap<MortalityCell, Vec<u64>> = acc
        .into_iter()
        .map(|(cell, weeks)| {
            let mut v = vec![0u64; n_weeks];
            for (week, deaths) in weeks {
                v[week - 1] = deaths;
            }
            (cell, v)
        })
        .collect();
    MortalityTable::new(cells)
}

/// Writes a snapshot directory atomically. Fails if `path` already
/// exists: snapshots are immutable, a re-fetch is a new snapshot.
pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<()> {
    if path.exists() {
        return Err(Error::SnapshotExists {
            path: path.to_path_buf(),
        });
    }
    let (kind, table_file, table_bytes) = match &snapshot.payload {
        SnapshotPayload::Cases(panels) => ("cases", "cases.csv", cases_csv(panels)?),
        SnapshotPayload::Mortality(table) => {
            ("mortality", "mortality.csv", mortality_csv(table)?)
        }
    };
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        source_id: snapshot.source_id.clone(),
        fetched_at: snapshot.fetched_at.clone(),
        kind: kind.to_string(),
        coverage: ManifestCoverage {
            first: snapshot.coverage.0,
            last: snapshot.coverage.1,
        },
        tables: vec![TableEntry {
            file: table_file.to_string(),
            sha256: sha256_hex(&table_bytes),
        }],
    };
    let manifest_text =
        toml::to_string(&manifest).map_err(|e| Error::SnapshotCorrupt(e.to_string()))?;

    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent)?;
    let tmp = parent.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "snapshot".to_string()),
        std::process::id()
    ));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir_all(&tmp)?;
    fs::write(tmp.join(table_file), &table_bytes)?;
    fs::write(tmp.join("manifest.toml"), manifest_text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads and verifies a snapshot directory: format version, table
/// checksums, and that the manifest coverage matches the data.
pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let manifest_text = fs::read_to_string(path.join("manifest.toml"))?;
    let manifest: Manifest = toml::from_str(&manifest_text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::SnapshotVersion {
            expected: FORMAT_VERSION,
            found: manifest.format_version,
        });
    }
    let entry = manifest
        .tables
        .first()
        .ok_or_else(|| Error::SnapshotCorrupt("manifest lists no tables".to_string()))?;
    let bytes = fs::read(path.join(&entry.file))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(Error::ChecksumMismatch {
            file: entry.file.clone(),
        });
    }
    let payload = match manifest.kind.as_str() {
        "cases" => SnapshotPayload::Cases(parse_cases_csv(&bytes)?),
        "mortality" => SnapshotPayload::Mortality(parse_mortality_csv(&bytes)?),
        other => {
            return Err(Error::SnapshotCorrupt(format!(
                "unknown snapshot kind {other:?}"
            )))
        }
    };
    let snapshot = Snapshot::new(manifest.source_id, manifest.fetched_at, payload)?;
    if snapshot.coverage != (manifest.coverage.first, manifest.coverage.last) {
        return Err(Error::SnapshotCorrupt(
            "manifest coverage does not match table contents".to_string(),
        ));
    }
    Ok(snapshot)
}
