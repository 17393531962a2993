//! Declarative description of one source format: which source columns
//! hold the canonical fields, how dates are written, how the source
//! spells its regions and whether whole fields are declared absent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::Error;
use crate::region::RegionId;
use crate::Result;

/// The canonical fields a case-series source can carry. `date`, `region`
/// and the three cumulative counts are required: each must be mapped to
/// exactly one source column or listed as absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CanonicalField {
    Date,
    Region,
    ConfirmedCum,
    DeathsCum,
    TestsCum,
    Hospitalized,
}

impl CanonicalField {
    pub const REQUIRED: [CanonicalField; 5] = [
        CanonicalField::Date,
        CanonicalField::Region,
        CanonicalField::ConfirmedCum,
        CanonicalField::DeathsCum,
        CanonicalField::TestsCum,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CanonicalField::Date => "date",
            CanonicalField::Region => "region",
            CanonicalField::ConfirmedCum => "confirmed_cum",
            CanonicalField::DeathsCum => "deaths_cum",
            CanonicalField::TestsCum => "tests_cum",
            CanonicalField::Hospitalized => "hospitalized",
        }
    }

    fn from_name(s: &str) -> Result<Self> {
        match s {
            "date" => Ok(CanonicalField::Date),
            "region" => Ok(CanonicalField::Region),
            "confirmed_cum" => Ok(CanonicalField::ConfirmedCum),
            "deaths_cum" => Ok(CanonicalField::DeathsCum),
            "tests_cum" => Ok(CanonicalField::TestsCum),
            "hospitalized" => Ok(CanonicalField::Hospitalized),
            other => Err(Error::Mapping(format!("unknown canonical field {other:?}"))),
        }
    }
}

impl fmt::Display for CanonicalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a mapped count column is already cumulative or reports daily
/// increments (converted to cumulative at parse time).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSemantics {
    Cumulative,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Cases,
    Mortality,
    DiamondPrincess,
}

/// Column layout of a municipal mortality source: long identifiers plus
/// one count column per (sex, year).
#[derive(Debug, Clone, Deserialize)]
pub struct MortalityColumns {
    pub region: String,
    pub municipality: String,
    pub age_band: String,
    /// Month-day within year, 4 digits (`0315` = 15 March), shared by all
    /// year columns of the row.
    pub day: String,
    pub male: BTreeMap<String, String>,
    pub female: BTreeMap<String, String>,
    pub total: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct SchemaMapping {
    pub source_id: String,
    pub kind: SourceKind,
    pub delimiter: u8,
    pub date_format: String,
    /// Upstream location for the optional fetch step.
    pub url: Option<String>,
    pub columns: BTreeMap<CanonicalField, String>,
    pub absent: BTreeSet<CanonicalField>,
    pub semantics: BTreeMap<CanonicalField, FieldSemantics>,
    pub region_aliases: BTreeMap<String, RegionId>,
    pub mortality_columns: Option<MortalityColumns>,
}

impl SchemaMapping {
    /// Resolves a source region spelling through the alias map. Unknown
    /// spellings are rejected, never passed through.
    pub fn resolve_region(&self, spelling: &str) -> Result<RegionId> {
        self.region_aliases
            .get(spelling)
            .copied()
            .ok_or_else(|| Error::UnknownRegion {
                spelling: spelling.to_string(),
            })
    }

    pub fn semantics_of(&self, field: CanonicalField) -> FieldSemantics {
        self.semantics
            .get(&field)
            .copied()
            .unwrap_or(FieldSemantics::Cumulative)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapping {
    source_id: String,
    kind: SourceKind,
    #[serde(default = "default_delimiter")]
    delimiter: String,
    #[serde(default = "default_date_format")]
    date_format: String,
    url: Option<String>,
    #[serde(default)]
    columns: BTreeMap<String, String>,
    #[serde(default)]
    absent: Vec<String>,
    #[serde(default)]
    semantics: BTreeMap<String, FieldSemantics>,
    #[serde(default)]
    region_aliases: BTreeMap<String, String>,
    mortality_columns: Option<MortalityColumns>,
}

fn default_delimiter() -> String {
    ",".to_string()
}

fn default_date_format() -> String {
    "%Y-%m-%d".to_string()
}

pub fn load_mapping(path: &Path) -> Result<SchemaMapping> {
    let text = std::fs::read_to_string(path)?;
    parse_mapping_str(&text)
}

pub fn parse_mapping_str(text: &str) -> Result<SchemaMapping> {
    let raw: RawMapping = toml::from_str(text)?;

    if raw.delimiter.len() != 1 || !raw.delimiter.is_ascii() {
        return Err(Error::Mapping(format!(
            "delimiter must be one ASCII character, got {:?}",
            raw.delimiter
        )));
    }
    let delimiter = raw.delimiter.as_bytes()[0];

    let mut columns = BTreeMap::new();
    for (name, column) in &raw.columns {
        columns.insert(CanonicalField::from_name(name)?, column.clone());
    }
    let mut absent = BTreeSet::new();
    for name in &raw.absent {
        absent.insert(CanonicalField::from_name(name)?);
    }
    let mut semantics = BTreeMap::new();
    for (name, sem) in &raw.semantics {
        semantics.insert(CanonicalField::from_name(name)?, *sem);
    }
    let mut region_aliases = BTreeMap::new();
    for (spelling, code) in &raw.region_aliases {
        region_aliases.insert(spelling.clone(), RegionId::from_code(code)?);
    }

    let mapping = SchemaMapping {
        source_id: raw.source_id,
        kind: raw.kind,
        delimiter,
        date_format: raw.date_format,
        url: raw.url,
        columns,
        absent,
        semantics,
        region_aliases,
        mortality_columns: raw.mortality_columns,
    };

    match mapping.kind {
        SourceKind::Cases | SourceKind::DiamondPrincess => {
            for field in CanonicalField::REQUIRED {
                let mapped = mapping.columns.contains_key(&field);
                let declared_absent = mapping.absent.contains(&field);
                if mapped && declared_absent {
                    return Err(Error::Mapping(format!(
                        "field {field} is both mapped and declared absent"
                    )));
                }
                if !mapped && !declared_absent {
                    return Err(Error::Mapping(format!(
                        "required field {field} is neither mapped nor declared absent"
                    )));
                }
            }
            for field in [CanonicalField::Date, CanonicalField::Region] {
                if mapping.absent.contains(&field) {
                    return Err(Error::Mapping(format!("field {field} cannot be absent")));
                }
            }
        }
        SourceKind::Mortality => {
            let cols = mapping
                .mortality_columns
                .as_ref()
                .ok_or_else(|| Error::Mapping("mortality source needs [mortality_columns]".to_string()))?;
            for (sex, years) in [("male", &cols.male), ("female", &cols.female), ("total", &cols.total)]
            {
                if years.is_empty() {
                    return Err(Error::Mapping(format!("no {sex} year columns declared")));
                }
                for year in years.keys() {
                    let parsed: i32 = year
                        .parse()
                        .map_err(|_| Error::Mapping(format!("bad year key {year:?}")))?;
                    if !(2015..=2020).contains(&parsed) {
                        return Err(Error::YearOutOfRange(parsed));
                    }
                }
            }
        }
    }

    Ok(mapping)
}
