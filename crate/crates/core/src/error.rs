use std::path::PathBuf;

use chrono::NaiveDate;

use crate::region::RegionId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty series")]
    EmptySeries,

    #[error("series has {got} points, need at least {need}")]
    TooFewPoints { need: usize, got: usize },

    #[error("non-positive value {value} at {date}: cannot take logarithm")]
    NonPositiveValue { date: NaiveDate, value: f64 },

    #[error("degenerate time axis: all time values equal")]
    DegenerateTimeAxis,

    #[error("indeterminate growth direction: slope CI ({:.4}, {:.4}) straddles zero", slope_ci.0, slope_ci.1)]
    IndeterminateGrowth { slope_ci: (f64, f64) },

    #[error("raw slope is zero: slope ratio undefined")]
    ZeroSlope,

    #[error("unknown region spelling {spelling:?}")]
    UnknownRegion { spelling: String },

    #[error("dates not strictly increasing at {date}")]
    NonIncreasingDates { date: NaiveDate },

    #[error("negative count {value} for {field} at {date}")]
    NegativeCount {
        field: &'static str,
        date: NaiveDate,
        value: i64,
    },

    #[error("column {column:?} missing from header")]
    MissingColumn { column: String },

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("duplicate entry for {region} on {date}")]
    DuplicateDate { region: RegionId, date: NaiveDate },

    #[error("no rows in input")]
    NoRows,

    #[error("invalid mapping: {0}")]
    Mapping(String),

    #[error("snapshot format version {found}, this build reads version {expected}")]
    SnapshotVersion { expected: u32, found: u32 },

    #[error("checksum mismatch for {file}")]
    ChecksumMismatch { file: String },

    #[error("snapshot already exists at {}", path.display())]
    SnapshotExists { path: PathBuf },

    #[error("snapshot corrupt: {0}")]
    SnapshotCorrupt(String),

    #[error("exclusion rule for {rule_region} applied to panel for {panel_region}")]
    RuleRegionMismatch {
        rule_region: RegionId,
        panel_region: RegionId,
    },

    #[error("no deaths recorded: first-death start policy undefined")]
    NoDeaths,

    #[error("start date {date} outside panel coverage")]
    StartOutsideCoverage { date: NaiveDate },

    #[error("no start date satisfies the policy: {0}")]
    NoStartDate(String),

    #[error("year {0} outside supported mortality range 2015-2020")]
    YearOutOfRange(i32),

    #[error("day-of-year {0} outside supported mortality coverage 1-106")]
    DayOutOfRange(u32),

    #[error("need {need} reference years for the baseline, found {found}")]
    MissingReferenceYears { need: usize, found: usize },

    #[error("mortality table inconsistent: {0}")]
    MortalityInconsistent(String),

    #[error("curve {kind} requires {what}")]
    CurveInput {
        kind: &'static str,
        what: &'static str,
    },

    #[error("curve {kind} is only defined for {expected}, got {got}")]
    CurveRegionMismatch {
        kind: &'static str,
        expected: RegionId,
        got: RegionId,
    },

    #[error("rollup refused: {0} missing from input")]
    MissingRegion(RegionId),

    #[error("rollup refused: inputs do not share a common date axis")]
    MisalignedDates,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("fetch {url}: {message}")]
    Fetch { url: String, message: String },

    #[error("{0}")]
    InvalidInput(String),
}
