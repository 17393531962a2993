//! The data hub: declarative schema mappings, source parsers and the
//! snapshot store. Each supported source format is described by a
//! [`SchemaMapping`] loaded from a TOML file, so onboarding a new source
//! (or absorbing an upstream column rename) is a config change, not a
//! parser rewrite. All analytics run offline from immutable, checksummed
//! [`Snapshot`]s; the network is touched only by the explicit
//! [`fetch`] operation.

mod cases;
mod fetch;
mod mapping;
mod mortality_parse;
mod snapshot;

pub use cases::{parse_diamond_princess, parse_regional_cases};
pub use fetch::fetch_url;
pub use mapping::{
    load_mapping, parse_mapping_str, CanonicalField, FieldSemantics, SchemaMapping, SourceKind,
};
pub use mortality_parse::parse_mortality;
pub use snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotPayload};
