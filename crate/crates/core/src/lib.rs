//! Harmonized epidemic surveillance panels and the analytics built on them.
//!
//! The crate is organised around a small canonical data model:
//! per-region daily panels of cumulative counts ([`panel::EpiPanel`]) and
//! weekly death tables ([`mortality::MortalityTable`]). Source files in
//! heterogeneous schemas are mapped onto that model by the [`ingest`]
//! module, screened for the pathologies official feeds are known to carry
//! by the [`quality`] module, and consumed by the [`regress`] and
//! [`curves`] analytics.

pub mod curves;
pub mod diagnostics;
pub mod error;
pub mod ingest;
pub mod mortality;
pub mod panel;
pub mod quality;
pub mod regress;
pub mod region;
pub mod series;
pub mod stats;

pub use error::Error;
pub use region::RegionId;

pub type Result<T> = std::result::Result<T, Error>;
