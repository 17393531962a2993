//! Closed enumeration of region keys.
//!
//! The Italian case feed reports the two autonomous provinces of
//! Trentino-Alto Adige separately, so the case panel carries 21 regional
//! keys. The municipal mortality feed merges them into one key
//! ([`RegionId::BolzanoTrento`]). `Italy` and `DiamondPrincess` are
//! synthetic keys for the national rollup and the cruise-ship reference
//! series. Anything outside this enumeration must be mapped through a
//! [`SchemaMapping`](crate::ingest::SchemaMapping) alias or rejected.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionId {
    Abruzzo,
    Basilicata,
    Calabria,
    Campania,
    EmiliaRomagna,
    FriuliVeneziaGiulia,
    Lazio,
    Liguria,
    Lombardia,
    Marche,
    Molise,
    Bolzano,
    Trento,
    Piemonte,
    Puglia,
    Sardegna,
    Sicilia,
    Toscana,
    Umbria,
    ValleDAosta,
    Veneto,
    /// National rollup over the 21 case regions.
    Italy,
    /// Cruise-ship reference population of 3711.
    DiamondPrincess,
    /// Merged mortality key: the death tables report Bolzano and Trento
    /// as a single unit.
    BolzanoTrento,
}

impl RegionId {
    /// Every key, in canonical order.
    pub const ALL: [RegionId; 24] = [
        RegionId::Abruzzo,
        RegionId::Basilicata,
        RegionId::Calabria,
        RegionId::Campania,
        RegionId::EmiliaRomagna,
        RegionId::FriuliVeneziaGiulia,
        RegionId::Lazio,
        RegionId::Liguria,
        RegionId::Lombardia,
        RegionId::Marche,
        RegionId::Molise,
        RegionId::Bolzano,
        RegionId::Trento,
        RegionId::Piemonte,
        RegionId::Puglia,
        RegionId::Sardegna,
        RegionId::Sicilia,
        RegionId::Toscana,
        RegionId::Umbria,
        RegionId::ValleDAosta,
        RegionId::Veneto,
        RegionId::Italy,
        RegionId::DiamondPrincess,
        RegionId::BolzanoTrento,
    ];

    /// The 21 keys the regional case feed reports.
    pub const CASE_REGIONS: [RegionId; 21] = [
        RegionId::Abruzzo,
        RegionId::Basilicata,
        RegionId::Calabria,
        RegionId::Campania,
        RegionId::EmiliaRomagna,
        RegionId::FriuliVeneziaGiulia,
        RegionId::Lazio,
        RegionId::Liguria,
        RegionId::Lombardia,
        RegionId::Marche,
        RegionId::Molise,
        RegionId::Bolzano,
        RegionId::Trento,
        RegionId::Piemonte,
        RegionId::Puglia,
        RegionId::Sardegna,
        RegionId::Sicilia,
        RegionId::Toscana,
        RegionId::Umbria,
        RegionId::ValleDAosta,
        RegionId::Veneto,
    ];

    /// The 20 keys the mortality tables carry (Bolzano and Trento merged).
    pub const MORTALITY_REGIONS: [RegionId; 20] = [
        RegionId::Abruzzo,
        RegionId::Basilicata,
        RegionId::Calabria,
        RegionId::Campania,
        RegionId::EmiliaRomagna,
        RegionId::FriuliVeneziaGiulia,
        RegionId::Lazio,
        RegionId::Liguria,
        RegionId::Lombardia,
        RegionId::Marche,
        RegionId::Molise,
        RegionId::BolzanoTrento,
        RegionId::Piemonte,
        RegionId::Puglia,
        RegionId::Sardegna,
        RegionId::Sicilia,
        RegionId::Toscana,
        RegionId::Umbria,
        RegionId::ValleDAosta,
        RegionId::Veneto,
    ];

    /// Canonical code, as written in configs, tables and reports.
    pub fn code(&self) -> &'static str {
        match self {
            RegionId::Abruzzo => "Abruzzo",
            RegionId::Basilicata => "Basilicata",
            RegionId::Calabria => "Calabria",
            RegionId::Campania => "Campania",
            RegionId::EmiliaRomagna => "Emilia-Romagna",
            RegionId::FriuliVeneziaGiulia => "Friuli Venezia Giulia",
            RegionId::Lazio => "Lazio",
            RegionId::Liguria => "Liguria",
            RegionId::Lombardia => "Lombardia",
            RegionId::Marche => "Marche",
            RegionId::Molise => "Molise",
            RegionId::Bolzano => "P.A. Bolzano",
            RegionId::Trento => "P.A. Trento",
            RegionId::Piemonte => "Piemonte",
            RegionId::Puglia => "Puglia",
            RegionId::Sardegna => "Sardegna",
            RegionId::Sicilia => "Sicilia",
            RegionId::Toscana => "Toscana",
            RegionId::Umbria => "Umbria",
            RegionId::ValleDAosta => "Valle d'Aosta",
            RegionId::Veneto => "Veneto",
            RegionId::Italy => "Italy",
            RegionId::DiamondPrincess => "DiamondPrincess",
            RegionId::BolzanoTrento => "P.A. Bolzano+Trento",
        }
    }

    /// Exact match against the canonical codes; anything else is rejected.
    pub fn from_code(code: &str) -> Result<Self, Error> {
        RegionId::ALL
            .iter()
            .copied()
            .find(|r| r.code() == code)
            .ok_or_else(|| Error::UnknownRegion {
                spelling: code.to_string(),
            })
    }

    /// Filesystem-safe stable identifier, e.g. `pa-bolzano`.
    pub fn slug(&self) -> String {
        let mut out = String::new();
        for c in self.code().chars() {
            if c.is_ascii_alphanumeric() {
                out.push(c.to_ascii_lowercase());
            } else if !out.ends_with('-') && !out.is_empty() {
                out.push('-');
            }
        }
        out.trim_end_matches('-').to_string()
    }

    /// The key this region's deaths are filed under in the mortality
    /// tables: Bolzano and Trento collapse to the merged key, everything
    /// else maps to itself.
    pub fn mortality_key(&self) -> RegionId {
        match self {
            RegionId::Bolzano | RegionId::Trento => RegionId::BolzanoTrento,
            other => *other,
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        RegionId::from_code(s)
    }
}

impl Serialize for RegionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for RegionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        RegionId::from_code(&code).map_err(de::Error::custom)
    }
}
