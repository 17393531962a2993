//! Run configuration: a TOML file defining snapshot locations, quality
//! rules (exclusions, start-date policies, regression eligibility) and
//! output options. Command-line flags override the file, the file
//! overrides built-in defaults, and the effective result is echoed into
//! the output directory for the audit trail.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use epiharm_core::quality::{ExclusionRule, StartPolicy};
use epiharm_core::RegionId;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// "all" or a comma-separated list of canonical region codes.
    #[serde(default)]
    pub regions: Option<String>,
    #[serde(default)]
    pub scale: Option<Scale>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub snapshots: SnapshotPaths,
    #[serde(default)]
    pub quality: QualityConfig,
    #[serde(default)]
    pub regress: RegressOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
    Both,
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Both
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPaths {
    #[serde(default)]
    pub cases: Option<PathBuf>,
    #[serde(default)]
    pub mortality: Option<PathBuf>,
    #[serde(default)]
    pub diamond_princess: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityConfig {
    /// Drop zero-daily-test days from the daily regressions.
    #[serde(default = "default_true")]
    pub auto_drop_zero_tests: bool,
    /// Regions whose daily counts are too noisy to regress; skipped with
    /// a notice. Eligibility is data, not code.
    #[serde(default)]
    pub ineligible: Vec<RegionId>,
    #[serde(default)]
    pub start: StartConfig,
    #[serde(default)]
    pub exclusions: Vec<ExclusionRule>,
}

fn default_true() -> bool {
    true
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            auto_drop_zero_tests: true,
            ineligible: Vec::new(),
            start: StartConfig::default(),
            exclusions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    /// "sustained-tests" or "first-death"; used when a region has no
    /// explicit date below.
    #[serde(default = "default_policy")]
    pub default_policy: String,
    #[serde(default = "default_floor")]
    pub tests_floor: i64,
    #[serde(default = "default_run")]
    pub tests_run: usize,
    /// Per-region explicit start dates, keyed by canonical region code.
    #[serde(default)]
    pub explicit: BTreeMap<RegionId, NaiveDate>,
}

fn default_policy() -> String {
    "sustained-tests".to_string()
}

fn default_floor() -> i64 {
    100
}

fn default_run() -> usize {
    3
}

impl Default for StartConfig {
    fn default() -> Self {
        StartConfig {
            default_policy: default_policy(),
            tests_floor: default_floor(),
            tests_run: default_run(),
            explicit: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressOptions {
    #[serde(default = "default_min_segment")]
    pub min_segment: usize,
}

fn default_min_segment() -> usize {
    5
}

impl Default for RegressOptions {
    fn default() -> Self {
        RegressOptions {
            min_segment: default_min_segment(),
        }
    }
}

impl QualityConfig {
    pub fn policy_for(&self, region: RegionId) -> CliResult<StartPolicy> {
        if let Some(date) = self.start.explicit.get(&region) {
            return Ok(StartPolicy::Explicit(*date));
        }
        match self.start.default_policy.as_str() {
            "sustained-tests" => Ok(StartPolicy::SustainedTests {
                floor: self.start.tests_floor,
                run: self.start.tests_run,
            }),
            "first-death" => Ok(StartPolicy::FirstDeath),
            other => Err(CliError::Usage(format!(
                "unknown start policy {other:?} (expected \"sustained-tests\" or \"first-death\")"
            ))),
        }
    }

    pub fn rules_for(&self, region: RegionId) -> Vec<ExclusionRule> {
        self.exclusions
            .iter()
            .filter(|r| r.region == region)
            .cloned()
            .collect()
    }

    pub fn is_eligible(&self, region: RegionId) -> bool {
        !self.ineligible.contains(&region)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Region selection: `None`/"all" means every case region plus the
    /// national rollup.
    pub fn selected_regions(&self) -> CliResult<Vec<RegionId>> {
        match self.regions.as_deref() {
            None | Some("all") => {
                let mut all: Vec<RegionId> = RegionId::CASE_REGIONS.to_vec();
                all.push(RegionId::Italy);
                Ok(all)
            }
            Some(list) => {
                let mut out = Vec::new();
                for code in list.split(',') {
                    let code = code.trim();
                    let region = RegionId::from_code(code).map_err(|_| {
                        CliError::Usage(format!("unknown region {code:?} in --regions"))
                    })?;
                    out.push(region);
                }
                if out.is_empty() {
                    return Err(CliError::Usage("empty region selection".to_string()));
                }
                Ok(out)
            }
        }
    }

    /// All paths named by the config must exist before any computation
    /// starts; partial output on a config error is not acceptable.
    pub fn validate_paths(&self, need_cases: bool, need_mortality: bool) -> CliResult<()> {
        let check = |label: &str, p: &Option<PathBuf>, required: bool| -> CliResult<()> {
            match p {
                Some(path) if !path.exists() => Err(CliError::Usage(format!(
                    "{label} snapshot {} does not exist",
                    path.display()
                ))),
                None if required => Err(CliError::Usage(format!(
                    "no {label} snapshot configured (set [snapshots].{label} or --snapshot)"
                ))),
                _ => Ok(()),
            }
        };
        check("cases", &self.snapshots.cases, need_cases)?;
        check("mortality", &self.snapshots.mortality, need_mortality)?;
        check("diamond_princess", &self.snapshots.diamond_princess, false)?;
        Ok(())
    }

    pub fn effective_toml(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|e| format!("# serialization error: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert!(cfg.quality.auto_drop_zero_tests);
        assert_eq!(cfg.quality.start.tests_floor, 100);
        assert_eq!(cfg.regress.min_segment, 5);
        let regions = cfg.selected_regions().unwrap();
        assert_eq!(regions.len(), 22); // 21 case regions + Italy
    }

    #[test]
    fn explicit_start_takes_precedence() {
        let text = r#"
[quality.start]
default_policy = "first-death"
[quality.start.explicit]
Lombardia = "2020-03-19"
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        let q = &cfg.quality;
        assert!(matches!(
            q.policy_for(RegionId::Lombardia).unwrap(),
            StartPolicy::Explicit(_)
        ));
        assert!(matches!(
            q.policy_for(RegionId::Veneto).unwrap(),
            StartPolicy::FirstDeath
        ));
    }

    #[test]
    fn exclusions_filter_by_region() {
        let text = r#"
[[quality.exclusions]]
region = "Emilia-Romagna"
dates = ["2020-03-28", "2020-03-29", "2020-03-30"]
reason = "test-count dips"
applies_to = "daily_regression"
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.quality.rules_for(RegionId::EmiliaRomagna).len(), 1);
        assert!(cfg.quality.rules_for(RegionId::Lazio).is_empty());
    }

    #[test]
    fn bad_region_selection_is_a_usage_error() {
        let cfg = RunConfig {
            regions: Some("Lombardia,Atlantis".to_string()),
            ..Default::default()
        };
        assert!(matches!(
            cfg.selected_regions(),
            Err(CliError::Usage(_))
        ));
    }
}
