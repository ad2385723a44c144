//! Top-level configuration document (TOML).
//!
//! ```toml
//! scoring_table = "my_table.csv"   # optional; built-in table otherwise
//!
//! [partner_model]
//! capacity_max = 100.0
//! targets = 3
//!
//! [policy]
//! alpha = 0.25
//! epsilon = 0.75
//!
//! [reward]
//! k = 0.1
//!
//! [service]
//! task_timeout_secs = 60
//! ```
//!
//! Omitted keys take their built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::partner_model::PartnerModelConfig;
use crate::policy::PolicyParams;
use crate::scoring::ScoringTable;
use crate::session::RewardParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// CSV scoring table; relative paths resolve against the config file.
    pub scoring_table: Option<PathBuf>,
    pub partner_model: PartnerModelConfig,
    pub policy: PolicyParams,
    pub reward: RewardParams,
    pub service: ServiceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Seconds a strategy query waits for its task performance.
    pub task_timeout_secs: f64,
    /// Session `n` (1-based) seeds its action selection with `base_seed + n`.
    pub base_seed: u64,
    /// Start sessions from the table-seeded Q-table.
    pub preconfigured: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            task_timeout_secs: 60.0,
            base_seed: 0,
            preconfigured: true,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Config::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(table), Some(dir)) = (&cfg.scoring_table, path.parent()) {
            if table.is_relative() {
                cfg.scoring_table = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.partner_model.validate()?;
        self.policy.validate()?;
        self.reward.validate()?;
        if !(self.service.task_timeout_secs.is_finite() && self.service.task_timeout_secs > 0.0) {
            return Err(crate::Error::InvalidConfig(
                "service: task_timeout_secs must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn load_table(&self) -> Result<ScoringTable> {
        match &self.scoring_table {
            Some(path) => ScoringTable::from_csv(std::fs::File::open(path)?),
            None => Ok(ScoringTable::default()),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hex::encode(&hash[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn partial_sections_override() {
        let cfg = Config::from_toml(
            "[policy]\nalpha = 0.5\n[partner_model]\ntargets = 4\ndemanding_actions = [\"negation/hesitation\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.policy.alpha, 0.5);
        assert_eq!(cfg.policy.gamma, 0.0);
        assert_eq!(cfg.partner_model.targets, 4);
        assert_eq!(cfg.partner_model.demanding_actions.len(), 1);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::from_toml("[policy]\nalpah = 0.5\n").is_err());
        assert!(Config::from_toml("[policy]\nalpha = 0.0\n").is_err());
        assert!(Config::from_toml("[partner_model]\ntargets = 1\n").is_err());
        assert!(Config::from_toml("[partner_model]\ndemanding_actions = [\"push\"]\n").is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
        b.policy.alpha = 0.5;
        assert_ne!(a.digest(), b.digest());
    }
}
