//! Run configuration: one TOML document with a section per subsystem.
//!
//! Every field has a default, unknown keys are rejected, and command-line
//! overrides use dotted paths (`reward.W_tar=36`). Errors name the offending
//! key path.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::AgentConfig;
use crate::control::ControllerConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::reward::{RewardConfig, RewardKind};
use crate::traffic::TrafficConfig;
use crate::train::TrainingConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: String,
    pub env: EnvConfig,
    pub traffic: TrafficConfig,
    pub controller: ControllerConfig,
    pub reward: RewardConfig,
    pub agent: AgentConfig,
    pub training: TrainingConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: "runs".into(),
            env: EnvConfig::default(),
            traffic: TrafficConfig::default(),
            controller: ControllerConfig::default(),
            reward: RewardConfig::default(),
            agent: AgentConfig::default(),
            training: TrainingConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    // accept any TOML literal; fall back to a bare string
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Sets `path` (dotted) in `root` to the literal `raw`.
fn apply_override(root: &mut toml::Table, path: &str, raw: &str) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::config(path, "empty segment in key path"));
    }
    let mut table = root;
    for (i, key) in keys[..keys.len() - 1].iter().enumerate() {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(keys[..=i].join("."), "is a value, not a section"))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_value(raw));
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies `key=value` overrides, and validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::config("<document>", e.message().to_string())
        })?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(o.as_str(), "override must look like key.path=value"))?;
            apply_override(&mut table, k.trim(), v.trim())?;
        }
        let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let key = e.path().to_string();
            Error::config(key, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.env.sim.validate()?;
        self.traffic.validate()?;
        self.controller.validate()?;
        self.reward.validate()?;
        self.agent.validate()?;
        self.training.validate()?;
        self.eval.validate()?;
        if self.training.curriculum
            && !matches!(self.reward.kind, RewardKind::Curriculum | RewardKind::CurriculumNormalized)
        {
            return Err(Error::config(
                "training.curriculum",
                "requires reward.kind = \"curriculum\" or \"curriculum_normalized\"",
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form (sorted keys), ignoring
    /// `output_dir`. Independent of key order in the source file.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes to JSON");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let canonical = serde_json::to_string(&value).expect("JSON value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
