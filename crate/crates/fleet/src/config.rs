//! Line-oriented `key = value` configuration.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use aurcap_core::seed::seed_with_properties;
use aurcap_core::turtle::load_into;
use aurcap_core::{KbError, KnowledgeBase};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: KbError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FleetMode {
    /// Boot the default simulated fleet inside the registry process.
    Default,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegistryConfig {
    pub listen: SocketAddr,
    pub broker_uri: String,
    pub model_paths: Vec<PathBuf>,
    pub log_level: String,
    pub fleet: FleetMode,
    /// Address of the simulated fleet's HTTP skill interfaces.
    pub fleet_listen: SocketAddr,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            listen: ([127, 0, 0, 1], 8080).into(),
            broker_uri: "inproc://fleet".into(),
            model_paths: Vec::new(),
            log_level: "info".into(),
            fleet: FleetMode::Default,
            fleet_listen: ([127, 0, 0, 1], 0).into(),
        }
    }
}

impl RegistryConfig {
    /// Parses config text. `#` starts a comment line; `model` may repeat; `models` takes a comma list.
    /// Relative model paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg = RegistryConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError::Line { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let addr = |v: &str| v.parse::<SocketAddr>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "listen" => cfg.listen = addr(value)?,
                "fleet_listen" => cfg.fleet_listen = addr(value)?,
                "broker" => cfg.broker_uri = value.to_string(),
                "log_level" => {
                    parse_level(value).ok_or_else(|| err(format!("unknown log level `{value}`")))?;
                    cfg.log_level = value.to_string();
                }
                "model" => cfg.model_paths.push(base.join(value)),
                "models" => cfg
                    .model_paths
                    .extend(value.split(',').map(str::trim).filter(|p| !p.is_empty()).map(|p| base.join(p))),
                "fleet" => {
                    cfg.fleet = match value {
                        "default" => FleetMode::Default,
                        "none" => FleetMode::None,
                        other => return Err(err(format!("fleet must be `default` or `none`, got `{other}`"))),
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Seed vocabularies plus every configured model file.
    pub fn boot_kb(&self) -> Result<KnowledgeBase, ConfigError> {
        let mut kb = seed_with_properties().expect("seed models parse");
        for path in &self.model_paths {
            load_model(&mut kb, path)?;
        }
        Ok(kb)
    }
}

pub fn load_model(kb: &mut KnowledgeBase, path: &Path) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    load_into(kb, &text).map_err(|source| ConfigError::Model {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_level(s: &str) -> Option<tracing::Level> {
    s.parse().ok()
}
