//! TOML scenario files.
//!
//! A scenario file is a single TOML document mirroring [`ScenarioConfig`]:
//! top-level `schema_version`, `name`, `seed`, `dt`, `t_max`, an optional
//! `[params]` table, then `[[robots]]` and `[[obstacles]]` arrays of tables.
//! Points and vertices are two-element arrays `[x, y]` in metres. Omitted
//! fields take their documented defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;
use crate::scenarios::{ScenarioConfig, ScenarioError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ScenarioError),
}

/// Parses and validates a scenario document.
pub fn from_toml_str<T>(text: &str) -> Result<ScenarioConfig<T>, ConfigError>
where
    T: Real + DeserializeOwned,
{
    let config: ScenarioConfig<T> = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn to_toml_string<T: Real + Serialize>(config: &ScenarioConfig<T>) -> String {
    toml::to_string(config).expect("scenario configs always serialize")
}

pub fn load<T>(path: impl AsRef<Path>) -> Result<ScenarioConfig<T>, ConfigError>
where
    T: Real + DeserializeOwned,
{
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_toml_str(&text)
}

pub fn save<T: Real + Serialize>(path: impl AsRef<Path>, config: &ScenarioConfig<T>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    fs::write(path, to_toml_string(config)).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}
