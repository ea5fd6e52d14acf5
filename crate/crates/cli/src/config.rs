//! Config-file equivalents of the command-line flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{usage, Fail};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub no_evasion: Option<bool>,
    pub enlarged_range: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockFile {
    pub agents: Option<usize>,
    pub comm_range: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateFile {
    pub target_mean: Option<f64>,
    pub band: Option<f64>,
    pub seed: Option<u64>,
    pub params: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeFile {
    pub scenario: Option<PathBuf>,
    pub port: Option<u16>,
    pub host: Option<String>,
    pub speed: Option<f64>,
}

/// Reads `section` of the config file, or defaults when there is no file
/// or no such section. Relative paths in the file resolve against the
/// current directory.
pub fn load_section<T: DeserializeOwned + Default>(path: Option<&Path>, section: &str) -> Result<T, Fail> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut root: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    match root.get_mut(section) {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v.take()).map_err(|e| usage(format!("{}: [{section}] {e}", path.display()))),
    }
}
