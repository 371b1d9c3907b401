//! Optional JSON config file. Every key is optional; command-line flags
//! override it and built-in defaults fill whatever is left.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHA: f64 = 10.0;
pub const DEFAULT_F_LO: f64 = 0.5;
pub const DEFAULT_F_HI: f64 = 3.0;
pub const DEFAULT_K_VALUES: [usize; 5] = [1, 3, 5, 7, 9];
pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8765;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub levels: Option<usize>,
    pub f_lo: Option<f64>,
    pub f_hi: Option<f64>,
    pub min_confidence: Option<f64>,
    pub window_secs: Option<f64>,
    pub feature_length: Option<usize>,
    pub k: Option<usize>,
    pub k_values: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub train_fraction: Option<f64>,
    pub host: Option<String>,
    pub port: Option<u16>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Flag, then config file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
