//! Config files: TOML with one section per module. Every key is optional and
//! command-line flags take precedence.
//!
//! ```toml
//! [params]            # preset-style parameters
//! preset = "quon"
//! q = 0.5
//! p = "2"
//!
//! [spec]              # or an exact spec (wins over [params] when no --preset is given)
//! family = "multiparam"
//! order = 3
//! sites = 3
//! q = [[1, 2, 0.3, 0.1]]
//!
//! [gram]
//! indices = [1, 2, 3]
//!
//! [spectral]
//! points = 21
//! tol = 1e-9
//!
//! [jw]
//! lambda = 0.25
//! mu = 1.0
//! cutoff = 3
//!
//! [cli]
//! seed = 0
//! threads = 1
//! format = "csv"
//! ```

use std::path::Path;

use paraquon::params::SpecConfig;
use paraquon::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub spec: Option<SpecConfig>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub gram: GramSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub jw: JwSection,
    #[serde(default)]
    pub cli: CliSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub preset: Option<String>,
    pub q: Option<f64>,
    pub p: Option<String>,
    pub epsilon: Option<i64>,
    pub lambda: Option<f64>,
    pub phi: Option<f64>,
    pub sites: Option<usize>,
    pub qfile: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramSection {
    pub indices: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub points: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JwSection {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub cutoff: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliSection {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<String>,
    pub tol: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgs(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("config {}: {e}", path.display())))
    }
}

/// `--qfile` contents: `[i, j, re, im]` entries with 1-based sites.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QFile {
    pub sites: Option<usize>,
    pub q: Vec<[f64; 4]>,
}

impl QFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgs(format!("cannot read q file {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("q file {}: {e}", path.display())))
    }

    /// Site count: explicit, else the largest label mentioned.
    pub fn sites(&self) -> usize {
        self.sites.unwrap_or_else(|| {
            self.q
                .iter()
                .map(|e| e[0].max(e[1]) as usize)
                .max()
                .unwrap_or(1)
        })
    }
}
