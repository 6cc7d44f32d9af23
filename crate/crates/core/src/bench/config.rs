use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cbss::Branching;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "cbss-d")]
    CbssD,
    #[serde(rename = "cbss-tpg")]
    CbssTpg,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::CbssD => "cbss-d",
            Algorithm::CbssTpg => "cbss-tpg",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cbss-d" => Ok(Algorithm::CbssD),
            "cbss-tpg" => Ok(Algorithm::CbssTpg),
            _ => Err(Error::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Benchmark grid, read from a flat TOML file.
///
/// ```toml
/// maps = ["random-32-32-20.map"]
/// scens = ["random-32-32-20-random-1.scen"]
/// scenes = [1, 2]
/// agents = [5, 10]
/// targets = [10, 20]
/// taus = ["2", "5", "10", "20"]
/// seeds = [0, 1, 2]
/// algorithms = ["cbss-d", "cbss-tpg"]
/// branching = ["new"]
/// time_limit = 60.0
/// workers = 4
/// ```
///
/// `maps[k]` pairs with `scens[k]`. Paths are relative to the config file.
/// `instances` lists instance JSON files run with every algorithm and
/// branching rule in addition to the generated grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub maps: Vec<String>,
    #[serde(default)]
    pub scens: Vec<String>,
    #[serde(default)]
    pub scenes: Vec<u8>,
    #[serde(default)]
    pub agents: Vec<usize>,
    #[serde(default)]
    pub targets: Vec<usize>,
    #[serde(default)]
    pub taus: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub instances: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_branching")]
    pub branching: Vec<Branching>,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub workers: usize,
}

fn default_branching() -> Vec<Branching> {
    vec![Branching::New]
}

fn default_time_limit() -> f64 {
    60.0
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.len() != self.scens.len() {
            return Err(Error::Config("maps and scens must have the same length".into()));
        }
        if self.algorithms.is_empty() || self.branching.is_empty() {
            return Err(Error::Config("algorithms and branching must be nonempty".into()));
        }
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return Err(Error::Config("time_limit must be positive".into()));
        }
        if self.eps.is_nan() || self.eps < 0.0 {
            return Err(Error::Config("eps must be nonnegative".into()));
        }
        for s in &self.scenes {
            crate::workspace::SceneKind::from_number(*s)?;
        }
        for t in &self.taus {
            t.parse::<crate::workspace::TauSpec>()?;
        }
        Ok(())
    }
}
