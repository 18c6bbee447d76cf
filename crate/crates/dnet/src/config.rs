//! Experiment configuration, read from JSON.
//!
//! ```json
//! {
//!   "kind": "theorem1",
//!   "network": { "random": { "widths": [8, 8, 8], "seed": 1, "count": 10 } },
//!   "m_grid": [16, 64, 256],
//!   "seeds": { "count": 200, "base": 0 },
//!   "points": { "uniform": { "n": 512, "seed": 99 } },
//!   "output": { "dir": "out", "stem": "theorem1" }
//! }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use dnet_core::markov::SigmaMode;
use dnet_core::variation::{rescale_canonical, VariationMode};
use dnet_core::{random_network, uniform_points, Network, NetworkSpec, Point};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Theorem1,
    Select,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSource {
    File { path: PathBuf },
    /// `count` networks from seeds `seed, seed+1, …`, entries uniform on `[0, 1]`, then canonical.
    Random {
        widths: Vec<usize>,
        seed: u64,
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        clamp: bool,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// `base, base+1, …, base+count−1`.
    Count {
        count: usize,
        #[serde(default)]
        base: u64,
    },
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count { count, base } => (0..*count as u64).map(|i| base + i).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointsSource {
    Uniform { n: usize, seed: u64 },
    /// JSON array of coordinate arrays.
    Dataset { path: PathBuf },
}

impl Default for PointsSource {
    fn default() -> Self {
        PointsSource::Uniform { n: 512, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_stem() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectSpec {
    /// Paths per cover element.
    pub m: usize,
    /// Number of noisy samples.
    pub n: usize,
    pub noise_sd: f64,
    /// Cover element the data are generated from, by enumeration index.
    pub truth_index: usize,
    #[serde(default)]
    pub data_seed: u64,
    /// Upper limit on the number of enumerated cover elements.
    #[serde(default = "default_cover_guard")]
    pub cover_guard: u128,
}

fn default_cover_guard() -> u128 {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub network: NetworkSource,
    #[serde(default)]
    pub m_grid: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    #[serde(default)]
    pub points: PointsSource,
    #[serde(default = "default_sigma")]
    pub sigma_mode: SigmaMode,
    /// Records wall time per trial; off by default so outputs stay byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub select: Option<SelectSpec>,
    pub output: Option<OutputSpec>,
}

fn default_seeds() -> Seeds {
    Seeds::Count { count: 200, base: 0 }
}

fn default_sigma() -> SigmaMode {
    SigmaMode::Estimate
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, origin: &str) -> HarnessResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            HarnessError::config(origin, "<document>", format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate(origin)?;
        Ok(cfg)
    }

    pub fn validate(&self, origin: &str) -> HarnessResult<()> {
        let err = |field: &str, msg: &str| Err(HarnessError::config(origin, field, msg));
        match self.kind {
            ExperimentKind::Theorem1 => {
                if self.m_grid.is_empty() {
                    return err("m_grid", "grid is empty");
                }
                if self.m_grid.contains(&0) {
                    return err("m_grid", "M must be positive");
                }
            }
            ExperimentKind::Select => {
                let Some(s) = &self.select else {
                    return err("select", "select experiments need a `select` block");
                };
                if s.n == 0 {
                    return err("select.n", "need at least one sample");
                }
                if s.m == 0 {
                    return err("select.m", "M must be positive");
                }
                if !(s.noise_sd >= 0.0) {
                    return err("select.noise_sd", "must be nonnegative");
                }
            }
        }
        let seeds = self.seeds.values();
        if seeds.is_empty() {
            return err("seeds", "no seeds");
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return err("seeds", "seeds must be distinct");
        }
        if let NetworkSource::Random { widths, count, .. } = &self.network {
            if widths.is_empty() || widths.iter().any(|w| *w == 0 || w % 2 != 0) {
                return err("network.random.widths", "widths must be nonempty and even");
            }
            if *count == 0 {
                return err("network.random.count", "count must be positive");
            }
        }
        if let PointsSource::Uniform { n: 0, .. } = self.points {
            return err("points.uniform.n", "need at least one point");
        }
        Ok(())
    }

    /// The networks of the experiment; random ones are returned in canonical form.
    pub fn networks(&self) -> HarnessResult<Vec<Network>> {
        match &self.network {
            NetworkSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                let spec = NetworkSpec::from_json(&text)?;
                Ok(vec![spec.to_network()?])
            }
            NetworkSource::Random {
                widths,
                seed,
                count,
                clamp,
            } => (0..*count as u64)
                .map(|i| {
                    let net = random_network(widths, seed + i, *clamp)?;
                    Ok(rescale_canonical(&net, VariationMode::Plain).0)
                })
                .collect(),
        }
    }

    pub fn points(&self, d_in: usize) -> HarnessResult<Vec<Point>> {
        match &self.points {
            PointsSource::Uniform { n, seed } => Ok(uniform_points(d_in, *n, *seed)),
            PointsSource::Dataset { path } => load_points(path, d_in),
        }
    }
}

pub fn load_points(path: &Path, d_in: usize) -> HarnessResult<Vec<Point>> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let raw: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| HarnessError::config(&origin, "points", e.to_string()))?;
    if raw.is_empty() {
        return Err(HarnessError::config(&origin, "points", "dataset is empty"));
    }
    raw.into_iter()
        .enumerate()
        .map(|(i, c)| {
            if c.len() != d_in {
                return Err(HarnessError::config(
                    &origin,
                    format!("points[{i}]"),
                    format!("expected {d_in} coordinates, got {}", c.len()),
                ));
            }
            Point::new(c).map_err(|e| HarnessError::config(&origin, format!("points[{i}]"), e.to_string()))
        })
        .collect()
}
