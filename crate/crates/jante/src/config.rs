//! Run configuration files (TOML).

use std::path::{Path, PathBuf};

use jante_core::{Configuration, ConvexBody, RunParams, StopRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_MAX_ORIGINAL_STEPS: u64 = 10_000_000;

/// Invalid configuration; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("{name}: {source}")]
    Core { name: String, source: jante_core::Error },
}

impl From<jante_core::Error> for ConfigError {
    fn from(source: jante_core::Error) -> Self {
        let name = format!("{source:?}");
        let name = name.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
        ConfigError::Core { name, source }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    #[default]
    Jante,
    /// `N = M + 1` points; the core is observed at its changes.
    Original,
    /// Jante chain on the full space.
    ScaleFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Fullspace {},
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Half-spaces `normal · x <= offset`.
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        witness: Vec<f64>,
        bound: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Explicit { points: Vec<Vec<f64>> },
    /// Uniform points in the box `[lower, upper]`, drawn once.
    Random { lower: Vec<f64>, upper: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub max_steps: Option<u64>,
    #[serde(rename = "target_D")]
    pub target_d: Option<f64>,
    #[serde(rename = "target_F")]
    pub target_f: Option<f64>,
    #[serde(default)]
    pub require_exodus: bool,
    pub max_original_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeepmapSpec {
    pub bbox: [f64; 4],
    pub resolution: [usize; 2],
}

/// The file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub chain: ChainKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub n_runs: usize,
    #[serde(default)]
    pub recenter: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub body: BodySpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub stop: StopSpec,
    pub keepmap: Option<KeepmapSpec>,
}

fn one() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub d: usize,
    pub m: usize,
    pub chain: ChainKind,
    pub seed: u64,
    pub n_runs: usize,
    pub output_dir: PathBuf,
    pub params: RunParams,
    pub max_original_steps: u64,
    pub keepmap: Option<KeepmapSpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn body(&self) -> Result<ConvexBody, ConfigError> {
        let body = match &self.body {
            BodySpec::Fullspace {} => ConvexBody::full_space(self.d)?,
            BodySpec::Box { lower, upper } => ConvexBody::new_box(lower.clone(), upper.clone())?,
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius)?,
            BodySpec::Polytope { normals, offsets, witness, bound } => {
                if normals.len() != offsets.len() {
                    return Err(invalid("polytope needs one offset per normal"));
                }
                let facets = normals.iter().cloned().zip(offsets.iter().copied()).collect();
                ConvexBody::polytope_normalized(facets, witness.clone(), *bound)?
            }
        };
        if body.dim() != self.d {
            return Err(invalid(format!("body has dimension {}, config says d = {}", body.dim(), self.d)));
        }
        Ok(body)
    }

    /// Number of points the chain starts from.
    pub fn n_points(&self) -> usize {
        match self.chain {
            ChainKind::Original => self.m + 1,
            _ => self.m,
        }
    }

    pub fn initial(&self) -> Result<Configuration, ConfigError> {
        let n = self.n_points();
        let points = match &self.initial {
            InitialSpec::Explicit { points } => {
                if points.len() != n {
                    return Err(invalid(format!("initial has {} points, expected {n}", points.len())));
                }
                if let Some(p) = points.iter().find(|p| p.len() != self.d) {
                    return Err(invalid(format!("initial point of dimension {}, expected {}", p.len(), self.d)));
                }
                points.clone()
            }
            InitialSpec::Random { lower, upper, seed } => {
                if lower.len() != self.d || upper.len() != self.d {
                    return Err(invalid("random initial box has the wrong dimension"));
                }
                if lower.iter().zip(upper).any(|(l, u)| l.partial_cmp(u) != Some(std::cmp::Ordering::Less)) {
                    return Err(invalid("random initial box needs lower < upper"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| lower.iter().zip(upper).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect())
                    .collect()
            }
        };
        Ok(Configuration::from_points(&points)?)
    }

    pub fn resolve(&self) -> Result<Experiment, ConfigError> {
        if self.d == 0 {
            return Err(invalid("d must be at least 1"));
        }
        if self.m < 2 {
            return Err(invalid("M must be at least 2"));
        }
        if self.n_runs == 0 {
            return Err(invalid("n_runs must be at least 1"));
        }
        let body = self.body()?;
        match self.chain {
            ChainKind::ScaleFree if !body.is_full_space() => {
                return Err(invalid("chain = \"scale_free\" needs body kind = \"fullspace\""))
            }
            ChainKind::Original if !body.is_bounded() => {
                return Err(invalid("chain = \"original\" needs a bounded body"))
            }
            _ => {}
        }
        if self.recenter && !body.is_full_space() {
            return Err(invalid("recenter needs body kind = \"fullspace\""));
        }
        let initial = self.initial()?;
        if !initial.contained_in(&body) {
            return Err(jante_core::Error::PointOutsideBody.into());
        }
        let target_d = self.stop.target_d.unwrap_or(1e-12 * initial.diameter());
        let stop = StopRule {
            max_steps: self.stop.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            target_d,
            target_f: self.stop.target_f.unwrap_or(0.0),
            require_exodus: self.stop.require_exodus,
        };
        stop.validate()?;
        let params = RunParams {
            recenter: self.recenter,
            ..RunParams::new(body, initial, stop)
        };
        Ok(Experiment {
            d: self.d,
            m: self.m,
            chain: self.chain,
            seed: self.seed,
            n_runs: self.n_runs,
            output_dir: self.output_dir.clone(),
            params,
            max_original_steps: self.stop.max_original_steps.unwrap_or(DEFAULT_MAX_ORIGINAL_STEPS),
            keepmap: self.keepmap.clone(),
        })
    }
}
