//! Experiment configuration: a single JSON document.
//!
//! ```json
//! {
//!   "seed": 2024,
//!   "instances": {"source": "random", "count": 100,
//!                 "family": {"n_states": [2, 4], "n_actions": [2, 3], "class_size": [2, 8]}},
//!   "dataset": {"n_grid": [50], "noise": null},
//!   "algorithm": {"alpha_grid": [0.5, 1, 2, 5, "inf"], "mode": "pure"},
//!   "suites": ["rpi", "absolute"],
//!   "checks": {"trials": 50, "delta": 0.1, "c_diag": 1.0},
//!   "output": {"dir": "out", "svg": false}
//! }
//! ```
//!
//! `instances` may instead be `{"source": "crafted", "name": "two_state_family"}`
//! or `{"source": "file", "path": "instance.json"}`; relative paths resolve
//! against the config file. `algorithm` takes either `alpha_grid` or
//! `alpha_from_theory: {"delta": .., "c": ..}`, which sets
//! `alpha = c ln(|M| / delta)` per instance.

use std::path::{Path, PathBuf};

use armor_core::instance::InstanceFamily;
use armor_core::maximin::SolverMode;
use armor_core::theory::Instance;
use armor_core::version_space::alpha_from_theory;
use armor_core::{crafted, data::RewardNoise};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::formats::{read_instance, read_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Rpi,
    Absolute,
    Trend,
    Mle,
    Support,
    Concepts,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Rpi => "rpi",
            Suite::Absolute => "absolute",
            Suite::Trend => "trend",
            Suite::Mle => "mle",
            Suite::Support => "support",
            Suite::Concepts => "concepts",
        }
    }
}

/// A version-space radius; `"inf"` keeps every model with finite loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(pub f64);

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Alpha(x)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(Alpha(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "alpha must be a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CraftedName {
    TwoStateFamily,
    SeparationInstance,
    RpiCounterexample,
}

impl CraftedName {
    pub fn build(self) -> Instance {
        match self {
            CraftedName::TwoStateFamily => crafted::two_state_family(),
            CraftedName::SeparationInstance => crafted::separation_instance(),
            CraftedName::RpiCounterexample => crafted::rpi_counterexample(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    pub n_states: (usize, usize),
    pub n_actions: (usize, usize),
    pub class_size: (usize, usize),
    pub perturbation: f64,
    pub behavior_temperature: f64,
    pub gamma: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        let f = InstanceFamily::default();
        Self {
            n_states: f.n_states,
            n_actions: f.n_actions,
            class_size: f.class_size,
            perturbation: f.perturbation,
            behavior_temperature: f.behavior_temperature,
            gamma: f.gamma,
        }
    }
}

impl FamilySpec {
    pub fn family(&self) -> InstanceFamily {
        InstanceFamily {
            n_states: self.n_states,
            n_actions: self.n_actions,
            class_size: self.class_size,
            perturbation: self.perturbation,
            behavior_temperature: self.behavior_temperature,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Random {
        count: usize,
        #[serde(default)]
        family: FamilySpec,
    },
    Crafted {
        name: CraftedName,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub n_grid: Vec<usize>,
    /// Half-width of uniform reward noise.
    #[serde(default)]
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryAlpha {
    pub delta: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Pure,
    Mixed,
}

fn default_eps() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<Alpha>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_from_theory: Option<TheoryAlpha>,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl AlgorithmSpec {
    pub fn solver_mode(&self) -> SolverMode {
        match self.mode {
            ModeName::Pure => SolverMode::Pure,
            ModeName::Mixed => SolverMode::Mixed { eps: self.eps },
        }
    }

    pub fn alphas(&self, class_size: usize) -> Result<Vec<f64>> {
        match (&self.alpha_grid, &self.alpha_from_theory) {
            (Some(grid), None) => Ok(grid.iter().map(|a| a.0).collect()),
            (None, Some(t)) => Ok(vec![alpha_from_theory(class_size, t.delta, t.c)?]),
            _ => Err(LabError::Config(
                "algorithm needs exactly one of alpha_grid and alpha_from_theory".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSpec {
    pub trials: usize,
    pub delta: f64,
    pub c_diag: f64,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            trials: 50,
            delta: 0.1,
            c_diag: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances: InstanceSpec,
    pub dataset: DatasetSpec,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Reads and validates a config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let InstanceSpec::File { path: p } = &mut cfg.instances {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(dir) = &mut cfg.output.dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if self.dataset.n_grid.is_empty() {
            return bad("dataset.n_grid is empty".into());
        }
        if self.dataset.n_grid.contains(&0) {
            return bad("dataset.n_grid entries must be positive".into());
        }
        if let Some(w) = self.dataset.noise {
            if let Err(e) = (RewardNoise::Uniform { half_width: w }).validate() {
                return bad(e.to_string());
            }
        }
        match (&self.algorithm.alpha_grid, &self.algorithm.alpha_from_theory) {
            (Some(grid), None) => {
                if grid.is_empty() {
                    return bad("algorithm.alpha_grid is empty".into());
                }
                if let Some(a) = grid.iter().find(|a| !(a.0 >= 0.0)) {
                    return bad(format!("alpha {} must be non-negative", a.0));
                }
            }
            (None, Some(t)) => {
                if let Err(e) = alpha_from_theory(1, t.delta, t.c) {
                    return bad(e.to_string());
                }
            }
            _ => return bad("algorithm needs exactly one of alpha_grid and alpha_from_theory".into()),
        }
        if self.algorithm.mode == ModeName::Mixed && !(self.algorithm.eps > 0.0) {
            return bad(format!("eps {} must be positive", self.algorithm.eps));
        }
        match &self.instances {
            InstanceSpec::Random { count, family } => {
                if *count == 0 {
                    return bad("instances.count must be positive".into());
                }
                if let Err(e) = family.family().validate() {
                    return bad(e.to_string());
                }
            }
            InstanceSpec::File { path } if !path.is_file() => {
                return bad(format!("instance file {} does not exist", path.display()));
            }
            _ => {}
        }
        let c = &self.checks;
        if !(c.delta > 0.0 && c.delta <= 1.0) {
            return bad(format!("checks.delta {} must lie in (0, 1]", c.delta));
        }
        if !(c.c_diag > 0.0) {
            return bad(format!("checks.c_diag {} must be positive", c.c_diag));
        }
        if self.suites.contains(&Suite::Trend) && c.trials < 2 {
            return bad("the trend suite needs checks.trials >= 2".into());
        }
        if self.suites.contains(&Suite::Mle) && c.trials < 100 {
            return bad("the mle suite needs checks.trials >= 100".into());
        }
        if self.suites.contains(&Suite::Support) && c.trials == 0 {
            return bad("the support suite needs checks.trials >= 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization, written into every output file.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn noise(&self) -> Option<RewardNoise> {
        self.dataset.noise.map(|half_width| RewardNoise::Uniform { half_width })
    }

    pub fn instances(&self) -> Result<Vec<Instance>> {
        match &self.instances {
            InstanceSpec::Random { count, family } => {
                let f = family.family();
                (0..*count as u64).map(|i| Ok(f.instance(self.seed, i)?)).collect()
            }
            InstanceSpec::Crafted { name } => Ok(vec![name.build()]),
            InstanceSpec::File { path } => Ok(vec![read_instance(path)?]),
        }
    }
}
