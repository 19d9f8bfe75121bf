//! JSON and JSONL file formats.
//!
//! * MDP: `{n_states, n_actions, gamma, initial_dist, transition[s][a][s'], reward[s][a]}`.
//! * Model class: `{"models": [MDP, ...], "truth_index": k}`; a bare array of
//!   MDPs is accepted on read.
//! * Policy: `{"n_actions": k, "actions": [..]}` or `{"probs": [[..], ..]}`.
//! * Behavior: `{"id": "...", "weights": [[..], ..]}` over `(s, a)`.
//! * Dataset: first line `{"seed", "n", "behavior_id", "noise"}`, then one
//!   `[s, a, r, s_next]` array per line.
//! * Instance: `{seed, truth, class, behavior, reference, comparator}`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use armor_core::data::{BehaviorDistribution, Dataset, DatasetMeta, RewardNoise, Transition};
use armor_core::mdp::{Policy, TabularMdp};
use armor_core::theory::Instance;
use armor_core::version_space::ModelClass;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDoc {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub initial_dist: Vec<f64>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
}

impl MdpDoc {
    pub fn from_mdp(m: &TabularMdp) -> Self {
        Self {
            n_states: m.n_states(),
            n_actions: m.n_actions(),
            gamma: m.gamma(),
            initial_dist: m.initial_dist().to_vec(),
            transition: m.transition_nested(),
            reward: m.reward_nested(),
        }
    }

    pub fn to_mdp(&self) -> Result<TabularMdp> {
        if self.transition.len() != self.n_states || self.reward.len() != self.n_states {
            return Err(LabError::Format(format!(
                "declared n_states = {} but tables have {} transition and {} reward rows",
                self.n_states,
                self.transition.len(),
                self.reward.len()
            )));
        }
        if let Some(s) = (0..self.n_states)
            .find(|&s| self.transition[s].len() != self.n_actions || self.reward[s].len() != self.n_actions)
        {
            return Err(LabError::Format(format!(
                "state {s} does not list exactly n_actions = {} entries",
                self.n_actions
            )));
        }
        Ok(TabularMdp::from_nested(
            &self.transition,
            &self.reward,
            self.gamma,
            self.initial_dist.clone(),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDoc {
    pub models: Vec<MdpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_index: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClassFile {
    Object(ClassDoc),
    Bare(Vec<MdpDoc>),
}

impl ClassDoc {
    pub fn from_class(c: &ModelClass) -> Self {
        Self {
            models: c.models().iter().map(MdpDoc::from_mdp).collect(),
            truth_index: c.truth_index(),
        }
    }

    pub fn to_class(&self) -> Result<ModelClass> {
        let models = self.models.iter().map(MdpDoc::to_mdp).collect::<Result<Vec<_>>>()?;
        Ok(ModelClass::new(models, self.truth_index)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PolicyDoc {
    Deterministic { n_actions: usize, actions: Vec<usize> },
    Stochastic { probs: Vec<Vec<f64>> },
}

impl PolicyDoc {
    pub fn from_policy(p: &Policy) -> Self {
        match p {
            Policy::Deterministic { n_actions, actions } => PolicyDoc::Deterministic {
                n_actions: *n_actions,
                actions: actions.clone(),
            },
            Policy::Stochastic { .. } => PolicyDoc::Stochastic { probs: p.prob_rows() },
        }
    }

    pub fn to_policy(&self) -> Result<Policy> {
        Ok(match self {
            PolicyDoc::Deterministic { n_actions, actions } => Policy::deterministic(actions.clone(), *n_actions)?,
            PolicyDoc::Stochastic { probs } => Policy::stochastic(probs)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub weights: Vec<Vec<f64>>,
}

impl BehaviorDoc {
    pub fn from_behavior(b: &BehaviorDistribution) -> Self {
        Self {
            id: Some(b.id().to_string()),
            weights: b.weights().chunks(b.n_actions()).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_behavior(&self) -> Result<BehaviorDistribution> {
        let n_states = self.weights.len();
        let n_actions = self.weights.first().map_or(0, Vec::len);
        if n_actions == 0 || self.weights.iter().any(|r| r.len() != n_actions) {
            return Err(LabError::Format(
                "behavior weights must be a non-empty rectangular table".into(),
            ));
        }
        let b = BehaviorDistribution::new(n_states, n_actions, self.weights.concat())?;
        Ok(match &self.id {
            Some(id) => b.with_id(id.clone()),
            None => b,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub seed: u64,
    pub truth: MdpDoc,
    pub class: ClassDoc,
    pub behavior: BehaviorDoc,
    pub reference: PolicyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<PolicyDoc>,
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            seed: inst.seed,
            truth: MdpDoc::from_mdp(&inst.m_star),
            class: ClassDoc::from_class(&inst.class),
            behavior: BehaviorDoc::from_behavior(&inst.behavior),
            reference: PolicyDoc::from_policy(&inst.reference),
            comparator: inst.comparator.as_ref().map(PolicyDoc::from_policy),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        Ok(Instance::new(
            self.truth.to_mdp()?,
            self.class.to_class()?,
            self.behavior.to_behavior()?,
            self.reference.to_policy()?,
            self.comparator.as_ref().map(PolicyDoc::to_policy).transpose()?,
            self.seed,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseDoc {
    Uniform { half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub seed: u64,
    pub n: usize,
    pub behavior_id: String,
    #[serde(default)]
    pub noise: Option<NoiseDoc>,
}

fn noise_to_doc(n: RewardNoise) -> NoiseDoc {
    match n {
        RewardNoise::Uniform { half_width } => NoiseDoc::Uniform { half_width },
    }
}

fn noise_from_doc(n: NoiseDoc) -> RewardNoise {
    match n {
        NoiseDoc::Uniform { half_width } => RewardNoise::Uniform { half_width },
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::json(path, None, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::json(path, None, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn read_mdp(path: &Path) -> Result<TabularMdp> {
    read_json::<MdpDoc>(path)?.to_mdp().map_err(|e| e.in_file(path))
}

pub fn read_class(path: &Path) -> Result<ModelClass> {
    let doc = match read_json::<ClassFile>(path)? {
        ClassFile::Object(doc) => doc,
        ClassFile::Bare(models) => ClassDoc {
            models,
            truth_index: None,
        },
    };
    doc.to_class().map_err(|e| e.in_file(path))
}

pub fn read_policy(path: &Path) -> Result<Policy> {
    read_json::<PolicyDoc>(path)?.to_policy().map_err(|e| e.in_file(path))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    read_json::<InstanceDoc>(path)?
        .to_instance()
        .map_err(|e| e.in_file(path))
}

/// A behavior argument: `uniform`, a behavior file, or a policy file whose
/// occupancy under `m` becomes the sampling distribution.
pub fn read_behavior(arg: &str, m: &TabularMdp) -> Result<BehaviorDistribution> {
    if arg == "uniform" {
        return Ok(BehaviorDistribution::uniform(m.n_states(), m.n_actions()));
    }
    let path = Path::new(arg);
    let value: serde_json::Value = read_json(path)?;
    let b = if value.get("weights").is_some() {
        serde_json::from_value::<BehaviorDoc>(value)
            .map_err(|e| LabError::json(path, None, e))?
            .to_behavior()
    } else {
        let pi = serde_json::from_value::<PolicyDoc>(value)
            .map_err(|e| LabError::json(path, None, e))?
            .to_policy()?;
        let id = path
            .file_stem()
            .map_or("policy".into(), |s| s.to_string_lossy().into_owned());
        Ok(armor_core::data::behavior_from_policy(m, &pi)?.with_id(id))
    }
    .map_err(|e| e.in_file(path))?;
    if b.n_states() != m.n_states() || b.n_actions() != m.n_actions() {
        return Err(LabError::Format(format!(
            "{}: behavior is {}x{} but the MDP is {}x{}",
            path.display(),
            b.n_states(),
            b.n_actions(),
            m.n_states(),
            m.n_actions()
        )));
    }
    Ok(b)
}

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let meta = d.meta();
    let header = DatasetHeader {
        seed: meta.seed,
        n: meta.n,
        behavior_id: meta.behavior_id.clone(),
        noise: meta.noise.map(noise_to_doc),
    };
    let file = fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut emit = |line: String| writeln!(out, "{line}").map_err(|e| LabError::io(path, e));
    emit(serde_json::to_string(&header).map_err(|e| LabError::json(path, None, e))?)?;
    for t in d.transitions() {
        let row = (t.state, t.action, t.reward, t.next_state);
        emit(serde_json::to_string(&row).map_err(|e| LabError::json(path, None, e))?)?;
    }
    out.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header: DatasetHeader = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| LabError::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| LabError::json(path, Some(1), e))?
        }
        None => return Err(LabError::Format(format!("{}: empty dataset file", path.display()))),
    };
    let mut transitions = Vec::with_capacity(header.n);
    for (i, line) in lines {
        let line = line.map_err(|e| LabError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (state, action, reward, next_state): (usize, usize, f64, usize) =
            serde_json::from_str(&line).map_err(|e| LabError::json(path, Some(i + 1), e))?;
        transitions.push(Transition {
            state,
            action,
            reward,
            next_state,
        });
    }
    let meta = DatasetMeta {
        seed: header.seed,
        n: header.n,
        behavior_id: header.behavior_id,
        noise: header.noise.map(noise_from_doc),
    };
    Dataset::new(transitions, meta).map_err(|e| LabError::from(e).in_file(path))
}
