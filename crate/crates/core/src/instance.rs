//! Seeded random instances: a true MDP, a perturbed model class that always
//! contains it, a softmax behavior occupancy, and random reference and
//! comparator policies.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::behavior_from_policy;
use crate::math::exp;
use crate::mdp::{Policy, TabularMdp};
use crate::theory::Instance;
use crate::version_space::ModelClass;
use crate::{derive_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomInstanceRecipe {
    pub n_states: usize,
    pub n_actions: usize,
    pub class_size: usize,
    /// Half-width of the uniform noise added to transitions and rewards of
    /// candidate models; 0 makes every candidate a copy of the truth.
    pub perturbation: f64,
    /// Softmax temperature of the behavior policy; small values give narrow coverage.
    pub behavior_temperature: f64,
    pub gamma: f64,
}

impl Default for RandomInstanceRecipe {
    fn default() -> Self {
        Self {
            n_states: 3,
            n_actions: 2,
            class_size: 5,
            perturbation: 0.3,
            behavior_temperature: 1.0,
            gamma: 0.9,
        }
    }
}

impl RandomInstanceRecipe {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_actions == 0 || self.class_size == 0 {
            return Err(Error::InvalidArgument(
                "recipe needs at least one state, action and model".into(),
            ));
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "perturbation {} must be finite and non-negative",
                self.perturbation
            )));
        }
        if !(self.behavior_temperature.is_finite() && self.behavior_temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "behavior temperature {} must be positive",
                self.behavior_temperature
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidDiscount(self.gamma));
        }
        Ok(())
    }
}

/// Inclusive size ranges; each instance draws its own sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceFamily {
    pub n_states: (usize, usize),
    pub n_actions: (usize, usize),
    pub class_size: (usize, usize),
    pub perturbation: f64,
    pub behavior_temperature: f64,
    pub gamma: f64,
}

impl Default for InstanceFamily {
    fn default() -> Self {
        Self {
            n_states: (2, 4),
            n_actions: (2, 3),
            class_size: (2, 8),
            perturbation: 0.3,
            behavior_temperature: 1.0,
            gamma: 0.9,
        }
    }
}

impl InstanceFamily {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("n_states", self.n_states),
            ("n_actions", self.n_actions),
            ("class_size", self.class_size),
        ] {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "{name} range [{lo}, {hi}] is empty or starts at 0"
                )));
            }
        }
        Ok(())
    }

    pub fn recipe(&self, seed: u64) -> Result<RandomInstanceRecipe> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xFA, 0));
        let recipe = RandomInstanceRecipe {
            n_states: rng.gen_range(self.n_states.0..=self.n_states.1),
            n_actions: rng.gen_range(self.n_actions.0..=self.n_actions.1),
            class_size: rng.gen_range(self.class_size.0..=self.class_size.1),
            perturbation: self.perturbation,
            behavior_temperature: self.behavior_temperature,
            gamma: self.gamma,
        };
        recipe.validate()?;
        Ok(recipe)
    }

    /// The `index`-th member of the family under `seed`.
    pub fn instance(&self, seed: u64, index: u64) -> Result<Instance> {
        let s = derive_seed(seed, index, 1);
        generate_instance(&self.recipe(s)?, s)
    }
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= total);
    Some(v)
}

fn random_distribution<R: Rng>(rng: &mut R, k: usize, sparsity: f64) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..k)
            .map(|_| if rng.gen_bool(sparsity) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        if let Some(v) = normalize(raw) {
            return v;
        }
    }
}

fn random_truth<R: Rng>(rng: &mut R, r: &RandomInstanceRecipe) -> Result<TabularMdp> {
    let (ns, na) = (r.n_states, r.n_actions);
    let mut p = Vec::with_capacity(ns * na * ns);
    for _ in 0..ns * na {
        p.extend(random_distribution(rng, ns, 0.25));
    }
    let rewards = (0..ns * na).map(|_| rng.gen::<f64>()).collect();
    let rho = random_distribution(rng, ns, 0.0);
    TabularMdp::new(ns, na, p, rewards, r.gamma, rho)
}

fn perturb<R: Rng>(rng: &mut R, truth: &TabularMdp, scale: f64) -> Result<TabularMdp> {
    if scale == 0.0 {
        return Ok(truth.clone());
    }
    let (ns, na) = (truth.n_states(), truth.n_actions());
    let mut p = Vec::with_capacity(ns * na * ns);
    for s in 0..ns {
        for a in 0..na {
            let row = truth.transition_row(s, a);
            let noisy = row
                .iter()
                .map(|x| (x + rng.gen_range(-scale..=scale)).max(0.0))
                .collect();
            p.extend(normalize(noisy).unwrap_or_else(|| row.to_vec()));
        }
    }
    let rewards = truth
        .reward_table()
        .iter()
        .map(|x| (x + rng.gen_range(-scale..=scale)).clamp(0.0, 1.0))
        .collect();
    TabularMdp::new(ns, na, p, rewards, truth.gamma(), truth.initial_dist().to_vec())
}

fn random_deterministic<R: Rng>(rng: &mut R, ns: usize, na: usize) -> Policy {
    Policy::Deterministic {
        n_actions: na,
        actions: (0..ns).map(|_| rng.gen_range(0..na)).collect(),
    }
}

/// Deterministic in `seed`; the truth is in the class at a recorded index.
pub fn generate_instance(recipe: &RandomInstanceRecipe, seed: u64) -> Result<Instance> {
    recipe.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, na) = (recipe.n_states, recipe.n_actions);
    let truth = random_truth(&mut rng, recipe)?;
    let truth_index = rng.gen_range(0..recipe.class_size);
    let mut models = Vec::with_capacity(recipe.class_size);
    for i in 0..recipe.class_size {
        if i == truth_index {
            models.push(truth.clone());
        } else {
            models.push(perturb(&mut rng, &truth, recipe.perturbation)?);
        }
    }
    let class = ModelClass::new(models, Some(truth_index))?;

    let mut probs = Vec::with_capacity(ns * na);
    for _ in 0..ns {
        let logits: Vec<f64> = (0..na)
            .map(|_| exp(rng.gen_range(-1.0..=1.0) / recipe.behavior_temperature))
            .collect();
        probs.extend(normalize(logits).expect("softmax weights are positive"));
    }
    let behavior_policy = Policy::Stochastic { n_actions: na, probs };
    let behavior = behavior_from_policy(&truth, &behavior_policy)?.with_id(format!("softmax_seed_{seed}"));
    let reference = random_deterministic(&mut rng, ns, na);
    let comparator = random_deterministic(&mut rng, ns, na);
    Instance::new(truth, class, behavior, reference, Some(comparator), seed)
}
