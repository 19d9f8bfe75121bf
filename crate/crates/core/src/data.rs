//! Offline datasets of i.i.d. `(s, a, r, s')` tuples.
//!
//! State-action pairs are drawn from an explicit behavior distribution over
//! `(s, a)`; next states and rewards come from the true model.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdp::{check_distribution, evaluate, Policy, TabularMdp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// Bounded reward noise added to `R*(s, a)` when sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardNoise {
    /// Uniform on `[-half_width, half_width]`, result clipped to `[0, 1]`.
    Uniform { half_width: f64 },
}

impl RewardNoise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RewardNoise::Uniform { half_width } if half_width.is_finite() && half_width >= 0.0 => Ok(()),
            RewardNoise::Uniform { half_width } => Err(Error::InvalidArgument(format!(
                "noise half-width {half_width} must be finite and non-negative"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub seed: u64,
    pub n: usize,
    pub behavior_id: String,
    pub noise: Option<RewardNoise>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    transitions: Vec<Transition>,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(transitions: Vec<Transition>, meta: DatasetMeta) -> Result<Self> {
        if meta.n != transitions.len() {
            return Err(Error::InvalidArgument(format!(
                "metadata declares n = {} but {} transitions are present",
                meta.n,
                transitions.len()
            )));
        }
        if let Some((i, t)) = transitions.iter().enumerate().find(|(_, t)| !t.reward.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "transition {i} has non-finite reward {}",
                t.reward
            )));
        }
        Ok(Self { transitions, meta })
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Checks every index against the dimensions of `m`.
    pub fn check_against(&self, m: &TabularMdp) -> Result<()> {
        for (i, t) in self.transitions.iter().enumerate() {
            if t.state >= m.n_states() || t.next_state >= m.n_states() || t.action >= m.n_actions() {
                return Err(Error::IndexOutOfRange(format!(
                    "transition {i} = ({}, {}, {}) does not fit a {}x{} MDP",
                    t.state,
                    t.action,
                    t.next_state,
                    m.n_states(),
                    m.n_actions()
                )));
            }
        }
        Ok(())
    }
}

/// Sampling distribution `mu` over state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorDistribution {
    n_states: usize,
    n_actions: usize,
    weights: Vec<f64>,
    id: String,
}

impl BehaviorDistribution {
    /// Flat weights `w[s * n_actions + a]`.
    pub fn new(n_states: usize, n_actions: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "behavior table has {} entries, expected {}",
                weights.len(),
                n_states * n_actions
            )));
        }
        check_distribution(&weights, "behavior distribution")?;
        Ok(Self {
            n_states,
            n_actions,
            weights,
            id: "custom".to_string(),
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let k = n_states * n_actions;
        Self {
            n_states,
            n_actions,
            weights: alloc::vec![1.0 / k as f64; k],
            id: "uniform".to_string(),
        }
    }

    /// Label recorded in datasets sampled from this distribution.
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, s: usize, a: usize) -> f64 {
        self.weights[s * self.n_actions + a]
    }

    /// The conditional policy `mu(a | s)`; states with no mass get the uniform row.
    pub fn conditional_policy(&self) -> Policy {
        let na = self.n_actions;
        let mut probs = Vec::with_capacity(self.weights.len());
        for row in self.weights.chunks(na) {
            let mass: f64 = row.iter().sum();
            if mass > 0.0 {
                probs.extend(row.iter().map(|w| w / mass));
            } else {
                probs.extend(core::iter::repeat_n(1.0 / na as f64, na));
            }
        }
        Policy::Stochastic { n_actions: na, probs }
    }
}

/// The exact discounted occupancy `d^pi_M` as a sampling distribution.
pub fn behavior_from_policy(m: &TabularMdp, pi: &Policy) -> Result<BehaviorDistribution> {
    let rep = evaluate(m, pi)?;
    // Occupancy from a linear solve can carry -1e-17 style round-off.
    let mut weights: Vec<f64> = rep.occupancy.iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(BehaviorDistribution::new(m.n_states(), m.n_actions(), weights)?.with_id("occupancy"))
}

/// Draws `n` i.i.d. transitions: `(s, a) ~ mu`, `s' ~ P*(. | s, a)`,
/// `r = R*(s, a)` plus optional noise. Pure function of its arguments.
pub fn sample_dataset(
    m_star: &TabularMdp,
    mu: &BehaviorDistribution,
    n: usize,
    seed: u64,
    noise: Option<RewardNoise>,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset size must be at least 1".to_string()));
    }
    if mu.n_states != m_star.n_states() || mu.n_actions != m_star.n_actions() {
        return Err(Error::DimensionMismatch(format!(
            "behavior is {}x{}, MDP is {}x{}",
            mu.n_states,
            mu.n_actions,
            m_star.n_states(),
            m_star.n_actions()
        )));
    }
    if let Some(noise) = &noise {
        noise.validate()?;
    }
    let na = m_star.n_actions();
    let pair_dist =
        WeightedIndex::new(&mu.weights).map_err(|e| Error::InvalidArgument(format!("behavior weights: {e}")))?;
    let next_dists = (0..m_star.n_states() * na)
        .map(|k| {
            WeightedIndex::new(m_star.transition_row(k / na, k % na))
                .map_err(|e| Error::InvalidArgument(format!("transition row {k}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = Vec::with_capacity(n);
    for _ in 0..n {
        let k = pair_dist.sample(&mut rng);
        let (s, a) = (k / na, k % na);
        let next_state = next_dists[k].sample(&mut rng);
        let mut reward = m_star.r(s, a);
        if let Some(RewardNoise::Uniform { half_width }) = noise {
            if half_width > 0.0 {
                reward = (reward + rng.gen_range(-half_width..=half_width)).clamp(0.0, 1.0);
            }
        }
        transitions.push(Transition {
            state: s,
            action: a,
            reward,
            next_state,
        });
    }
    Dataset::new(
        transitions,
        DatasetMeta {
            seed,
            n,
            behavior_id: mu.id.clone(),
            noise,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crafted::two_state_chain;
    use crate::math::{ln, powi, sqrt};
    use alloc::vec;

    #[test]
    fn single_pair_behavior() {
        let m = TabularMdp::new(1, 1, vec![1.0], vec![0.3], 0.9, vec![1.0]).unwrap();
        let b = behavior_from_policy(&m, &Policy::deterministic(vec![0], 1).unwrap()).unwrap();
        assert_eq!(b.weights(), &[1.0]);
    }

    #[test]
    fn symmetric_mdp_gives_symmetric_weights() {
        // Two states, two actions: action 0 stays, action 1 swaps. Uniform start.
        let p = vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let m = TabularMdp::new(2, 2, p, vec![0.5; 4], 0.9, vec![0.5, 0.5]).unwrap();
        let b = behavior_from_policy(&m, &Policy::uniform(2, 2)).unwrap();
        for w in b.weights() {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_occupancy_matches_enumeration() {
        let gamma = 0.9;
        let m = two_state_chain(gamma);
        let pi = Policy::deterministic(vec![1, 0], 2).unwrap();
        let b = behavior_from_policy(&m, &pi).unwrap();
        // Trajectory is s0 (go) then s1 (stay) forever: weight (1-g) at t=0, rest later.
        let mut oracle = [0.0; 4];
        for t in 0..500 {
            let w = (1.0 - gamma) * powi(gamma, t);
            if t == 0 {
                oracle[1] += w;
            } else {
                oracle[2] += w;
            }
        }
        for (w, o) in b.weights().iter().zip(oracle) {
            assert!((w - o).abs() < 1e-8, "{w} vs {o}");
        }
    }

    #[test]
    fn point_mass_deterministic_gives_identical_records() {
        let m = two_state_chain(0.9);
        let mu = BehaviorDistribution::new(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let d = sample_dataset(&m, &mu, 3, 42, None).unwrap();
        let expected = Transition {
            state: 0,
            action: 1,
            reward: 0.0,
            next_state: 1,
        };
        assert!(d.transitions().iter().all(|t| *t == expected));
    }

    #[test]
    fn sampling_is_reproducible_and_supported() {
        let inst = crate::crafted::two_state_family();
        let noise = Some(RewardNoise::Uniform { half_width: 0.1 });
        let a = sample_dataset(&inst.m_star, &inst.behavior, 500, 9, noise).unwrap();
        let b = sample_dataset(&inst.m_star, &inst.behavior, 500, 9, noise).unwrap();
        assert_eq!(a, b);
        for t in a.transitions() {
            assert!(inst.m_star.p(t.state, t.action, t.next_state) > 0.0);
            assert!((0.0..=1.0).contains(&t.reward));
        }
        let clean = sample_dataset(&inst.m_star, &inst.behavior, 500, 9, None).unwrap();
        for t in clean.transitions() {
            assert_eq!(t.reward, inst.m_star.r(t.state, t.action));
        }
    }

    #[test]
    fn empirical_frequencies_track_mu() {
        let inst = crate::crafted::two_state_family();
        let n = 10_000;
        let d = sample_dataset(&inst.m_star, &inst.behavior, n, 1234, None).unwrap();
        let mut counts = [0usize; 4];
        for t in d.transitions() {
            counts[t.state * 2 + t.action] += 1;
        }
        let bound = 4.0 * sqrt(ln(8.0) / (2.0 * n as f64));
        for (k, c) in counts.iter().enumerate() {
            let dev = (*c as f64 / n as f64 - inst.behavior.weights()[k]).abs();
            assert!(dev < bound, "pair {k}: deviation {dev} >= {bound}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = two_state_chain(0.9);
        let mu = BehaviorDistribution::uniform(2, 2);
        assert!(sample_dataset(&m, &mu, 0, 1, None).is_err());
        let bad = Some(RewardNoise::Uniform { half_width: -0.1 });
        assert!(sample_dataset(&m, &mu, 5, 1, bad).is_err());
        let wrong = BehaviorDistribution::uniform(3, 2);
        assert!(matches!(
            sample_dataset(&m, &wrong, 5, 1, None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn conditional_policy_falls_back_to_uniform() {
        let mu = BehaviorDistribution::new(2, 2, vec![0.25, 0.75, 0.0, 0.0]).unwrap();
        let pi = mu.conditional_policy();
        assert_eq!(pi.prob_rows(), vec![vec![0.25, 0.75], vec![0.5, 0.5]]);
    }
}
