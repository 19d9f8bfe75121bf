//! Finite discounted MDPs and exact policy evaluation.
//!
//! Every quantity here comes from a direct linear solve of the Bellman
//! system, so downstream comparisons carry only round-off error. Tables are
//! stored flat: transitions at `(s * n_actions + a) * n_states + s'`,
//! rewards and state-action tables at `s * n_actions + a`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math::abs;
use crate::{Error, Result, PROB_TOL};

pub(crate) fn check_distribution(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidDistribution {
            what: what.to_string(),
            reason: "empty vector".to_string(),
        });
    }
    let mut sum = 0.0;
    for (i, &p) in values.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution {
                what: what.to_string(),
                reason: format!("entry {i} is {p}"),
            });
        }
        sum += p;
    }
    if abs(sum - 1.0) > PROB_TOL {
        return Err(Error::InvalidDistribution {
            what: what.to_string(),
            reason: format!("sums to {sum}"),
        });
    }
    Ok(())
}

/// A finite MDP `<S, A, P, R, gamma>` with an initial-state distribution.
///
/// All fields are validated on construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    gamma: f64,
    initial_dist: Vec<f64>,
}

impl TabularMdp {
    /// Builds an MDP from flat tables (see the module docs for the layout).
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        gamma: f64,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidArgument(
                "an MDP needs at least one state and one action".to_string(),
            ));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch(format!(
                "transition table has {} entries, expected {}",
                transition.len(),
                n_states * n_actions * n_states
            )));
        }
        if reward.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "reward table has {} entries, expected {}",
                reward.len(),
                n_states * n_actions
            )));
        }
        if initial_dist.len() != n_states {
            return Err(Error::DimensionMismatch(format!(
                "initial distribution has {} entries, expected {n_states}",
                initial_dist.len()
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidDiscount(gamma));
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                let start = (s * n_actions + a) * n_states;
                check_distribution(
                    &transition[start..start + n_states],
                    &format!("transition row (s={s}, a={a})"),
                )?;
                let r = reward[s * n_actions + a];
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::RewardOutOfRange {
                        state: s,
                        action: a,
                        value: r,
                    });
                }
            }
        }
        check_distribution(&initial_dist, "initial distribution")?;
        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            gamma,
            initial_dist,
        })
    }

    /// Builds an MDP from nested tables `transition[s][a][s']` and `reward[s][a]`.
    pub fn from_nested(
        transition: &[Vec<Vec<f64>>],
        reward: &[Vec<f64>],
        gamma: f64,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        let n_states = transition.len();
        let n_actions = transition.first().map_or(0, Vec::len);
        let mut flat_p = Vec::with_capacity(n_states * n_actions * n_states);
        for (s, rows) in transition.iter().enumerate() {
            if rows.len() != n_actions {
                return Err(Error::DimensionMismatch(format!(
                    "state {s} has {} transition rows, expected {n_actions}",
                    rows.len()
                )));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != n_states {
                    return Err(Error::DimensionMismatch(format!(
                        "transition row (s={s}, a={a}) has {} entries, expected {n_states}",
                        row.len()
                    )));
                }
                flat_p.extend_from_slice(row);
            }
        }
        if reward.len() != n_states {
            return Err(Error::DimensionMismatch(format!(
                "reward table has {} states, expected {n_states}",
                reward.len()
            )));
        }
        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for (s, row) in reward.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::DimensionMismatch(format!(
                    "reward row {s} has {} entries, expected {n_actions}",
                    row.len()
                )));
            }
            flat_r.extend_from_slice(row);
        }
        Self::new(n_states, n_actions, flat_p, flat_r, gamma, initial_dist)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// Upper end of the value range, `1 / (1 - gamma)`.
    pub fn v_max(&self) -> f64 {
        1.0 / (1.0 - self.gamma)
    }

    #[inline]
    pub fn p(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s_next]
    }

    /// Next-state distribution `P(. | s, a)`.
    #[inline]
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    #[inline]
    pub fn r(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn transition_table(&self) -> &[f64] {
        &self.transition
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// Nested copy `[s][a][s']` of the transition table.
    pub fn transition_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n_states)
            .map(|s| {
                (0..self.n_actions)
                    .map(|a| self.transition_row(s, a).to_vec())
                    .collect()
            })
            .collect()
    }

    /// Nested copy `[s][a]` of the reward table.
    pub fn reward_nested(&self) -> Vec<Vec<f64>> {
        self.reward.chunks(self.n_actions).map(<[f64]>::to_vec).collect()
    }

    /// True when `other` shares states, actions, discount and initial distribution.
    pub fn same_frame(&self, other: &TabularMdp) -> bool {
        self.n_states == other.n_states
            && self.n_actions == other.n_actions
            && self.gamma == other.gamma
            && self.initial_dist == other.initial_dist
    }

    /// Returns a copy with every reward multiplied by `k`, `k` in `[0, 1]`.
    pub fn scale_rewards(&self, k: f64) -> Result<TabularMdp> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidArgument(format!("reward scale {k} must lie in [0, 1]")));
        }
        let mut out = self.clone();
        out.reward.iter_mut().for_each(|r| *r *= k);
        Ok(out)
    }

    fn check_policy(&self, pi: &Policy) -> Result<()> {
        if pi.n_states() != self.n_states || pi.n_actions() != self.n_actions {
            return Err(Error::DimensionMismatch(format!(
                "policy is {}x{}, MDP is {}x{}",
                pi.n_states(),
                pi.n_actions(),
                self.n_states,
                self.n_actions
            )));
        }
        Ok(())
    }
}

/// A tabular Markov policy, either deterministic or stochastic.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Deterministic {
        n_actions: usize,
        actions: Vec<usize>,
    },
    /// Row-major `probs[s * n_actions + a]`.
    Stochastic {
        n_actions: usize,
        probs: Vec<f64>,
    },
}

impl Policy {
    pub fn deterministic(actions: Vec<usize>, n_actions: usize) -> Result<Self> {
        if actions.is_empty() || n_actions == 0 {
            return Err(Error::InvalidArgument("empty policy".to_string()));
        }
        if let Some((s, &a)) = actions.iter().enumerate().find(|(_, &a)| a >= n_actions) {
            return Err(Error::IndexOutOfRange(format!(
                "policy picks action {a} at state {s}, only {n_actions} actions"
            )));
        }
        Ok(Policy::Deterministic { n_actions, actions })
    }

    pub fn stochastic(rows: &[Vec<f64>]) -> Result<Self> {
        let n_actions = rows.first().map_or(0, Vec::len);
        if n_actions == 0 {
            return Err(Error::InvalidArgument("empty policy".to_string()));
        }
        let mut probs = Vec::with_capacity(rows.len() * n_actions);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::DimensionMismatch(format!(
                    "policy row {s} has {} entries, expected {n_actions}",
                    row.len()
                )));
            }
            check_distribution(row, &format!("policy row {s}"))?;
            probs.extend_from_slice(row);
        }
        Ok(Policy::Stochastic { n_actions, probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy::Stochastic {
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic { actions, .. } => actions.len(),
            Policy::Stochastic { n_actions, probs } => probs.len() / n_actions,
        }
    }

    pub fn n_actions(&self) -> usize {
        match self {
            Policy::Deterministic { n_actions, .. } | Policy::Stochastic { n_actions, .. } => *n_actions,
        }
    }

    /// `pi(a | s)`.
    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        match self {
            Policy::Deterministic { actions, .. } => {
                if actions[s] == a {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Stochastic { n_actions, probs } => probs[s * n_actions + a],
        }
    }

    /// Action vector if every state puts all mass on one action.
    pub fn actions(&self) -> Option<Vec<usize>> {
        match self {
            Policy::Deterministic { actions, .. } => Some(actions.clone()),
            Policy::Stochastic { n_actions, probs } => probs
                .chunks(*n_actions)
                .map(|row| row.iter().position(|&p| p == 1.0))
                .collect(),
        }
    }

    /// Canonical deterministic form, if the policy is deterministic.
    pub fn to_deterministic(&self) -> Option<Policy> {
        self.actions().map(|actions| Policy::Deterministic {
            n_actions: self.n_actions(),
            actions,
        })
    }

    pub fn is_deterministic(&self) -> bool {
        self.actions().is_some()
    }

    /// Dense `[s][a]` probability rows.
    pub fn prob_rows(&self) -> Vec<Vec<f64>> {
        let na = self.n_actions();
        (0..self.n_states())
            .map(|s| (0..na).map(|a| self.prob(s, a)).collect())
            .collect()
    }
}

/// Episode-level mixture: one atom is drawn at the start and followed throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPolicy {
    atoms: Vec<Policy>,
    weights: Vec<f64>,
}

impl MixedPolicy {
    pub fn new(atoms: Vec<Policy>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("mixture without atoms".to_string()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        check_distribution(&weights, "mixture weights")?;
        let (ns, na) = (atoms[0].n_states(), atoms[0].n_actions());
        if atoms
            .iter()
            .any(|p| p.n_states() != ns || p.n_actions() != na || !p.is_deterministic())
        {
            return Err(Error::DimensionMismatch(
                "mixture atoms must be deterministic policies of a common shape".to_string(),
            ));
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[Policy] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Exact evaluation of one policy on one MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueReport {
    pub n_actions: usize,
    /// `V(s)`.
    pub v: Vec<f64>,
    /// `Q(s, a)`, flat.
    pub q: Vec<f64>,
    /// `J = sum_s rho(s) V(s)`.
    pub j: f64,
    /// Normalized discounted occupancy `d(s, a)`, flat.
    pub occupancy: Vec<f64>,
}

impl ValueReport {
    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn occupancy(&self, s: usize, a: usize) -> f64 {
        self.occupancy[s * self.n_actions + a]
    }
}

/// `I - gamma * P_pi` and `R_pi`.
fn policy_system(m: &TabularMdp, pi: &Policy) -> (DMatrix<f64>, DVector<f64>) {
    let (ns, na) = (m.n_states, m.n_actions);
    let mut lhs = DMatrix::<f64>::identity(ns, ns);
    let mut r_pi = DVector::<f64>::zeros(ns);
    for s in 0..ns {
        for a in 0..na {
            let w = pi.prob(s, a);
            if w == 0.0 {
                continue;
            }
            r_pi[s] += w * m.r(s, a);
            for (s2, &p) in m.transition_row(s, a).iter().enumerate() {
                lhs[(s, s2)] -= m.gamma * w * p;
            }
        }
    }
    (lhs, r_pi)
}

fn solve(lhs: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    lhs.lu().solve(rhs).ok_or(Error::Singular)
}

/// State values `V^pi` from one direct solve.
pub fn state_values(m: &TabularMdp, pi: &Policy) -> Result<Vec<f64>> {
    m.check_policy(pi)?;
    let (lhs, r_pi) = policy_system(m, pi);
    Ok(solve(lhs, &r_pi)?.iter().copied().collect())
}

/// Expected discounted return `J_M(pi)` (value solve only, no occupancy).
pub fn policy_return(m: &TabularMdp, pi: &Policy) -> Result<f64> {
    let v = state_values(m, pi)?;
    Ok(m.initial_dist.iter().zip(&v).map(|(r, v)| r * v).sum())
}

/// Full evaluation: values, Q-values, return and discounted occupancy.
pub fn evaluate(m: &TabularMdp, pi: &Policy) -> Result<ValueReport> {
    m.check_policy(pi)?;
    let (ns, na) = (m.n_states, m.n_actions);
    let (lhs, r_pi) = policy_system(m, pi);
    let v = solve(lhs.clone(), &r_pi)?;

    // (I - gamma P_pi^T) d_S = (1 - gamma) rho
    let rho = DVector::from_iterator(ns, m.initial_dist.iter().map(|&p| (1.0 - m.gamma) * p));
    let d_state = solve(lhs.transpose(), &rho)?;

    let mut q = vec![0.0; ns * na];
    let mut occupancy = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            let next: f64 = m.transition_row(s, a).iter().zip(v.iter()).map(|(p, v)| p * v).sum();
            q[s * na + a] = m.r(s, a) + m.gamma * next;
            occupancy[s * na + a] = d_state[s] * pi.prob(s, a);
        }
    }
    let j = m.initial_dist.iter().zip(v.iter()).map(|(r, v)| r * v).sum();
    Ok(ValueReport {
        n_actions: na,
        v: v.iter().copied().collect(),
        q,
        j,
        occupancy,
    })
}

/// Return of an episode-level mixture: the weighted average of atom returns.
pub fn evaluate_mixed(m: &TabularMdp, mix: &MixedPolicy) -> Result<f64> {
    mix.atoms
        .iter()
        .zip(&mix.weights)
        .try_fold(0.0, |acc, (pi, w)| Ok(acc + w * policy_return(m, pi)?))
}

/// Total variation distance `(1/2) sum |p_i - q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution(p, "first argument")?;
    check_distribution(q, "second argument")?;
    Ok(tv_unchecked(p, q))
}

#[inline]
pub(crate) fn tv_unchecked(p: &[f64], q: &[f64]) -> f64 {
    // Validated distributions; clamp away round-off above 1.
    (0.5 * p.iter().zip(q).map(|(a, b)| abs(a - b)).sum::<f64>()).min(1.0)
}

/// Both sides of the simulation-lemma inequality for one policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationGap {
    /// `|J_M(pi) - J_M'(pi)|`.
    pub lhs: f64,
    /// Bound with the occupancy taken under the first model.
    pub rhs: f64,
    /// Bound with the occupancy under the second model; computed only when
    /// the first reading fails.
    pub rhs_under_second: Option<f64>,
}

impl SimulationGap {
    pub const TOL: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + Self::TOL
    }
}

fn simulation_rhs(occ_model: &TabularMdp, other: &TabularMdp, occupancy: &[f64]) -> f64 {
    let na = occ_model.n_actions;
    let one_minus = 1.0 - occ_model.gamma;
    let (mut tv_term, mut r_term) = (0.0, 0.0);
    for s in 0..occ_model.n_states {
        for a in 0..na {
            let d = occupancy[s * na + a];
            if d == 0.0 {
                continue;
            }
            tv_term += d * tv_unchecked(occ_model.transition_row(s, a), other.transition_row(s, a));
            r_term += d * abs(occ_model.r(s, a) - other.r(s, a));
        }
    }
    occ_model.v_max() / one_minus * tv_term + r_term / one_minus
}

/// Return gap of `pi` between two models against the simulation-lemma bound.
pub fn simulation_gap_bound(m: &TabularMdp, m2: &TabularMdp, pi: &Policy) -> Result<SimulationGap> {
    if !m.same_frame(m2) {
        return Err(Error::DimensionMismatch(
            "models must share states, actions, discount and initial distribution".to_string(),
        ));
    }
    let first = evaluate(m, pi)?;
    let j2 = policy_return(m2, pi)?;
    let lhs = abs(first.j - j2);
    let rhs = simulation_rhs(m, m2, &first.occupancy);
    let mut gap = SimulationGap {
        lhs,
        rhs,
        rhs_under_second: None,
    };
    if !gap.holds() {
        let second = evaluate(m2, pi)?;
        gap.rhs_under_second = Some(simulation_rhs(m2, m, &second.occupancy));
    }
    Ok(gap)
}

/// Maximum Bellman residual `|V - (R_pi + gamma P_pi V)|` of a value vector.
pub fn bellman_residual(m: &TabularMdp, pi: &Policy, v: &[f64]) -> f64 {
    let (ns, na) = (m.n_states, m.n_actions);
    (0..ns)
        .map(|s| {
            let backup: f64 = (0..na)
                .map(|a| {
                    let next: f64 = m.transition_row(s, a).iter().zip(v).map(|(p, v)| p * v).sum();
                    pi.prob(s, a) * (m.r(s, a) + m.gamma * next)
                })
                .sum();
            abs(v[s] - backup)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crafted::two_state_chain;

    fn one_state(r: f64, gamma: f64) -> TabularMdp {
        TabularMdp::new(1, 1, vec![1.0], vec![r], gamma, vec![1.0]).unwrap()
    }

    /// Horizon-truncated value iteration; the independent oracle for `evaluate`.
    fn truncated_values(m: &TabularMdp, pi: &Policy, horizon: usize) -> Vec<f64> {
        let mut v = vec![0.0; m.n_states()];
        for _ in 0..horizon {
            v = (0..m.n_states())
                .map(|s| {
                    (0..m.n_actions())
                        .map(|a| {
                            let next: f64 = m.transition_row(s, a).iter().zip(&v).map(|(p, v)| p * v).sum();
                            pi.prob(s, a) * (m.r(s, a) + m.gamma() * next)
                        })
                        .sum()
                })
                .collect();
        }
        v
    }

    #[test]
    fn single_state_geometric_series() {
        let m = one_state(1.0, 0.5);
        let pi = Policy::deterministic(vec![0], 1).unwrap();
        let rep = evaluate(&m, &pi).unwrap();
        assert!((rep.j - 2.0).abs() < 1e-12);
        assert!((rep.occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_state_chain_matches_truncated_rollout() {
        let m = two_state_chain(0.9);
        let pi = Policy::deterministic(vec![1, 0], 2).unwrap();
        let rep = evaluate(&m, &pi).unwrap();
        let oracle = truncated_values(&m, &pi, 500);
        let j_oracle: f64 = m.initial_dist().iter().zip(&oracle).map(|(r, v)| r * v).sum();
        assert!((rep.j - j_oracle).abs() < 1e-8);
        assert!((rep.j - 9.0).abs() < 1e-10);
        assert!(bellman_residual(&m, &pi, &rep.v) < 1e-10);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            TabularMdp::new(1, 1, vec![0.9], vec![0.0], 0.5, vec![1.0]),
            Err(Error::InvalidDistribution { .. })
        ));
        assert!(matches!(
            TabularMdp::new(1, 1, vec![1.0], vec![1.5], 0.5, vec![1.0]),
            Err(Error::RewardOutOfRange { .. })
        ));
        assert!(matches!(
            TabularMdp::new(1, 1, vec![1.0], vec![0.5], 1.0, vec![1.0]),
            Err(Error::InvalidDiscount(_))
        ));
        assert!(matches!(
            TabularMdp::new(1, 1, vec![1.0, 0.0], vec![0.5], 0.5, vec![1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dimension_mismatch_on_evaluate() {
        let m = one_state(1.0, 0.5);
        let pi = Policy::deterministic(vec![0, 0], 1).unwrap();
        assert!(matches!(evaluate(&m, &pi), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mixture_is_linear() {
        let m = two_state_chain(0.9);
        let a = Policy::deterministic(vec![1, 0], 2).unwrap();
        let b = Policy::deterministic(vec![0, 0], 2).unwrap();
        let ja = policy_return(&m, &a).unwrap();
        let jb = policy_return(&m, &b).unwrap();
        let single = MixedPolicy::new(vec![a.clone()], vec![1.0]).unwrap();
        assert_eq!(evaluate_mixed(&m, &single).unwrap(), ja);
        let half = MixedPolicy::new(vec![a, b], vec![0.5, 0.5]).unwrap();
        assert!((evaluate_mixed(&m, &half).unwrap() - (ja + jb) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_rejects_stochastic_atoms() {
        let err = MixedPolicy::new(vec![Policy::uniform(2, 2)], vec![1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((tv_distance(&[0.7, 0.3], &[0.4, 0.6]).unwrap() - 0.3).abs() < 1e-15);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
        assert!(tv_distance(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn simulation_gap_identical_models() {
        let m = two_state_chain(0.9);
        let pi = Policy::uniform(2, 2);
        let g = simulation_gap_bound(&m, &m, &pi).unwrap();
        assert_eq!(g.lhs, 0.0);
        assert_eq!(g.rhs, 0.0);
    }

    #[test]
    fn simulation_gap_reward_shift() {
        let m = two_state_chain(0.8);
        let eps = 0.05;
        let shifted = TabularMdp::new(
            2,
            2,
            m.transition_table().to_vec(),
            m.reward_table().iter().map(|r| (r * 0.9 + eps).min(1.0)).collect(),
            0.8,
            m.initial_dist().to_vec(),
        )
        .unwrap();
        let pi = Policy::deterministic(vec![1, 0], 2).unwrap();
        let g = simulation_gap_bound(&m, &shifted, &pi).unwrap();
        assert!(g.holds());
        assert!(g.rhs_under_second.is_none());
        // Uniform shift by exactly eps.
        let plus = TabularMdp::new(1, 1, vec![1.0], vec![0.5 + eps], 0.8, vec![1.0]).unwrap();
        let base = one_state(0.5, 0.8);
        let pi1 = Policy::deterministic(vec![0], 1).unwrap();
        let g = simulation_gap_bound(&base, &plus, &pi1).unwrap();
        assert!((g.lhs - eps / 0.2).abs() < 1e-12);
        assert!((g.rhs - eps / 0.2).abs() < 1e-12);
    }

    #[test]
    fn stochastic_one_hot_is_deterministic() {
        let p = Policy::stochastic(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            p.to_deterministic(),
            Some(Policy::deterministic(vec![1, 0], 2).unwrap())
        );
        assert!(!Policy::uniform(2, 2).is_deterministic());
    }
}
