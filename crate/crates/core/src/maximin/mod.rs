//! The relative-pessimism game: policies against version-space models.
//!
//! `Pi` is realized as every deterministic tabular policy. A [`ReturnTable`]
//! holds `J_M(pi)` for each enumerated policy and each model exactly once;
//! game matrices, psi-shifted games and certificates are all read from it.
//! Ties are broken lexicographically (first row, first column).

pub mod solver;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::mdp::{policy_return, MixedPolicy, Policy, TabularMdp};
use crate::version_space::{build_version_space, ModelClass, VersionSpace};
use crate::{Error, Result};

pub use solver::{solve_mixed, solve_pure, MixedSolution, Payoff, PureSolution};

/// Default bound on `n_actions ^ n_states`.
pub const DEFAULT_POLICY_CAP: usize = 1_000_000;

/// All deterministic policies, state 0 the most significant digit.
pub fn enumerate_policies(n_states: usize, n_actions: usize, cap: usize) -> Result<Vec<Policy>> {
    if n_states == 0 || n_actions == 0 {
        return Err(Error::InvalidArgument(
            "cannot enumerate policies without states or actions".to_string(),
        ));
    }
    let count = u32::try_from(n_states)
        .ok()
        .and_then(|e| n_actions.checked_pow(e))
        .filter(|&c| c <= cap)
        .ok_or_else(|| Error::EnumerationCap {
            needed: format!("{n_actions}^{n_states}"),
            cap,
        })?;
    let mut out = Vec::with_capacity(count);
    let mut digits = alloc::vec![0usize; n_states];
    for _ in 0..count {
        out.push(Policy::Deterministic {
            n_actions,
            actions: digits.clone(),
        });
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < n_actions {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// Exact returns of a policy list under a model list.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTable {
    models: Vec<TabularMdp>,
    model_ids: Vec<usize>,
    policies: Vec<Policy>,
    /// Row-major: policy x model.
    returns: Vec<f64>,
}

impl ReturnTable {
    pub fn new(models: Vec<TabularMdp>, model_ids: Vec<usize>, policies: Vec<Policy>) -> Result<Self> {
        if models.is_empty() || policies.is_empty() {
            return Err(Error::InvalidArgument(
                "return table needs at least one model and one policy".to_string(),
            ));
        }
        if models.len() != model_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} models but {} model ids",
                models.len(),
                model_ids.len()
            )));
        }
        let mut returns = Vec::with_capacity(models.len() * policies.len());
        for pi in &policies {
            for m in &models {
                returns.push(policy_return(m, pi)?);
            }
        }
        Ok(Self {
            models,
            model_ids,
            policies,
            returns,
        })
    }

    /// Table over every model of a class and every deterministic policy.
    pub fn for_class(class: &ModelClass) -> Result<Self> {
        let m0 = class.model(0);
        let policies = enumerate_policies(m0.n_states(), m0.n_actions(), DEFAULT_POLICY_CAP)?;
        Self::new(class.models().to_vec(), (0..class.len()).collect(), policies)
    }

    /// Table over the members of a version space.
    pub fn for_version_space(class: &ModelClass, vs: &VersionSpace) -> Result<Self> {
        let m0 = class.model(0);
        let policies = enumerate_policies(m0.n_states(), m0.n_actions(), DEFAULT_POLICY_CAP)?;
        Self::new(vs.member_models(class), vs.members.clone(), policies)
    }

    /// Sub-table keeping the columns whose model id is listed, in the given order.
    pub fn restrict(&self, ids: &[usize]) -> Result<ReturnTable> {
        let cols = ids.iter().map(|id| self.column_of(*id)).collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Err(Error::InvalidArgument("empty model subset".to_string()));
        }
        let returns = (0..self.policies.len())
            .flat_map(|i| cols.iter().map(move |&c| self.get(i, c)))
            .collect();
        Ok(ReturnTable {
            models: cols.iter().map(|&c| self.models[c].clone()).collect(),
            model_ids: ids.to_vec(),
            policies: self.policies.clone(),
            returns,
        })
    }

    pub fn n_policies(&self) -> usize {
        self.policies.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn models(&self) -> &[TabularMdp] {
        &self.models
    }

    pub fn model_ids(&self) -> &[usize] {
        &self.model_ids
    }

    /// `J` of policy row `i` under model column `c`.
    #[inline]
    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.returns[i * self.models.len() + c]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.models.len();
        &self.returns[i * k..(i + 1) * k]
    }

    pub fn column_of(&self, model_id: usize) -> Result<usize> {
        self.model_ids
            .iter()
            .position(|&id| id == model_id)
            .ok_or_else(|| Error::IndexOutOfRange(format!("model {model_id} is not in the table")))
    }

    pub fn row_of(&self, pi: &Policy) -> Option<usize> {
        let canon = pi.to_deterministic()?;
        self.policies.iter().position(|p| *p == canon)
    }

    /// Per-model returns of any policy; rows already in the table are reused.
    pub fn returns_of(&self, pi: &Policy) -> Result<Vec<f64>> {
        if let Some(i) = self.row_of(pi) {
            return Ok(self.row(i).to_vec());
        }
        self.models.iter().map(|m| policy_return(m, pi)).collect()
    }

    /// Lexicographically first optimal enumerated policy of model column `c`.
    pub fn optimal_row(&self, c: usize) -> usize {
        let col: Vec<f64> = (0..self.n_policies()).map(|i| self.get(i, c)).collect();
        solver::first_argmax(&col).0
    }

    /// Payoff `J_M(pi) + shift(M)` over all rows.
    pub fn shifted_payoff(&self, shift: &[f64]) -> Result<Payoff> {
        if shift.len() != self.n_models() {
            return Err(Error::DimensionMismatch(format!(
                "{} shifts for {} models",
                shift.len(),
                self.n_models()
            )));
        }
        let data = self
            .returns
            .chunks(self.n_models())
            .flat_map(|row| row.iter().zip(shift).map(|(j, s)| j + s))
            .collect();
        Payoff::new(self.n_policies(), self.n_models(), data)
    }

    /// Relative-pessimism game against `reference`.
    pub fn game_matrix(&self, reference: &Policy) -> Result<GameMatrix> {
        let reference_returns = self.returns_of(reference)?;
        let neg: Vec<f64> = reference_returns.iter().map(|j| -j).collect();
        Ok(GameMatrix {
            payoff: self.shifted_payoff(&neg)?,
            policies: self.policies.clone(),
            model_ids: self.model_ids.clone(),
            reference_returns,
        })
    }
}

/// Payoff `J_M(pi) - J_M(pi_ref)`; rows are policies, columns models.
#[derive(Debug, Clone, PartialEq)]
pub struct GameMatrix {
    pub payoff: Payoff,
    pub policies: Vec<Policy>,
    pub model_ids: Vec<usize>,
    pub reference_returns: Vec<f64>,
}

/// Game matrix for explicit models (ids `0..k`) and policies.
pub fn build_game_matrix(models: &[TabularMdp], policies: &[Policy], reference: &Policy) -> Result<GameMatrix> {
    ReturnTable::new(models.to_vec(), (0..models.len()).collect(), policies.to_vec())?.game_matrix(reference)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolvedPolicy {
    Pure(Policy),
    Mixed(MixedPolicy),
}

impl SolvedPolicy {
    /// Exact return of the solved policy on `m`.
    pub fn return_on(&self, m: &TabularMdp) -> Result<f64> {
        match self {
            SolvedPolicy::Pure(p) => policy_return(m, p),
            SolvedPolicy::Mixed(mix) => crate::mdp::evaluate_mixed(m, mix),
        }
    }

    pub fn as_pure(&self) -> Option<&Policy> {
        match self {
            SolvedPolicy::Pure(p) => Some(p),
            SolvedPolicy::Mixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub policy: SolvedPolicy,
    /// Worst-column payoff of the returned policy.
    pub value: f64,
    /// Model id attaining the inner minimum.
    pub worst_model: usize,
    /// Certified gap, mixed solver only.
    pub duality_gap: Option<f64>,
    /// Row index for pure solutions.
    pub row: Option<usize>,
}

pub fn solve_maximin_pure(g: &GameMatrix) -> SolveResult {
    let s = solve_pure(&g.payoff);
    SolveResult {
        policy: SolvedPolicy::Pure(g.policies[s.row].clone()),
        value: s.value,
        worst_model: g.model_ids[s.worst_col],
        duality_gap: None,
        row: Some(s.row),
    }
}

pub fn solve_maximin_mixed(g: &GameMatrix, eps: f64) -> Result<SolveResult> {
    let s = solve_mixed(&g.payoff, eps)?;
    let (atoms, weights): (Vec<Policy>, Vec<f64>) = s
        .row_weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| (g.policies[i].clone(), *w))
        .unzip();
    // Support weights were normalized over the full row set; renormalize
    // away the dropped zeros' round-off.
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Ok(SolveResult {
        policy: SolvedPolicy::Mixed(MixedPolicy::new(atoms, weights)?),
        value: s.lower,
        worst_model: g.model_ids[s.worst_col],
        duality_gap: Some(s.gap),
        row: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMode {
    Pure,
    Mixed { eps: f64 },
}

impl SolverMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMode::Pure => "pure",
            SolverMode::Mixed { .. } => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmorOutcome {
    pub result: SolveResult,
    pub version_space: VersionSpace,
    pub game: GameMatrix,
}

impl ArmorOutcome {
    pub fn summary(&self) -> String {
        format!(
            "value={} worst_model={} members={:?}",
            self.result.value, self.result.worst_model, self.version_space.members
        )
    }
}

/// Relative-pessimism solve on a precomputed version-space table.
pub fn armor_on_table(table: &ReturnTable, reference: &Policy, mode: SolverMode) -> Result<(SolveResult, GameMatrix)> {
    let game = table.game_matrix(reference)?;
    let result = match mode {
        SolverMode::Pure => solve_maximin_pure(&game),
        SolverMode::Mixed { eps } => solve_maximin_mixed(&game, eps)?,
    };
    Ok((result, game))
}

/// Version space, then `argmax_pi min_{M in M_alpha} J_M(pi) - J_M(pi_ref)`.
pub fn armor_policy(
    class: &ModelClass,
    d: &Dataset,
    alpha: f64,
    reference: &Policy,
    mode: SolverMode,
) -> Result<ArmorOutcome> {
    let version_space = build_version_space(class, d, alpha)?;
    let table = ReturnTable::for_version_space(class, &version_space)?;
    let (result, game) = armor_on_table(&table, reference, mode)?;
    Ok(ArmorOutcome {
        result,
        version_space,
        game,
    })
}
