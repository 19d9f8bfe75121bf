//! Fixed points of the relative-pessimism operator.
//!
//! A policy `pi` is a fixed point when no policy improves on it under every
//! model of the version space at once, i.e. when
//! `max_pi' min_M [J_M(pi') - J_M(pi)]` is zero. Any policy that solves a
//! psi-shifted max-min `argmax_pi' min_{M in subset} J_M(pi') + psi(M)` over a
//! subset of the version space is one. All functions take a [`ReturnTable`]
//! whose columns are the version space.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::maximin::solver::solve_pure;
use crate::maximin::{ReturnTable, SolveResult, SolvedPolicy};
use crate::mdp::Policy;
use crate::{Error, Result};

/// Certificates at or below this are treated as zero.
pub const FIXED_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiKind {
    /// `psi = 0`: absolute pessimism.
    Zero,
    /// `psi(M) = -J_M(pi_ref)`: relative pessimism.
    NegReferenceReturn(Policy),
    /// `psi(M) = -J_M(pi*_M)`: worst-case regret minimization.
    NegOptimalReturn,
    /// Single model `M`: its optimal policy.
    Singleton(usize),
}

impl PsiKind {
    pub fn name(&self) -> &'static str {
        match self {
            PsiKind::Zero => "zero",
            PsiKind::NegReferenceReturn(_) => "neg_ref_return",
            PsiKind::NegOptimalReturn => "neg_optimal_return",
            PsiKind::Singleton(_) => "singleton",
        }
    }
}

/// A psi function together with the model subset it ranges over.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSpec {
    pub kind: PsiKind,
    /// Model ids, each in the version space.
    pub subset: Vec<usize>,
}

impl PsiSpec {
    pub fn new(kind: PsiKind, subset: Vec<usize>) -> Self {
        Self { kind, subset }
    }

    pub fn singleton(model_id: usize) -> Self {
        Self {
            kind: PsiKind::Singleton(model_id),
            subset: vec![model_id],
        }
    }

    fn validate(&self, table: &ReturnTable) -> Result<Vec<usize>> {
        if self.subset.is_empty() {
            return Err(Error::InvalidArgument("psi subset is empty".to_string()));
        }
        if let PsiKind::Singleton(id) = self.kind {
            if self.subset != [id] {
                return Err(Error::InvalidArgument(format!(
                    "singleton psi for model {id} must range over exactly that model"
                )));
            }
        }
        self.subset.iter().map(|&id| table.column_of(id)).collect()
    }
}

/// Pure solution of `argmax_pi min_{M in subset} J_M(pi) + psi(M)`.
pub fn psi_policy(table: &ReturnTable, spec: &PsiSpec) -> Result<SolveResult> {
    let cols = spec.validate(table)?;
    let shift: Vec<f64> = match &spec.kind {
        PsiKind::Zero | PsiKind::Singleton(_) => vec![0.0; cols.len()],
        PsiKind::NegReferenceReturn(reference) => {
            let all = table.returns_of(reference)?;
            cols.iter().map(|&c| -all[c]).collect()
        }
        PsiKind::NegOptimalReturn => cols.iter().map(|&c| -table.get(table.optimal_row(c), c)).collect(),
    };
    let payoff = table
        .shifted_payoff(&full_shift(table, &cols, &shift))?
        .select_columns(&cols)?;
    let s = solve_pure(&payoff);
    Ok(SolveResult {
        policy: SolvedPolicy::Pure(table.policies()[s.row].clone()),
        value: s.value,
        worst_model: table.model_ids()[cols[s.worst_col]],
        duality_gap: None,
        row: Some(s.row),
    })
}

fn full_shift(table: &ReturnTable, cols: &[usize], shift: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; table.n_models()];
    for (&c, &s) in cols.iter().zip(shift) {
        out[c] = s;
    }
    out
}

/// Joint argmax of `J_M(pi)` over policies and models.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticChoice {
    pub policy: Policy,
    pub row: usize,
    pub model_id: usize,
    pub value: f64,
}

/// Optimistic policy: first `(pi, M)` in row-major order with the largest return.
pub fn optimistic_policy(table: &ReturnTable) -> OptimisticChoice {
    let mut best = (0, 0, table.get(0, 0));
    for i in 0..table.n_policies() {
        for c in 0..table.n_models() {
            let v = table.get(i, c);
            if v > best.2 {
                best = (i, c, v);
            }
        }
    }
    OptimisticChoice {
        policy: table.policies()[best.0].clone(),
        row: best.0,
        model_id: table.model_ids()[best.1],
        value: best.2,
    }
}

/// Best worst-case improvement over `reference` across the whole table:
/// `max_pi min_M [J_M(pi) - J_M(pi_ref)]`. Zero exactly at fixed points.
pub fn improvement_certificate(reference: &Policy, table: &ReturnTable) -> Result<f64> {
    let game = table.game_matrix(reference)?;
    Ok(solve_pure(&game.payoff).value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointCheck {
    pub is_fixed_point: bool,
    pub certificate: f64,
}

pub fn is_fixed_point(pi: &Policy, table: &ReturnTable) -> Result<FixedPointCheck> {
    let certificate = improvement_certificate(pi, table)?;
    Ok(FixedPointCheck {
        is_fixed_point: certificate.abs() <= FIXED_POINT_TOL,
        certificate,
    })
}

/// Converse direction: with `psi(M) = -J_M(pi)` over the whole table, `pi`
/// attains the psi max-min value. Returns `(value of the psi game, pi's own
/// worst-case payoff)`.
pub fn converse_witness(pi: &Policy, table: &ReturnTable) -> Result<(f64, f64)> {
    let shift: Vec<f64> = table.returns_of(pi)?.iter().map(|j| -j).collect();
    let spec = PsiSpec::new(PsiKind::NegReferenceReturn(pi.clone()), table.model_ids().to_vec());
    let solved = psi_policy(table, &spec)?;
    let row = table
        .row_of(pi)
        .ok_or_else(|| Error::InvalidArgument("policy is not in the table".to_string()))?;
    let payoff = table.shifted_payoff(&shift)?;
    let own = payoff.row(row).iter().copied().fold(f64::INFINITY, f64::min);
    Ok((solved.value, own))
}
