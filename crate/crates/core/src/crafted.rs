//! Hand-built instances used by tests, the acceptance suite and the CLI.

use alloc::vec;

use crate::data::{behavior_from_policy, BehaviorDistribution};
use crate::mdp::{Policy, TabularMdp};
use crate::theory::Instance;
use crate::version_space::ModelClass;

/// Action indices of the two-state chain.
pub const STAY: usize = 0;
pub const GO: usize = 1;

/// Deterministic two-state chain starting in `s0`: `go` moves `s0 -> s1` and
/// `s1 -> s0`, `stay` keeps the state; only staying in `s1` pays 1.
pub fn two_state_chain(gamma: f64) -> TabularMdp {
    TabularMdp::from_nested(
        &[
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ],
        &[vec![0.0, 0.0], vec![1.0, 0.0]],
        gamma,
        vec![1.0, 0.0],
    )
    .expect("valid chain")
}

fn stochastic_chain(go_success: f64, keep1: f64, r_stay0: f64, r_go0: f64, r_stay1: f64, r_go1: f64) -> TabularMdp {
    TabularMdp::from_nested(
        &[
            vec![vec![1.0, 0.0], vec![1.0 - go_success, go_success]],
            vec![vec![1.0 - keep1, keep1], vec![1.0, 0.0]],
        ],
        &[vec![r_stay0, r_go0], vec![r_stay1, r_go1]],
        0.9,
        vec![1.0, 0.0],
    )
    .expect("valid stochastic chain")
}

/// Noisy two-state chain with a five-model class around it.
///
/// The truth sits at index 2. The behavior policy mostly stays in `s0`, so
/// `go` is rarely observed and small datasets cannot rule out the model in
/// which going rarely succeeds. The reference policy always stays; the
/// comparator is the optimum of the truth (go, then stay).
pub fn two_state_family() -> Instance {
    let truth = stochastic_chain(0.6, 0.9, 0.3, 0.0, 0.8, 0.1);
    let models = vec![
        // go almost never succeeds
        stochastic_chain(0.1, 0.9, 0.3, 0.0, 0.8, 0.1),
        // staying in s1 pays little
        stochastic_chain(0.6, 0.9, 0.3, 0.0, 0.25, 0.1),
        truth.clone(),
        // s1 is hard to keep
        stochastic_chain(0.6, 0.5, 0.3, 0.0, 0.8, 0.1),
        // go always succeeds
        stochastic_chain(0.95, 0.9, 0.3, 0.0, 0.8, 0.1),
    ];
    let class = ModelClass::new(models, Some(2)).expect("valid class");
    let behavior_policy = Policy::stochastic(&[vec![0.85, 0.15], vec![0.5, 0.5]]).expect("valid behavior policy");
    let behavior = behavior_from_policy(&truth, &behavior_policy)
        .expect("behavior occupancy")
        .with_id("two_state_mostly_stay");
    Instance::new(
        truth,
        class,
        behavior,
        Policy::deterministic(vec![STAY, STAY], 2).expect("valid reference"),
        Some(Policy::deterministic(vec![GO, STAY], 2).expect("valid comparator")),
        0,
    )
    .expect("valid two-state instance")
}

fn bandit(rewards: [f64; 3]) -> TabularMdp {
    TabularMdp::new(1, 3, vec![1.0; 3], rewards.to_vec(), 0.5, vec![1.0]).expect("valid bandit")
}

/// Single-state, three-action instance where the data only ever shows the
/// safe action 0, on which both models agree. Worst-case return picks action
/// 0; worst-case regret picks action 1.
pub fn separation_instance() -> Instance {
    let truth = bandit([0.4, 1.0, 0.3]);
    let other = bandit([0.4, 0.3, 0.35]);
    let class = ModelClass::new(vec![truth.clone(), other], Some(0)).expect("valid class");
    let behavior = BehaviorDistribution::new(1, 3, vec![1.0, 0.0, 0.0])
        .expect("valid behavior")
        .with_id("safe_action_only");
    Instance::new(
        truth,
        class,
        behavior,
        Policy::deterministic(vec![0], 3).expect("valid reference"),
        Some(Policy::deterministic(vec![1], 3).expect("valid comparator")),
        0,
    )
    .expect("valid separation instance")
}

/// Two-armed instance where the only non-true model swaps the arm rewards.
/// Without the truth in the version space, relative pessimism learns the
/// worse arm.
pub fn rpi_counterexample() -> Instance {
    let truth = TabularMdp::new(1, 2, vec![1.0, 1.0], vec![0.8, 0.2], 0.5, vec![1.0]).expect("valid");
    let swapped = TabularMdp::new(1, 2, vec![1.0, 1.0], vec![0.2, 0.8], 0.5, vec![1.0]).expect("valid");
    let class = ModelClass::new(vec![truth.clone(), swapped], Some(0)).expect("valid class");
    Instance::new(
        truth,
        class,
        BehaviorDistribution::uniform(1, 2),
        Policy::deterministic(vec![0], 2).expect("valid reference"),
        None,
        0,
    )
    .expect("valid counterexample")
}
