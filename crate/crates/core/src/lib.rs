//! Exact relative-pessimism offline RL on finite MDPs with finite model classes.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation: policy evaluation by direct linear solves, i.i.d. dataset
//! sampling from a behavior occupancy, the likelihood-plus-squared-error
//! version space, the relative-pessimism max-min game over enumerated
//! deterministic policies (pure and certified mixed solvers), the
//! fixed-point machinery of that operator, and numerical checks of the
//! guarantees the method comes with.
//!
//! File formats, the command line harness and parallel sweeps live in the
//! companion `armor-lab` crate.
//!
//! ```
//! use armor_core::crafted;
//! use armor_core::maximin::{armor_policy, SolverMode};
//! use armor_core::data::sample_dataset;
//!
//! let inst = crafted::two_state_family();
//! let data = sample_dataset(&inst.m_star, &inst.behavior, 50, 3, None).unwrap();
//! let out = armor_policy(&inst.class, &data, 5.0, &inst.reference, SolverMode::Pure).unwrap();
//! assert!(out.result.value >= 0.0);
//! ```

#![no_std]

extern crate alloc;

pub mod crafted;
pub mod data;
mod error;
pub mod fixed_point;
pub mod instance;
mod math;
pub mod maximin;
pub mod mdp;
mod seed;
pub mod theory;
pub mod version_space;

pub use error::{Error, Result};
pub use seed::derive_seed;

/// Tolerance for probability-vector normalization checks.
pub const PROB_TOL: f64 = 1e-12;
