//! File formats, experiment configuration and sweeps on top of `armor-core`.
//!
//! The `armor-lab` binary exposes these as the verbs `gen-instance`,
//! `gen-data`, `vspace`, `solve`, `fixedpoint`, `verify` and `sweep`.

pub mod config;
pub mod error;
pub mod formats;
pub mod plot;
pub mod sweep;

pub use error::{LabError, Result};
