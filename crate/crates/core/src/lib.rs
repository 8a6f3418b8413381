//! Simulation, estimation and verification toolkit for the multitask
//! principal-agent problem under moral hazard.
//!
//! The principal posts a linear contract `β`, an agent with a private
//! homogeneous cost best responds with a hidden effort `a`, and the principal
//! only sees noisy signals of `a` together with a noisy benefit whose mean is
//! `⟨θ*, a⟩`. The crate covers:
//!
//! * [`model`]: homogeneous diagonal costs, best responses and the closed-form
//!   optimal contract `β* = θ*/k`.
//! * [`environment`]: a seeded simulator of the interaction protocol with
//!   oracle-side regret accounting.
//! * [`estimators`]: instrumental-variable GMM estimators (contract as
//!   instrument, repeated signal as instrument) and an attenuated OLS baseline.
//! * [`online`]: explore-then-commit, pure exploration and epoch-based greedy
//!   learning.
//! * [`robust`]: upper-hull geometry of tabular contracts on `{0,1}^d`,
//!   self-owned hyperplanes and a worst-case payoff oracle.
//! * [`harness`]: deterministic experiment presets, CSV output and summaries.

pub mod environment;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod model;
pub mod online;
pub mod rng;
pub mod robust;

pub use error::{Error, Result};
