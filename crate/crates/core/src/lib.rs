//! Maximum-likelihood MIMO detection for binary constellations, under one-bit
//! quantized or unquantized (classical) observations.
//!
//! The detector family is built around a penalty-continuation (homotopy)
//! strategy: the ML objective is relaxed to the box `[-1,1]^N` with a negative
//! square penalty `-lambda * ||x||^2`, and the penalty weight is grown across
//! outer iterations while an accelerated projected-gradient inner solver
//! (GEMM) is warm-started from the previous solution. A deep-unfolded variant
//! (DeepHOTML) unties the per-iteration coefficients into learned per-layer
//! parameters and trains them with ADAM on streamed synthetic scenes.
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation given
//! an explicit random stream. IO, the CLI and the Monte-Carlo benchmarking
//! harness live in the companion `hotml-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub use num_complex;

pub mod baselines;
pub mod linalg;
pub mod model;
pub mod numerics;
pub mod objective;
pub mod rng;
pub mod solver;
pub mod unfolded;

pub use model::{ChannelKind, ChannelSpec, DetectionInstance, DetectionMode};
pub use numerics::OpCounter;
pub use objective::{build_context, lipschitz_bound, ObjectiveContext};
pub use solver::SolverConfig;
