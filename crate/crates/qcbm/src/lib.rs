//! Training circuit Born machines against f-divergence objectives.
//!
//! A Born machine prepares a state |Ψ(θ)⟩ with a layered parameterised
//! circuit and samples bitstrings x with probability q_θ(x) = |⟨x|Ψ(θ)⟩|².
//! This crate trains such models to match a target distribution p by
//! descending an f-divergence D_f(p‖q_θ), with the divergence and its
//! gradient expressed through density ratios q_θ(x)/p(x) so that only
//! samples and a ratio estimator are needed.
//!
//! Module map:
//!
//! * [`sim`] — dense statevector simulation of the layered ansatz, Born
//!   distributions, sampling, and the exact ±π/4 parameter-shift rule.
//! * [`dist`] — discrete distributions over fixed-width bitstrings:
//!   marginals over qubit windows, empirical counts, discretised Gaussians.
//! * [`fdiv`] — the divergence registry: each entry evaluates its value two
//!   independent ways (ratio form and direct sum) and exposes the derivative
//!   used inside gradient expectations.
//! * [`classifier`] — density-ratio estimators: the exact posterior
//!   classifier and a small trained feed-forward classifier.
//! * [`train`] — gradient estimators (single generator, per-direction
//!   generator switching, window-local costs), the training loop, and
//!   bootstrap summaries over seed sweeps.
//! * [`ftq`] — classical, query-counted simulations of amplitude-estimation
//!   based divergence estimators with their error/success contracts.
//!
//! Conventions used throughout: qubit 0 is the most significant bit of an
//! outcome index, logarithms are natural, and all randomness flows through
//! caller-seeded ChaCha8 generators so every run is reproducible.

pub mod classifier;
pub mod dist;
pub mod error;
pub mod fdiv;
pub mod ftq;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
