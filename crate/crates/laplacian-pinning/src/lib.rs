//! Numerics for a (1+1)-dimensional polymer pinning model with Laplacian
//! (bending) interaction in a Gaussian random environment.
//!
//! The model lives on a discrete segment: a field `φ_0..φ_n` with double-zero
//! boundary conditions, bending energy `b_m (Δφ_m)²/2` on every second
//! difference `Δφ_m = φ_{m+1} − 2φ_m + φ_{m−1}`, random bond stiffnesses
//! `b_m = exp(β ω_m)`, and a pinning reward `ε` collected at every interior
//! site where the field touches zero.  Everything the crate computes reduces
//! to weighted Gaussian integrals over contact configurations, which is why
//! determinants of small-bandwidth stiffness matrices show up everywhere.
//!
//! The crate is organised around that pipeline:
//!
//! - [`model`]: parameters, disorder sampling (counter-based, reproducible
//!   under any parallel schedule), and the smoothed single-bond potential of
//!   the disorder-averaged model.
//! - [`detkit`]: pentadiagonal stiffness matrices, their determinants
//!   (closed form, banded LDLᵀ, split recursion), and structure checks.
//! - [`partition`]: exact finite-volume partition functions by contact-set
//!   enumeration, the no-double-return variants, and the renewal identity
//!   connecting them.
//! - [`renewal`]: free energy and critical point from the renewal equation's
//!   generating function, plus a generic discrete-renewal pinning solver.
//! - [`transfer`]: a grid transfer operator for partition functions that are
//!   out of enumeration range, and the quenched/annealed free-energy
//!   estimators built on it.
//! - [`fm`]: fractional-moment bookkeeping producing machine-checkable
//!   certificates about the localized/delocalized boundary of the disordered
//!   model.
//!
//! Floating-point policy: partition values and determinants are carried in
//! log-domain wherever sizes can grow with the volume; reductions that feed
//! reported numbers are performed in a fixed order so results are
//! byte-identical across thread counts.

pub mod detkit;
pub mod fm;
pub mod model;
pub mod partition;
pub mod quadrature;
pub mod renewal;
pub mod series;
pub mod transfer;

#[cfg(doctest)]
mod book;

use thiserror::Error;

/// Crate-wide error type.
///
/// The three variants map onto the CLI's exit codes: bad input (1), a
/// numerical precondition that failed at runtime (2), and an internal
/// consistency violation that indicates a bug rather than bad input (3).
#[derive(Debug, Error)]
pub enum Error {
    /// The request itself is malformed (sizes, ranges, missing data).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The computation cannot proceed at the requested precision
    /// (non-positive pivot, unconverged quadrature, inadequate grid, ...).
    #[error("numerical precondition failed: {0}")]
    Precondition(String),
    /// An internal cross-check failed; this is a bug, not a user error.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// ln(2π), used by every Gaussian normalization in the crate.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// (2π)^{−1/2}, the per-bond Gaussian normalization.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
