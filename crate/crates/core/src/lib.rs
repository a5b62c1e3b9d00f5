//! Numerics for the cooperative two-species nonlocal logistic system
//!
//! ```text
//! -Δu = (a - ∫ K(x,y) f(u,v) dy) u + b v
//! -Δv = (d - ∫ Γ(x,y) g(u,v) dy) v + c u      in Ω,   u = v = 0 on ∂Ω
//! ```
//!
//! The crate discretizes Ω (intervals and rectangles) with the standard
//! finite-difference Dirichlet Laplacian, samples the kernels at node pairs,
//! and provides:
//!
//! * closed-form spectral analysis of the 2×2 coupling matrix and inverse
//!   iteration for the discrete operators `-Δ_h` and `-Δ_h + diag(ψ)`;
//! * the solution operators `S`, `G` and the fixed-point residual
//!   `U - tS(U) - G(U)` with a damped Newton solver;
//! * pseudo-arclength continuation of the positive branch from `(t₁, 0)`,
//!   bisection for the existence threshold, and numerical audits of the
//!   linear-algebra lemmas and of the symmetrization inequality chain.
//!
//! Everything here is `no_std` (with `alloc`); IO, configuration and the
//! command line live in the `coopbif` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bifurcation;
pub mod discretization;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod nonlocal;
pub mod operators;
pub mod spectral;
pub mod state;

pub use error::{Error, Hypothesis, Result};
pub use state::StateField;
