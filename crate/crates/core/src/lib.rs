//! Fundamental solutions of the time-fractional Cauchy problem
//! `∂_t^α (u - u_0) + Ψ_β(-i∇) u = λ |u|^{γ-1} u`, where Ψ_β is the stable
//! pseudo-differential operator with symbol `ψ(ξ) = |ξ|^β ω_μ(ξ/|ξ|)`.
//!
//! The crate synthesizes the kernel pair (Z, Y) spectrally, cross-checks it
//! against subordination integrals and Monte Carlo samples of the time-changed
//! stable process, and solves the mild (integral) form of the nonlinear problem by
//! Picard iteration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod mittag_leffler;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod stable;
pub mod stochastic;
pub mod symbol;

pub use error::{Error, Result};
