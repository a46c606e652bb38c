//! Barotropic Euler equations and their isothermal limit.
//!
//! The crate covers the `γ`-law gas `p = ρ^{2θ+1}/(2θ+1)` for `θ ∈ (0, 0.99]`
//! and the isothermal gas `p = ρ` (`θ = 0`):
//!
//! - [`gas_model`]: pressure, fluxes, invariants and the mechanical energy;
//! - [`entropy`]: kernel-generated weak entropies and the ξ-families;
//! - [`riemann`]: the exact Riemann solver with vacuum;
//! - [`godunov`]: a Godunov scheme and weak-form entropy diagnostics;
//! - [`limit_harness`]: θ-sweeps that measure the rates of the limit.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod gas_model;
pub mod godunov;
pub mod limit_harness;
pub mod quadrature;
pub mod riemann;

pub use error::{Error, Result};
pub use gas_model::{BoundBudget, ConservedState, Theta};

/// Value of an entropy pair `(η, q)` at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyPairValue {
    pub eta: f64,
    pub q: f64,
}

impl EntropyPairValue {
    pub const ZERO: EntropyPairValue = EntropyPairValue { eta: 0.0, q: 0.0 };
}

// Guide chapters, compiled and run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gas-model.md")]
    mod gas_model {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/riemann.md")]
    mod riemann {}
    #[doc = include_str!("../../../book/src/godunov.md")]
    mod godunov {}
    #[doc = include_str!("../../../book/src/limit-harness.md")]
    mod limit_harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
