//! Numerical and exact tools for the biharmonic Lane-Emden equation
//! `Δ²u = u^p` near an isolated singularity.
//!
//! In Emden-Fowler variables `t = ln|x|`, `w = |x|^{4/(p-1)} u` the
//! equation becomes autonomous in `t`. This crate provides:
//!
//! - [`coeffs`]: exact coefficients of the transformed equation, their signs,
//!   and the symbol identity tying them to the bilaplacian;
//! - [`transform`]: the coordinate change, the scaling family, and a radial
//!   bilaplacian oracle;
//! - [`ode`]: the radial ODE, its equilibria, and regular-solution shooting;
//! - [`energy`]: the monotone energy and its derivative identity;
//! - [`classify`]: removable / singular verdicts on sampled profiles;
//! - [`cli`]: the `bilane` command-line front end.
//!
//! A guide with worked examples lives in `book/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod coeffs;
pub mod dopri;
pub mod energy;
pub mod error;
pub mod fit;
pub mod io;
pub mod ode;
pub mod plot;
pub mod quartic;
pub mod rational;
pub mod transform;

pub use classify::{audit_bounds, audit_derivative_bounds, classify_profile, ClassificationReport, ClassifyOptions, Verdict};
pub use coeffs::{
    characteristic_polynomial, compute_coefficients, sign_report, verify_symbol_identity, CoefficientSet, Params,
};
pub use dopri::{IntegrateOptions, State, Termination};
pub use energy::{audit_monotonicity, energy_at, energy_levels, scaling_invariance_check, EnergyLevels};
pub use error::{Error, Result};
pub use ode::{equilibrium_spectrum, integrate, rhs, shoot_regular, Equilibrium, Trajectory};
pub use quartic::QuarticPolynomial;
pub use rational::Rational;
pub use transform::{from_ef, radial_bilaplacian, scale, to_ef, EFProfile, RadialProfile};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
