//! Copula-based Markov processes with dependent increments.
//!
//! The process is Y_t = Y_{t-1} + ξ_t with Y_0 = 0, where ξ_t has a fixed
//! marginal law H and is linked to Y_{t-1} by a time-invariant copula C.
//!
//! - [`copula`]: gaussian, FGM and independence copulas, grid
//!   discretisation and the Markov ∗-product.
//! - [`griddist`]: one-dimensional distributions sampled on a grid.
//! - [`cconvolution`]: the law of Y_t and the copula of (Y_{t-1}, Y_t).
//! - [`gaussian_cur`]: closed-form variances and autocorrelations of the
//!   gaussian case.
//! - [`mixing`]: spectra of copula densities and the β-mixing bound.
//! - [`montecarlo`]: path simulation and ensemble estimators.
//!
//! Everything is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cconvolution;
pub mod copula;
pub mod error;
pub mod gaussian_cur;
pub mod griddist;
pub mod io;
pub mod mixing;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Copula = copula::Copula<f64>;
pub type DiscretizedCopula = copula::DiscretizedCopula<f64>;
pub type GridDistribution = griddist::GridDistribution<f64>;
pub type GaussianCurParams = gaussian_cur::GaussianCurParams<f64>;
pub type VariancePath = gaussian_cur::VariancePath<f64>;
pub type SpectralDecomposition = mixing::SpectralDecomposition<f64>;
pub type MixingReport = mixing::MixingReport<f64>;
pub type SimulationConfig = montecarlo::SimulationConfig<f64>;
pub type PathEnsemble = montecarlo::PathEnsemble<f64>;
