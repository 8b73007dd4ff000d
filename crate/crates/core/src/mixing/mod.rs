//! Spectral analysis of copula densities and the geometric bound on the
//! β-mixing coefficients of a copula-based Markov chain.
//!
//! If every adjacent-time density satisfies c_{t,t+1} = 1 + Σ λ_{i,t} φ_i φ_i
//! with η_t = max_i λ_{i,t} and η̂ = sup_t η_t < 1, then
//! β_k ≤ ½ η̂^{k−1} sup_t ‖c_{t,t+1} − 1‖.

mod bound;
mod spectral;

pub use bound::{
    beta_bound, check_theorem_conditions, gaussian_cur_chain, gaussian_cur_report, lag_density_norm,
    lag_density_norm_spectral, ConditionsReport, ElementCheck, MixingReport, NEAR_CRITICAL, SYMMETRY_TOLERANCE,
};
pub use spectral::{
    gaussian_l2_norm, l2_norm_centered, l2_norm_quadrature, maximal_correlation, spectral_decomposition,
    SpectralDecomposition, MIN_GRID,
};
