use nalgebra::{DMatrix, RealField};

use crate::copula::{Copula, CopulaOperand};
use crate::error::{Error, Result};
use crate::quadrature::ScoreGrid;
use crate::scalar::Real;

/// Smallest grid accepted by the spectral routines.
pub const MIN_GRID: usize = 64;

/// Singular system of the integral operator with kernel c(u, v) − 1 on
/// L²([0, 1]).
///
/// The operator is sampled at points u_k with quadrature weights w_k and
/// symmetrised as √w_k (c(u_k, u_l) − 1) √w_l, so its singular values
/// approximate the λ_i of c(u, v) = 1 + Σ λ_i φ_i(u) φ_i(v).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Real> {
    /// Grid size requested by the caller.
    pub n: usize,
    /// Nonincreasing singular values.
    pub singular_values: Vec<T>,
    /// Left singular vectors (columns) of the weighted matrix.
    pub left: DMatrix<T>,
    /// Right singular vectors (columns) of the weighted matrix.
    pub right: DMatrix<T>,
    /// Sample points u_k.
    pub points: Vec<T>,
    /// Quadrature weights w_k.
    pub weights: Vec<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// φ_i at the sample points, normalised in L²(du).
    pub fn eigenfunction(&self, i: usize) -> Vec<T> {
        self.left
            .column(i)
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| x / w.sqrt())
            .collect()
    }

    /// |cos| of the angle between the i-th left and right singular vectors;
    /// 1 for a symmetric kernel up to rounding.
    pub fn mode_alignment(&self, i: usize) -> T {
        let dot: T = self
            .left
            .column(i)
            .iter()
            .zip(self.right.column(i).iter())
            .map(|(&a, &b)| a * b)
            .sum();
        dot.abs()
    }

    /// Σ λ_i².
    pub fn squared_sum(&self) -> T {
        self.singular_values.iter().map(|&s| s * s).sum()
    }
}

/// Weighted operator matrix, sample points and weights.
pub(crate) fn operator_matrix<'a, T: Real>(
    c: impl Into<CopulaOperand<'a, T>>,
    n: usize,
) -> Result<(DMatrix<T>, Vec<T>, Vec<T>)> {
    if n < MIN_GRID {
        return Err(Error::InvalidArgument(format!(
            "grid size must be >= {MIN_GRID}, got {n}"
        )));
    }
    let (m, points, weights) = match c.into() {
        CopulaOperand::Closed(c) => {
            let grid = ScoreGrid::<T>::new(n);
            let sw: Vec<T> = grid.weights.iter().map(|w| w.sqrt()).collect();
            let m = if c.is_independence() {
                DMatrix::zeros(n, n)
            } else {
                crate::copula::parallel_matrix(n, n, |k, l| {
                    sw[k] * (c.density_scores(grid.scores[k], grid.scores[l]) - T::one()) * sw[l]
                })
            };
            (m, grid.points, grid.weights)
        }
        CopulaOperand::Discretized(d) => match d.node_representation() {
            Some(rep) => {
                let sw: Vec<T> = rep.grid.weights.iter().map(|w| w.sqrt()).collect();
                let big = rep.grid.len();
                let m = DMatrix::from_fn(big, big, |k, l| sw[k] * (rep.density[(k, l)] - T::one()) * sw[l]);
                (m, rep.grid.points.clone(), rep.grid.weights.clone())
            }
            None => {
                let cells = d.n();
                let nt = T::from_usize_lossy(cells);
                let m = d.values().map(|x| (x - T::one()) / nt);
                let points = (0..cells)
                    .map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) / nt)
                    .collect();
                (m, points, vec![T::one() / nt; cells])
            }
        },
    };
    if let Some(bad) = m.iter().find(|x| !x.is_finite()) {
        return Err(Error::Decomposition(format!(
            "operator matrix has a non-finite entry ({bad})"
        )));
    }
    Ok((m, points, weights))
}

/// Singular value decomposition of the sampled centred density.
///
/// Closed forms are sampled on an n-point trapezoid grid in normal scores;
/// discretised copulas use their node representation when present and the
/// cell table (c̄_ij − 1)/n otherwise.
pub fn spectral_decomposition<'a, T: Real + RealField>(
    c: impl Into<CopulaOperand<'a, T>>,
    n: usize,
) -> Result<SpectralDecomposition<T>> {
    let (m, points, weights) = operator_matrix(c, n)?;
    let eps = T::lit(1e3) * <T as num_traits::Float>::epsilon();
    let svd = nalgebra::SVD::try_new(m, true, true, eps, 0)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    let left = svd
        .u
        .ok_or_else(|| Error::Decomposition("missing left vectors".into()))?;
    let right = svd
        .v_t
        .ok_or_else(|| Error::Decomposition("missing right vectors".into()))?
        .transpose();
    Ok(SpectralDecomposition {
        n,
        singular_values: svd.singular_values.iter().copied().collect(),
        left,
        right,
        points,
        weights,
    })
}

/// Maximal correlation η: the largest singular value, or |ρ| for a gaussian
/// copula.
pub fn maximal_correlation<'a, T: Real + RealField>(c: impl Into<CopulaOperand<'a, T>>, n: usize) -> Result<T> {
    let c = c.into();
    if let CopulaOperand::Closed(closed) = c {
        if let Some(v) = gaussian_shortcut(closed, |rho| num_traits::Float::abs(rho)) {
            return Ok(v);
        }
    }
    let d = spectral_decomposition(c, n)?;
    Ok(d.singular_values.first().copied().unwrap_or_else(T::zero))
}

/// ‖c − 1‖ in L²([0,1]²): √(ρ²/(1 − ρ²)) for a gaussian copula, quadrature
/// otherwise.
pub fn l2_norm_centered<'a, T: Real>(c: impl Into<CopulaOperand<'a, T>>, n: usize) -> Result<T> {
    let c = c.into();
    if let CopulaOperand::Closed(closed) = c {
        if let Some(v) = gaussian_shortcut(closed, gaussian_l2_norm) {
            return Ok(v);
        }
    }
    l2_norm_quadrature(c, n)
}

/// ‖c − 1‖ by quadrature of (c − 1)² on the sampling grid of
/// [`spectral_decomposition`], without closed-form shortcuts.
pub fn l2_norm_quadrature<'a, T: Real>(c: impl Into<CopulaOperand<'a, T>>, n: usize) -> Result<T> {
    let (m, _, _) = operator_matrix(c, n)?;
    Ok(m.iter().map(|&x| x * x).sum::<T>().sqrt())
}

/// √(τ²/(1 − τ²)).
pub fn gaussian_l2_norm<T: Real>(tau: T) -> T {
    (tau * tau / (T::one() - tau * tau)).sqrt()
}

fn gaussian_shortcut<T: Real>(c: &Copula<T>, f: impl Fn(T) -> T) -> Option<T> {
    match *c {
        Copula::Independence => Some(T::zero()),
        Copula::Gaussian { rho } => Some(f(rho)),
        Copula::Fgm { .. } if c.is_independence() => Some(T::zero()),
        Copula::Fgm { .. } => None,
    }
}
