use std::borrow::Cow;

use nalgebra::DMatrix;

use super::{Copula, DiscretizedCopula, NodeRepresentation};
use crate::error::{Error, Result};
use crate::quadrature::ScoreGrid;
use crate::scalar::Real;

/// Smallest node grid used for node representations.
const MIN_NODES: usize = 512;

/// Length of the normal-score node grid paired with an n-cell discretisation.
pub fn node_count(n: usize) -> usize {
    n.max(MIN_NODES)
}

/// Either kind of copula accepted by the grid operations.
#[derive(Debug, Clone, Copy)]
pub enum CopulaOperand<'a, T: Real> {
    Closed(&'a Copula<T>),
    Discretized(&'a DiscretizedCopula<T>),
}

impl<'a, T: Real> From<&'a Copula<T>> for CopulaOperand<'a, T> {
    fn from(c: &'a Copula<T>) -> Self {
        CopulaOperand::Closed(c)
    }
}

impl<'a, T: Real> From<&'a DiscretizedCopula<T>> for CopulaOperand<'a, T> {
    fn from(c: &'a DiscretizedCopula<T>) -> Self {
        CopulaOperand::Discretized(c)
    }
}

impl<'a, T: Real> CopulaOperand<'a, T> {
    fn is_independence(&self) -> bool {
        matches!(self, CopulaOperand::Closed(c) if c.is_independence())
    }

    fn node_view(&self, n: usize) -> Result<Option<Cow<'a, NodeRepresentation<T>>>> {
        match *self {
            CopulaOperand::Closed(c) => Ok(Some(Cow::Owned(
                c.node_representation(n, &ScoreGrid::new(node_count(n))),
            ))),
            CopulaOperand::Discretized(d) => {
                if d.n() != n {
                    return Err(Error::InvalidArgument(format!(
                        "discretized operand has grid size {}, expected {n}",
                        d.n()
                    )));
                }
                Ok(d.node_representation()
                    .filter(|r| r.cells() == n && r.grid.len() == node_count(n))
                    .map(Cow::Borrowed))
            }
        }
    }

    fn cell_table(&self, n: usize) -> Result<Cow<'a, DMatrix<T>>> {
        match *self {
            CopulaOperand::Closed(c) => Ok(Cow::Owned(c.discretize(n)?.values().clone())),
            CopulaOperand::Discretized(d) => Ok(Cow::Borrowed(d.values())),
        }
    }
}

/// The Markov ∗-product (A∗B)(u, v) = ∫₀¹ ∂₂A(u, w) ∂₁B(w, v) dw, returned as
/// a cell-averaged density on the n×n grid.
///
/// Cell masses are integrals over w of P(U ∈ cell i | W = w) · P(V ∈ cell j | W = w),
/// evaluated with a trapezoid rule in the normal score of w. When one operand
/// is a bare cell table (no node representation) the product falls back to
/// the piecewise-constant composition A·B/n.
pub fn star_product<'a, 'b, T: Real>(
    a: impl Into<CopulaOperand<'a, T>>,
    b: impl Into<CopulaOperand<'b, T>>,
    n: usize,
) -> Result<DiscretizedCopula<T>> {
    let (a, b) = (a.into(), b.into());
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "star product grid size must be >= 16, got {n}"
        )));
    }
    if a.is_independence() || b.is_independence() {
        return Ok(DiscretizedCopula::independence(n));
    }
    match (a.node_view(n)?, b.node_view(n)?) {
        (Some(ra), Some(rb)) => Ok(compose_nodes(&ra, &rb, n)),
        _ => {
            let (ta, tb) = (a.cell_table(n)?, b.cell_table(n)?);
            let mut cells = ta.as_ref() * tb.as_ref() / T::from_usize_lossy(n);
            cells.apply(|x| *x = x.max(T::zero()));
            DiscretizedCopula::from_cell_values(cells)
        }
    }
}

fn compose_nodes<T: Real>(a: &NodeRepresentation<T>, b: &NodeRepresentation<T>, n: usize) -> DiscretizedCopula<T> {
    let weights = nalgebra::DVector::from_column_slice(&a.grid.weights);
    let mut strips = a.given_second.clone();
    let mut dens = a.density.clone();
    for (mut col, w) in strips.column_iter_mut().zip(weights.iter()) {
        col *= *w;
    }
    for (mut col, w) in dens.column_iter_mut().zip(weights.iter()) {
        col *= *w;
    }
    let mut cells = &strips * &b.given_first * T::from_usize_lossy(n * n);
    cells.apply(|x| *x = x.max(T::zero()));
    let given_second = &strips * &b.density;
    let given_first = &dens * &b.given_first;
    let density = &dens * &b.density;
    DiscretizedCopula::with_nodes(
        cells,
        NodeRepresentation::new(a.grid.clone(), density, given_second, given_first),
    )
}

/// Copula of (Y_t, Y_{t+k}) from the adjacent-time copulas
/// C_{t,t+1}, …, C_{t+k-1,t+k}: the left fold of [`star_product`].
pub fn iterate_lag_copula<T: Real>(chain: &[Copula<T>], n: usize) -> Result<DiscretizedCopula<T>> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("lag copula chain is empty".into()))?;
    rest.iter().enumerate().try_fold(first.discretize(n)?, |acc, (i, c)| {
        star_product(&acc, c, n).map_err(|e| e.at_step(i + 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::BivariateCopula;

    fn g(rho: f64) -> Copula<f64> {
        Copula::<f64>::gaussian(rho).unwrap()
    }

    #[test]
    fn independence_is_absorbing() {
        for c in [g(0.6), Copula::<f64>::fgm(-0.4).unwrap()] {
            let left = star_product(&c, &Copula::Independence, 32).unwrap();
            let right = star_product(&Copula::Independence, &c, 32).unwrap();
            assert!(left.values().iter().all(|&x| x == 1.0));
            assert!(right.values().iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn gaussian_parameters_multiply() {
        let n = 64;
        let p = star_product(&g(-0.5), &g(0.4), n).unwrap();
        let target = g(-0.2).discretize(n).unwrap();
        assert!(p.sup_distance(&target).unwrap() < 1e-8);
        p.validate(1e-8).unwrap();
    }

    #[test]
    fn fgm_parameters_multiply_by_one_third() {
        let n = 32;
        let p = star_product(&Copula::<f64>::fgm(0.9).unwrap(), &Copula::<f64>::fgm(0.9).unwrap(), n).unwrap();
        let target = Copula::<f64>::fgm(0.27).unwrap().discretize(n).unwrap();
        assert!(p.sup_distance(&target).unwrap() < 1e-9);
    }

    #[test]
    fn mixed_and_cell_only_operands() {
        let n = 32;
        let a = g(0.5).discretize(n).unwrap();
        let with_nodes = star_product(&a, &g(0.5), n).unwrap();
        let cells_only = star_product(&a.clone().into_cells(), &g(0.5), n).unwrap();
        let target = g(0.25).discretize(n).unwrap();
        assert!(with_nodes.sup_distance(&target).unwrap() < 1e-8);
        // piecewise-constant composition is only accurate away from the corners
        assert!(cells_only.node_representation().is_none());
        assert!((cells_only.value(n / 2, n / 2) - target.value(n / 2, n / 2)).abs() < 1e-2);
        assert!(star_product(&a, &g(0.5), 64).is_err());
        assert!(star_product(&g(0.5), &g(0.5), 8).is_err());
    }

    #[test]
    fn lag_chain_of_gaussians() {
        let n = 32;
        let chain = vec![g(-0.5); 3];
        let d = iterate_lag_copula(&chain, n).unwrap();
        let target = g(-0.125).discretize(n).unwrap();
        assert!(d.sup_distance(&target).unwrap() < 1e-8);
        let single = iterate_lag_copula(&[Copula::<f64>::Independence], n).unwrap();
        assert!(single.values().iter().all(|&x| x == 1.0));
        assert!(iterate_lag_copula::<f64>(&[], n).is_err());
        assert!((d.cdf(0.5, 0.5).unwrap() - g(-0.125).cdf(0.5, 0.5).unwrap()).abs() < 1e-6);
    }
}
