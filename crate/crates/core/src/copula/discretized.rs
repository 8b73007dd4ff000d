use nalgebra::DMatrix;

use super::{bisect_unit, check_closed_unit, check_open_unit, BivariateCopula};
use crate::error::{Error, Result};
use crate::quadrature::ScoreGrid;
use crate::scalar::Real;

/// Copula density known on a uniform n×n grid of cells.
///
/// `values[(i, j)]` is the average density over
/// [i/n, (i+1)/n] × [j/n, (j+1)/n]; the copula itself is the one whose
/// density is piecewise constant on those cells. Copulas produced by
/// discretising a closed form or by [`star_product`](super::star_product)
/// also carry a [`NodeRepresentation`], which keeps repeated ∗-products
/// accurate near the corners of the square.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedCopula<T: Real> {
    values: DMatrix<T>,
    nodes: Option<NodeRepresentation<T>>,
}

/// Pointwise description of a copula on a normal-score node grid z_k.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRepresentation<T: Real> {
    /// Quadrature grid the node values refer to.
    pub grid: ScoreGrid<T>,
    /// c(Φ(z_k), Φ(z_l)), N×N.
    pub density: DMatrix<T>,
    /// P(U ∈ cell i | V = Φ(z_l)), n×N.
    pub given_second: DMatrix<T>,
    /// P(V ∈ cell j | U = Φ(z_k)), N×n.
    pub given_first: DMatrix<T>,
}

impl<T: Real> NodeRepresentation<T> {
    pub fn new(grid: ScoreGrid<T>, density: DMatrix<T>, given_second: DMatrix<T>, given_first: DMatrix<T>) -> Self {
        debug_assert_eq!(density.nrows(), grid.len());
        debug_assert_eq!(given_second.ncols(), grid.len());
        debug_assert_eq!(given_first.nrows(), grid.len());
        Self {
            grid,
            density,
            given_second,
            given_first,
        }
    }

    /// Number of cells of the grid the strip masses refer to.
    pub fn cells(&self) -> usize {
        self.given_second.nrows()
    }
}

impl<T: Real> DiscretizedCopula<T> {
    /// Wraps an n×n table of cell-averaged density values.
    pub fn from_cell_values(values: DMatrix<T>) -> Result<Self> {
        if values.nrows() != values.ncols() || values.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "cell table must be square and nonempty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(bad) = values.iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cell density {bad} is negative or not finite"
            )));
        }
        Ok(Self { values, nodes: None })
    }

    pub(crate) fn with_nodes(values: DMatrix<T>, nodes: NodeRepresentation<T>) -> Self {
        Self {
            values,
            nodes: Some(nodes),
        }
    }

    /// The independence copula on an n-grid (all cells equal to one).
    pub fn independence(n: usize) -> Self {
        let grid = ScoreGrid::new(super::node_count(n));
        let big = grid.len();
        let mass = T::one() / T::from_usize_lossy(n);
        let nodes = NodeRepresentation::new(
            grid,
            DMatrix::from_element(big, big, T::one()),
            DMatrix::from_element(n, big, mass),
            DMatrix::from_element(big, n, mass),
        );
        Self::with_nodes(DMatrix::from_element(n, n, T::one()), nodes)
    }

    /// Grid size n.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    pub fn node_representation(&self) -> Option<&NodeRepresentation<T>> {
        self.nodes.as_ref()
    }

    /// Drops the node representation, keeping only the cell table.
    pub fn into_cells(self) -> Self {
        Self {
            values: self.values,
            nodes: None,
        }
    }

    /// Largest deviation of the row and column averages of the cell table
    /// from one, i.e. of n × (strip mass) from 1.
    pub fn margin_deviation(&self) -> (T, T) {
        let n = T::from_usize_lossy(self.n());
        let dev = |sum: T| (sum / n - T::one()).abs();
        let rows = self.values.row_iter().map(|r| dev(r.sum())).fold(T::zero(), T::max);
        let cols = self.values.column_iter().map(|c| dev(c.sum())).fold(T::zero(), T::max);
        (rows, cols)
    }

    /// Checks nonnegativity and uniform margins to `tolerance`.
    pub fn validate(&self, tolerance: T) -> Result<()> {
        if let Some(bad) = self.values.iter().find(|x| !(**x >= T::zero())) {
            return Err(Error::InvalidArgument(format!("negative cell density {bad}")));
        }
        let (r, c) = self.margin_deviation();
        let worst = r.max(c);
        if worst > tolerance {
            return Err(Error::MarginViolation {
                deviation: worst.to_f64_lossy(),
                tolerance: tolerance.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Sup-norm distance between two cell tables of equal size.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.n() != other.n() {
            return Err(Error::InvalidArgument(format!(
                "grid sizes differ: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }

    /// Spearman's rank correlation 12∬C − 3, exact for the piecewise-constant density.
    pub fn spearman_rho(&self) -> T {
        let n = self.n();
        let nt = T::from_usize_lossy(n);
        let centre = |i: usize| (T::from_usize_lossy(i) + T::lit(0.5)) / nt;
        let mut s = T::zero();
        for j in 0..n {
            for i in 0..n {
                s += self.values[(i, j)] * centre(i) * centre(j);
            }
        }
        T::lit(12.0) * s / (nt * nt) - T::lit(3.0)
    }

    fn cell_of(&self, x: T) -> usize {
        let n = self.n();
        (x * T::from_usize_lossy(n)).floor().to_usize().unwrap_or(0).min(n - 1)
    }

    /// Length of [k/n, (k+1)/n] ∩ [0, x].
    fn overlap(&self, k: usize, x: T) -> T {
        let nt = T::from_usize_lossy(self.n());
        let lo = T::from_usize_lossy(k) / nt;
        let hi = T::from_usize_lossy(k + 1) / nt;
        (x.min(hi) - lo).max(T::zero())
    }
}

impl<T: Real> BivariateCopula<T> for DiscretizedCopula<T> {
    fn cdf(&self, u: T, v: T) -> Result<T> {
        check_closed_unit("u", u)?;
        check_closed_unit("v", v)?;
        let n = self.n();
        let mut total = T::zero();
        for j in 0..n {
            let wv = self.overlap(j, v);
            if wv == T::zero() {
                break;
            }
            for i in 0..n {
                let wu = self.overlap(i, u);
                if wu == T::zero() {
                    break;
                }
                total += self.values[(i, j)] * wu * wv;
            }
        }
        Ok(total)
    }

    fn d1(&self, u: T, v: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_closed_unit("v", v)?;
        let i = self.cell_of(u);
        Ok((0..self.n()).map(|j| self.values[(i, j)] * self.overlap(j, v)).sum())
    }

    fn d2(&self, u: T, v: T) -> Result<T> {
        check_closed_unit("u", u)?;
        check_open_unit("v", v)?;
        let j = self.cell_of(v);
        Ok((0..self.n()).map(|i| self.values[(i, j)] * self.overlap(i, u)).sum())
    }

    fn density(&self, u: T, v: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_open_unit("v", v)?;
        Ok(self.values[(self.cell_of(u), self.cell_of(v))])
    }

    fn conditional_inverse(&self, u: T, p: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_open_unit("p", p)?;
        let i = self.cell_of(u);
        bisect_unit(p, |v| {
            (0..self.n()).map(|j| self.values[(i, j)] * self.overlap(j, v)).sum()
        })
    }
}
