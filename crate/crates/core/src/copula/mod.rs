//! Bivariate copulas: the closed-form families, their grid discretisation and
//! the Markov ∗-product.
//!
//! Every family implemented here is exchangeable, C(u, v) = C(v, u), so the
//! partial derivative in the second argument is the first partial with the
//! arguments swapped.

mod discretized;
mod star;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{cell_edge_scores, CellRule, ScoreGrid};
use crate::scalar::{bvn_cdf, Real};

pub use discretized::{DiscretizedCopula, NodeRepresentation};
pub use star::{iterate_lag_copula, node_count, star_product, CopulaOperand};

/// Clamp applied to the arguments of the Gaussian copula density.
pub const DENSITY_CLAMP: f64 = 1e-10;

/// Gauss-Legendre nodes per cell used when averaging a closed-form density
/// over grid cells.
pub const CELL_RULE_ORDER: usize = 16;

const BISECTION_MAX_ITER: usize = 80;
const BISECTION_TOL: f64 = 1e-12;

/// Common evaluation interface of closed-form and discretised copulas.
pub trait BivariateCopula<T: Real> {
    /// C(u, v) for u, v ∈ [0, 1].
    fn cdf(&self, u: T, v: T) -> Result<T>;

    /// ∂C/∂u, the conditional distribution of V given U = u.
    fn d1(&self, u: T, v: T) -> Result<T>;

    /// ∂C/∂v, the conditional distribution of U given V = v.
    fn d2(&self, u: T, v: T) -> Result<T>;

    /// Copula density on the open square.
    fn density(&self, u: T, v: T) -> Result<T>;

    /// Solves d1(u, v) = p for v.
    fn conditional_inverse(&self, u: T, p: T) -> Result<T>;
}

/// A closed-form bivariate copula family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Copula<T> {
    /// Π(u, v) = uv.
    Independence,
    /// Gaussian copula with correlation `rho` ∈ (-1, 1).
    Gaussian { rho: T },
    /// Farlie-Gumbel-Morgenstern copula uv(1 + θ(1-u)(1-v)), θ ∈ [-1, 1].
    Fgm { theta: T },
}

impl<T: Real> Copula<T> {
    pub fn gaussian(rho: T) -> Result<Self> {
        if !(rho.abs() < T::one()) {
            return Err(Error::domain("rho", rho.to_f64_lossy(), "|rho| < 1"));
        }
        Ok(Copula::Gaussian { rho })
    }

    pub fn fgm(theta: T) -> Result<Self> {
        if !(theta.abs() <= T::one()) {
            return Err(Error::domain("theta", theta.to_f64_lossy(), "|theta| <= 1"));
        }
        Ok(Copula::Fgm { theta })
    }

    pub fn is_independence(&self) -> bool {
        match *self {
            Copula::Independence => true,
            Copula::Gaussian { rho } => rho == T::zero(),
            Copula::Fgm { theta } => theta == T::zero(),
        }
    }

    /// ∂C/∂u expressed in normal scores x = Φ⁻¹(u), y = Φ⁻¹(v).
    ///
    /// `y` may be ±∞; `x` must be finite.
    pub fn d1_scores(&self, x: T, y: T) -> T {
        if y == T::neg_infinity() {
            return T::zero();
        }
        if y == T::infinity() {
            return T::one();
        }
        match *self {
            Copula::Independence => y.norm_cdf(),
            Copula::Gaussian { rho } => {
                let s = (T::one() - rho * rho).sqrt();
                ((y - rho * x) / s).norm_cdf()
            }
            Copula::Fgm { theta } => {
                let (u, v) = (x.norm_cdf(), y.norm_cdf());
                let two = T::lit(2.0);
                v * (T::one() + theta * (T::one() - v) * (T::one() - two * u))
            }
        }
    }

    /// ∂C/∂v in normal scores.
    #[inline]
    pub fn d2_scores(&self, x: T, y: T) -> T {
        self.d1_scores(y, x)
    }

    /// Density expressed in normal scores.
    pub fn density_scores(&self, x: T, y: T) -> T {
        match *self {
            Copula::Independence => T::one(),
            Copula::Gaussian { rho } => {
                let one_m = T::one() - rho * rho;
                let q = rho * rho * (x * x + y * y) - T::lit(2.0) * rho * x * y;
                (-q / (T::lit(2.0) * one_m)).exp() / one_m.sqrt()
            }
            Copula::Fgm { theta } => {
                let two = T::lit(2.0);
                let (u, v) = (x.norm_cdf(), y.norm_cdf());
                T::one() + theta * (T::one() - two * u) * (T::one() - two * v)
            }
        }
    }

    /// Cell-averaged density on the uniform n×n grid, together with the node
    /// representation used by [`star_product`].
    pub fn discretize(&self, n: usize) -> Result<DiscretizedCopula<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        if self.is_independence() {
            return Ok(DiscretizedCopula::independence(n));
        }
        let edges = cell_edge_scores::<T>(n);
        let rule = CellRule::<T>::new(n, CELL_RULE_ORDER);
        let scale = T::from_usize_lossy(n * n);
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![T::zero(); n];
                for node in rule.cell(i) {
                    let mut prev = T::zero();
                    for (j, slot) in row.iter_mut().enumerate() {
                        let next = self.d1_scores(node.score, edges[j + 1]);
                        *slot += node.weight * (next - prev);
                        prev = next;
                    }
                }
                row.iter().map(|&m| (m * scale).max(T::zero())).collect()
            })
            .collect();
        let values = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let nodes = self.node_representation(n, &ScoreGrid::new(node_count(n)));
        Ok(DiscretizedCopula::with_nodes(values, nodes))
    }

    pub(crate) fn node_representation(&self, n: usize, grid: &ScoreGrid<T>) -> NodeRepresentation<T> {
        let edges = cell_edge_scores::<T>(n);
        let big = grid.len();
        let density = parallel_matrix(big, big, |k, l| self.density_scores(grid.scores[k], grid.scores[l]));
        let given_first = parallel_matrix(big, n, |k, j| {
            self.d1_scores(grid.scores[k], edges[j + 1]) - self.d1_scores(grid.scores[k], edges[j])
        });
        let given_second = parallel_matrix(n, big, |i, l| {
            self.d2_scores(edges[i + 1], grid.scores[l]) - self.d2_scores(edges[i], grid.scores[l])
        });
        NodeRepresentation::new(grid.clone(), density, given_second, given_first)
    }
}

/// Builds a column-major matrix filling rows in parallel.
pub(crate) fn parallel_matrix<T: Real>(
    rows: usize,
    cols: usize,
    f: impl Fn(usize, usize) -> T + Sync,
) -> nalgebra::DMatrix<T> {
    let data: Vec<Vec<T>> = (0..rows)
        .into_par_iter()
        .map(|i| (0..cols).map(|j| f(i, j)).collect())
        .collect();
    nalgebra::DMatrix::from_fn(rows, cols, |i, j| data[i][j])
}

fn check_closed_unit<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(what, x.to_f64_lossy(), "[0, 1]"))
    }
}

fn check_open_unit<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::domain(what, x.to_f64_lossy(), "(0, 1)"))
    }
}

/// Smallest v with `f(v) >= p` on [0, 1], for nondecreasing `f`.
pub(crate) fn bisect_unit<T: Real>(p: T, mut f: impl FnMut(T) -> T) -> Result<T> {
    let (mut lo, mut hi) = (T::zero(), T::one());
    let slack = T::lit(1e-12);
    let (flo, fhi) = (f(lo), f(hi));
    if flo > p + slack || fhi < p - slack {
        return Err(Error::Convergence {
            iterations: 0,
            residual: (if flo > p { flo - p } else { p - fhi }).to_f64_lossy(),
        });
    }
    let tol = T::lit(BISECTION_TOL);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            return Ok((lo + hi) / T::lit(2.0));
        }
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol {
        Ok((lo + hi) / T::lit(2.0))
    } else {
        Err(Error::Convergence {
            iterations: BISECTION_MAX_ITER,
            residual: (hi - lo).to_f64_lossy(),
        })
    }
}

impl<T: Real> BivariateCopula<T> for Copula<T> {
    fn cdf(&self, u: T, v: T) -> Result<T> {
        check_closed_unit("u", u)?;
        check_closed_unit("v", v)?;
        if u == T::zero() || v == T::zero() {
            return Ok(T::zero());
        }
        if u == T::one() {
            return Ok(v);
        }
        if v == T::one() {
            return Ok(u);
        }
        let c = match *self {
            Copula::Independence => u * v,
            Copula::Gaussian { rho } => {
                let (x, y) = (u.norm_inv().to_f64_lossy(), v.norm_inv().to_f64_lossy());
                T::lit(bvn_cdf(x, y, rho.to_f64_lossy()))
            }
            Copula::Fgm { theta } => u * v * (T::one() + theta * (T::one() - u) * (T::one() - v)),
        };
        Ok(c.max(T::zero()).min(u.min(v)))
    }

    fn d1(&self, u: T, v: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_closed_unit("v", v)?;
        Ok(self.d1_scores(u.norm_inv(), v.norm_inv()))
    }

    fn d2(&self, u: T, v: T) -> Result<T> {
        check_closed_unit("u", u)?;
        check_open_unit("v", v)?;
        Ok(self.d2_scores(u.norm_inv(), v.norm_inv()))
    }

    fn density(&self, u: T, v: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_open_unit("v", v)?;
        let eps = T::lit(DENSITY_CLAMP);
        let clamp = |x: T| x.max(eps).min(T::one() - eps);
        let (u, v) = match self {
            Copula::Gaussian { .. } => (clamp(u), clamp(v)),
            _ => (u, v),
        };
        Ok(self.density_scores(u.norm_inv(), v.norm_inv()))
    }

    fn conditional_inverse(&self, u: T, p: T) -> Result<T> {
        check_open_unit("u", u)?;
        check_open_unit("p", p)?;
        match *self {
            Copula::Independence => Ok(p),
            Copula::Gaussian { rho } => {
                let s = (T::one() - rho * rho).sqrt();
                Ok((rho * u.norm_inv() + s * p.norm_inv()).norm_cdf())
            }
            Copula::Fgm { theta } => {
                let two = T::lit(2.0);
                bisect_unit(p, |v| v * (T::one() + theta * (T::one() - v) * (T::one() - two * u)))
            }
        }
    }
}

impl<T: Real> fmt::Display for Copula<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Copula::Independence => write!(f, "independence"),
            Copula::Gaussian { rho } => write!(f, "gaussian:{rho}"),
            Copula::Fgm { theta } => write!(f, "fgm:{theta}"),
        }
    }
}

/// Parses `gaussian:<rho>`, `fgm:<theta>` or `independence`.
impl<T: Real> FromStr for Copula<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f, Some(p)),
            None => (s, None),
        };
        let number = || -> Result<T> {
            let p = param.ok_or_else(|| parse_err("missing parameter"))?;
            let ok = !p.is_empty()
                && p.chars()
                    .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
            let x: f64 = if ok { p.parse().ok() } else { None }.ok_or_else(|| parse_err("malformed number"))?;
            Ok(T::lit(x))
        };
        match family {
            "independence" if param.is_none() => Ok(Copula::Independence),
            "independence" => Err(parse_err("independence takes no parameter")),
            "gaussian" => Copula::gaussian(number()?),
            "fgm" => Copula::fgm(number()?),
            _ => Err(parse_err("unknown family (expected gaussian, fgm or independence)")),
        }
    }
}
