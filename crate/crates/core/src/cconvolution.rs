//! C-convolution: the law of Y_t = Y_{t-1} + ξ_t when (Y_{t-1}, ξ_t) has
//! copula C, and the copula it induces between consecutive levels.
//!
//! With w the uniform rank of Y_{t-1},
//!
//! F_t(y) = ∫₀¹ D1C(w, H(y − F_{t-1}⁻¹(w))) dw,
//! C_{t-1,t}(u, v) = ∫₀ᵘ D1C(w, H(F_t⁻¹(v) − F_{t-1}⁻¹(w))) dw.
//!
//! Both w-integrals are taken in the normal score of w.

use rayon::prelude::*;

use crate::copula::{Copula, DiscretizedCopula, CELL_RULE_ORDER};
use crate::error::{Error, Result};
use crate::griddist::{probit_spaced_levels, GridDistribution, DEFAULT_NODES, TAIL_PROBABILITY};
use crate::quadrature::{CellRule, ScoreGrid};
use crate::scalar::Real;

/// Largest decrease of a computed distribution function that is treated as
/// rounding noise.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-9;

/// Largest deviation of a transition copula's margins from uniform.
pub const MARGIN_TOLERANCE: f64 = 1e-4;

/// Numerical settings of [`iterate_process`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterateOptions {
    /// Nodes of the score-space rule over w.
    pub quad_n: usize,
    /// Interior nodes of every computed distribution.
    pub out_m: usize,
    /// Grid size of the recorded transition copulas; `None` skips them.
    pub copula_grid: Option<usize>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            quad_n: 512,
            out_m: DEFAULT_NODES,
            copula_grid: Some(64),
        }
    }
}

/// Output of [`iterate_process`]: F_1, …, F_T and C_{t-1,t} for t = 2, …, T.
#[derive(Debug, Clone)]
pub struct ProcessPath<T: Real> {
    pub distributions: Vec<GridDistribution<T>>,
    pub transitions: Vec<DiscretizedCopula<T>>,
}

struct Convolver<'a, T: Real> {
    prev_quantiles: Vec<T>,
    grid: ScoreGrid<T>,
    mass: T,
    h: &'a GridDistribution<T>,
    link: &'a Copula<T>,
}

impl<'a, T: Real> Convolver<'a, T> {
    fn new(f_prev: &GridDistribution<T>, h: &'a GridDistribution<T>, link: &'a Copula<T>, quad_n: usize) -> Self {
        let grid = ScoreGrid::new(quad_n);
        let prev_quantiles = grid.scores.iter().map(|&z| f_prev.quantile_at_score(z)).collect();
        let mass = grid.weights.iter().copied().sum();
        Self {
            prev_quantiles,
            grid,
            mass,
            h,
            link,
        }
    }

    fn cdf(&self, y: T) -> T {
        let total: T = self
            .grid
            .scores
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.prev_quantiles)
            .map(|((&z, &w), &q)| w * self.link.d1_scores(z, self.h.score(y - q)))
            .sum();
        total / self.mass
    }
}

/// Distribution of Y_{t-1} + ξ_t with Y_{t-1} ~ `f_prev`, ξ_t ~ `h` and
/// copula `link` between them.
///
/// The w-integral uses `quad_n` trapezoid nodes in the normal score of w;
/// the result is sampled on `out_m` nodes placed at its own probit-spaced
/// quantiles.
pub fn c_convolve<T: Real>(
    f_prev: &GridDistribution<T>,
    h: &GridDistribution<T>,
    link: &Copula<T>,
    quad_n: usize,
    out_m: usize,
) -> Result<GridDistribution<T>> {
    if quad_n < 64 {
        return Err(Error::InvalidArgument(format!("quad_n must be >= 64, got {quad_n}")));
    }
    if out_m < 101 {
        return Err(Error::InvalidArgument(format!("out_m must be >= 101, got {out_m}")));
    }
    let conv = Convolver::new(f_prev, h, link, quad_n);

    // coarse pass to place the output nodes
    let (a0, a1) = f_prev.support();
    let (b0, b1) = h.support();
    let (lo, hi) = (a0 + b0, a1 + b1);
    let pre_m = 2 * out_m;
    let step = (hi - lo) / T::from_usize_lossy(pre_m - 1);
    let xs: Vec<T> = (0..pre_m).map(|i| lo + step * T::from_usize_lossy(i)).collect();
    let fs = monotone(&xs, xs.par_iter().map(|&x| conv.cdf(x)).collect())?;

    let mut nodes: Vec<T> = Vec::with_capacity(out_m);
    for p in probit_spaced_levels::<T>(out_m, TAIL_PROBABILITY) {
        let i = fs.partition_point(|&f| f < p);
        let x = if i == 0 {
            xs[0]
        } else if i == pre_m {
            xs[pre_m - 1]
        } else {
            let (f0, f1) = (fs[i - 1], fs[i]);
            xs[i - 1] + step * (p - f0) / (f1 - f0)
        };
        if nodes.last().is_none_or(|&last| x > last) {
            nodes.push(x);
        }
    }
    let values = monotone(&nodes, nodes.par_iter().map(|&x| conv.cdf(x)).collect())?;
    GridDistribution::from_interior(nodes, values)
}

/// Checks that `fs` is nondecreasing up to [`MONOTONICITY_TOLERANCE`] and
/// removes the remaining noise with a running maximum.
fn monotone<T: Real>(xs: &[T], mut fs: Vec<T>) -> Result<Vec<T>> {
    let tol = T::lit(MONOTONICITY_TOLERANCE);
    let mut top = T::zero();
    for (f, &x) in fs.iter_mut().zip(xs) {
        if top - *f > tol {
            return Err(Error::Monotonicity {
                at: x.to_f64_lossy(),
                drop: (top - *f).to_f64_lossy(),
            });
        }
        *f = f.max(top).min(T::one());
        top = *f;
    }
    Ok(fs)
}

/// Copula of (Y_{t-1}, Y_t) on an n×n grid.
///
/// `f_next` must be the C-convolution of `f_prev`, `h` and `link`; an
/// inconsistent pair shows up as a margin violation.
pub fn transition_copula<T: Real>(
    f_prev: &GridDistribution<T>,
    f_next: &GridDistribution<T>,
    h: &GridDistribution<T>,
    link: &Copula<T>,
    n: usize,
) -> Result<DiscretizedCopula<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size must be >= 2, got {n}")));
    }
    // interior edges F_next⁻¹(j/n); the last edge is +∞
    let mut edges: Vec<Option<T>> = (1..n)
        .map(|j| {
            f_next
                .quantile(T::from_usize_lossy(j) / T::from_usize_lossy(n))
                .map(Some)
        })
        .collect::<Result<_>>()?;
    edges.push(None);
    let rule = CellRule::<T>::new(n, CELL_RULE_ORDER);
    let scale = T::from_usize_lossy(n * n);
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![T::zero(); n];
            for node in rule.cell(i) {
                let q = f_prev.quantile_at_score(node.score);
                let mut prev = T::zero();
                for (j, slot) in row.iter_mut().enumerate() {
                    let next = match edges[j] {
                        Some(y) => link.d1_scores(node.score, h.score(y - q)),
                        None => T::one(),
                    };
                    *slot += node.weight * (next - prev);
                    prev = next;
                }
            }
            row.into_iter().map(|m| (m * scale).max(T::zero())).collect()
        })
        .collect();
    let copula = DiscretizedCopula::from_cell_values(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))?;
    let (r, c) = copula.margin_deviation();
    let worst = r.max(c);
    if worst > T::lit(MARGIN_TOLERANCE) {
        return Err(Error::MarginViolation {
            deviation: worst.to_f64_lossy(),
            tolerance: MARGIN_TOLERANCE,
        });
    }
    Ok(copula)
}

/// Runs the recursion F_1 = H, F_t = C-convolution of F_{t-1} and H, for
/// `steps` time points, recording the transition copulas C_{t-1,t}, t ≥ 2.
pub fn iterate_process<T: Real>(
    h: &GridDistribution<T>,
    link: &Copula<T>,
    steps: usize,
    opts: &IterateOptions,
) -> Result<ProcessPath<T>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let mut distributions = vec![h.clone()];
    let mut transitions = Vec::new();
    for t in 2..=steps {
        let prev = &distributions[t - 2];
        let next = c_convolve(prev, h, link, opts.quad_n, opts.out_m).map_err(|e| e.at_step(t))?;
        if let Some(n) = opts.copula_grid {
            transitions.push(transition_copula(prev, &next, h, link, n).map_err(|e| e.at_step(t))?);
        }
        distributions.push(next);
    }
    Ok(ProcessPath {
        distributions,
        transitions,
    })
}
