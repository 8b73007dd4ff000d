//! Quadrature rules on the unit interval expressed in normal scores.
//!
//! Copula integrands are smooth in the normal score z = Φ⁻¹(u) but can be
//! steep or singular at u ∈ {0, 1}. Integrating ∫₀¹ f(u) du as
//! ∫ f(Φ(z)) φ(z) dz avoids both problems: [`ScoreGrid`] is a trapezoid rule
//! on a truncated uniform z-grid (spectrally accurate for analytic
//! integrands) and [`CellRule`] applies Gauss-Legendre inside the z-image of
//! each cell [i/n, (i+1)/n].

use crate::scalar::{gauss_legendre, norm_cdf, norm_inv, norm_pdf, Real};

/// Truncation of the normal-score line; Φ(-10) ≈ 7.6e-24.
pub const SCORE_LIMIT: f64 = 10.0;

/// Trapezoid rule on an equispaced grid of normal scores in [-L, L].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid<T> {
    /// Normal scores z_k.
    pub scores: Vec<T>,
    /// Φ(z_k).
    pub points: Vec<T>,
    /// φ(z_k)·Δz, halved at both ends.
    pub weights: Vec<T>,
}

impl<T: Real> ScoreGrid<T> {
    pub fn new(len: usize) -> Self {
        Self::with_limit(len, SCORE_LIMIT)
    }

    pub fn with_limit(len: usize, limit: f64) -> Self {
        assert!(len >= 2, "score grid needs at least two nodes");
        let step = 2.0 * limit / (len - 1) as f64;
        let mut scores = Vec::with_capacity(len);
        let mut points = Vec::with_capacity(len);
        let mut weights = Vec::with_capacity(len);
        for k in 0..len {
            let z = -limit + step * k as f64;
            let end = k == 0 || k + 1 == len;
            scores.push(T::lit(z));
            points.push(T::lit(norm_cdf(z)));
            weights.push(T::lit(norm_pdf(z) * step * if end { 0.5 } else { 1.0 }));
        }
        Self {
            scores,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Normal scores of the cell edges i/n, i = 0..=n (±∞ at the ends).
pub fn cell_edge_scores<T: Real>(n: usize) -> Vec<T> {
    (0..=n)
        .map(|i| match i {
            0 => T::neg_infinity(),
            i if i == n => T::infinity(),
            i => T::lit(norm_inv(i as f64 / n as f64)),
        })
        .collect()
}

/// One node of a [`CellRule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellNode<T> {
    pub cell: usize,
    pub score: T,
    pub weight: T,
}

/// Composite Gauss-Legendre rule over the cells of a uniform n-grid on
/// [0, 1], with the nodes of cell i placed in normal-score space on
/// [Φ⁻¹(i/n), Φ⁻¹((i+1)/n)] (truncated at ±[`SCORE_LIMIT`]). Cells wider
/// than one score unit are split into unit panels.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRule<T> {
    pub cells: usize,
    pub per_panel: usize,
    pub nodes: Vec<CellNode<T>>,
    offsets: Vec<usize>,
}

impl<T: Real> CellRule<T> {
    pub fn new(cells: usize, per_panel: usize) -> Self {
        let (gx, gw) = gauss_legendre(per_panel);
        let edge = |i: usize| -> f64 {
            let z = norm_inv(i as f64 / cells as f64);
            z.clamp(-SCORE_LIMIT, SCORE_LIMIT)
        };
        let mut nodes = Vec::with_capacity(cells * per_panel);
        let mut offsets = Vec::with_capacity(cells + 1);
        for cell in 0..cells {
            offsets.push(nodes.len());
            let (a, b) = (edge(cell), edge(cell + 1));
            let panels = ((b - a).ceil() as usize).max(1);
            let width = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + width * p as f64;
                let (mid, half) = (lo + width / 2.0, width / 2.0);
                for (&x, &w) in gx.iter().zip(&gw) {
                    let z = mid + half * x;
                    nodes.push(CellNode {
                        cell,
                        score: T::lit(z),
                        weight: T::lit(w * half * norm_pdf(z)),
                    });
                }
            }
        }
        offsets.push(nodes.len());
        Self {
            cells,
            per_panel,
            nodes,
            offsets,
        }
    }

    /// Nodes belonging to one cell.
    pub fn cell(&self, i: usize) -> &[CellNode<T>] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }
}
