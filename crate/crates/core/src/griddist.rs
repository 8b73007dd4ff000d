//! One-dimensional distributions represented by a distribution function on a
//! grid of quantile nodes.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::io::sig17;
use crate::scalar::Real;

/// Default number of interior quantile nodes.
pub const DEFAULT_NODES: usize = 2001;
/// Probability left outside the interior nodes on each side.
pub const TAIL_PROBABILITY: f64 = 1e-6;
/// Unrepresented tail mass above which [`Moments::tail_warning`] is raised.
pub const TAIL_MASS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalTag<T> {
    pub mean: T,
    pub sd: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
    /// Set when the grid leaves more than [`TAIL_MASS_THRESHOLD`] unaccounted for.
    pub tail_warning: bool,
}

/// Distribution function sampled at strictly increasing nodes (0 below the
/// grid, 1 above). Between two nodes the normal score Φ⁻¹(F) is interpolated
/// linearly in x; segments touching F = 0 or F = 1 interpolate F itself.
///
/// Grids built by this crate place nodes at the quantiles of probabilities
/// Φ(z) for equispaced normal scores z spanning
/// [Φ⁻¹(1e-6), Φ⁻¹(1 - 1e-6)], then add one node on each side where the
/// distribution function reaches 0 and 1, at the distance that keeps the
/// density continuous at the outermost interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution<T> {
    nodes: Vec<T>,
    cdf: Vec<T>,
    /// Φ⁻¹ of the cdf values, ±∞ at 0 and 1.
    scores: Vec<T>,
    normal: Option<NormalTag<T>>,
}

/// Probabilities Φ(z_k) for `m` equispaced scores between the tail quantiles.
pub fn probit_spaced_levels<T: Real>(m: usize, tail: f64) -> Vec<T> {
    let lo = crate::scalar::norm_inv(tail);
    let hi = -lo;
    (0..m)
        .map(|k| T::lit(crate::scalar::norm_cdf(lo + (hi - lo) * k as f64 / (m - 1) as f64)))
        .collect()
}

impl<T: Real> GridDistribution<T> {
    /// Normal distribution with closed-form evaluation, plus its default grid.
    pub fn normal(mean: T, sd: T) -> Result<Self> {
        Self::normal_with_nodes(mean, sd, DEFAULT_NODES)
    }

    pub fn normal_with_nodes(mean: T, sd: T, m: usize) -> Result<Self> {
        if !(sd > T::zero()) || !sd.is_finite() || !mean.is_finite() {
            return Err(Error::domain("sd", sd.to_f64_lossy(), "finite and > 0"));
        }
        let mut d = Self::from_quantile_fn(|p| mean + sd * p.norm_inv(), m)?;
        d.normal = Some(NormalTag { mean, sd });
        Ok(d)
    }

    /// Grid distribution through the quantile function `q` on the default
    /// probability levels.
    pub fn from_quantile_fn(q: impl Fn(T) -> T, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 nodes, got {m}")));
        }
        let levels = probit_spaced_levels::<T>(m, TAIL_PROBABILITY);
        let nodes: Vec<T> = levels.iter().map(|&p| q(p)).collect();
        Self::from_interior(nodes, levels)
    }

    /// Builds a grid from interior samples of a distribution function,
    /// appending the zero and one end nodes.
    pub fn from_interior(nodes: Vec<T>, cdf: Vec<T>) -> Result<Self> {
        check_samples(&nodes, &cdf)?;
        let m = nodes.len();
        if m < 2 {
            return Err(Error::InvalidArgument("need at least two interior nodes".into()));
        }
        let slope = |a: usize, b: usize| (cdf[b] - cdf[a]) / (nodes[b] - nodes[a]);
        let reach = |mass: T, s: T, fallback: T| if s > T::zero() { mass / s } else { fallback };
        let mut out_x = Vec::with_capacity(m + 2);
        let mut out_f = Vec::with_capacity(m + 2);
        if cdf[0] > T::zero() {
            out_x.push(nodes[0] - reach(cdf[0], slope(0, 1), nodes[1] - nodes[0]));
            out_f.push(T::zero());
        }
        out_x.extend_from_slice(&nodes);
        out_f.extend_from_slice(&cdf);
        if cdf[m - 1] < T::one() {
            let top = T::one() - cdf[m - 1];
            out_x.push(nodes[m - 1] + reach(top, slope(m - 2, m - 1), nodes[m - 1] - nodes[m - 2]));
            out_f.push(T::one());
        }
        Ok(Self::assemble(out_x, out_f))
    }

    /// Wraps node/value pairs as given.
    pub fn from_samples(nodes: Vec<T>, cdf: Vec<T>) -> Result<Self> {
        check_samples(&nodes, &cdf)?;
        Ok(Self::assemble(nodes, cdf))
    }

    fn assemble(nodes: Vec<T>, cdf: Vec<T>) -> Self {
        let scores = cdf
            .iter()
            .map(|&f| {
                if f <= T::zero() {
                    T::neg_infinity()
                } else if f >= T::one() {
                    T::infinity()
                } else {
                    f.norm_inv()
                }
            })
            .collect();
        Self {
            nodes,
            cdf,
            scores,
            normal: None,
        }
    }

    /// Drops the closed-form tag, so evaluation uses the grid only.
    pub fn into_untagged(mut self) -> Self {
        self.normal = None;
        self
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn cdf_values(&self) -> &[T] {
        &self.cdf
    }

    pub fn normal_tag(&self) -> Option<NormalTag<T>> {
        self.normal
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// First and last node.
    pub fn support(&self) -> (T, T) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// True when the sampled values start at ≤ 1e-8 and end at ≥ 1 - 1e-8.
    pub fn covers_unit_mass(&self) -> bool {
        let tol = T::lit(TAIL_MASS_THRESHOLD);
        self.cdf[0] <= tol && T::one() - self.cdf[self.cdf.len() - 1] <= tol
    }

    pub fn eval_cdf(&self, x: T) -> T {
        if let Some(NormalTag { mean, sd }) = self.normal {
            return ((x - mean) / sd).norm_cdf();
        }
        self.interpolate_cdf(x)
    }

    fn interpolate_cdf(&self, x: T) -> T {
        match self.locate(x) {
            Located::Below => T::zero(),
            Located::Above => T::one(),
            Located::Nan => x,
            Located::In(i, t) => {
                let (s0, s1) = (self.scores[i - 1], self.scores[i]);
                if s0.is_finite() && s1.is_finite() {
                    (s0 + (s1 - s0) * t).norm_cdf()
                } else {
                    self.cdf[i - 1] + (self.cdf[i] - self.cdf[i - 1]) * t
                }
            }
        }
    }

    /// Segment i (between nodes i-1 and i) holding x, with its fraction t.
    fn locate(&self, x: T) -> Located<T> {
        let m = self.nodes.len();
        if x.is_nan() {
            return Located::Nan;
        }
        if x < self.nodes[0] {
            return Located::Below;
        }
        if x >= self.nodes[m - 1] {
            return Located::Above;
        }
        let i = self.nodes.partition_point(|&n| n <= x);
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        Located::In(i, (x - x0) / (x1 - x0))
    }

    /// Generalised inverse inf{x : F(x) ≥ p} of the interpolated distribution.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::domain("p", p.to_f64_lossy(), "(0, 1)"));
        }
        if let Some(NormalTag { mean, sd }) = self.normal {
            return Ok(mean + sd * p.norm_inv());
        }
        Ok(self.interpolate_quantile(p))
    }

    fn interpolate_quantile(&self, p: T) -> T {
        let m = self.nodes.len();
        let i = self.cdf.partition_point(|&f| f < p);
        if i == 0 {
            return self.nodes[0];
        }
        if i == m {
            return self.nodes[m - 1];
        }
        let (s0, s1) = (self.scores[i - 1], self.scores[i]);
        let t = if s0.is_finite() && s1.is_finite() {
            (p.norm_inv() - s0) / (s1 - s0)
        } else {
            (p - self.cdf[i - 1]) / (self.cdf[i] - self.cdf[i - 1])
        };
        let t = t.max(T::zero()).min(T::one());
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        x0 + (x1 - x0) * t
    }

    /// Normal score Φ⁻¹(F(x)); exact for normal-tagged distributions.
    pub fn score(&self, x: T) -> T {
        if let Some(NormalTag { mean, sd }) = self.normal {
            return (x - mean) / sd;
        }
        match self.locate(x) {
            Located::Below => T::neg_infinity(),
            Located::Above => T::infinity(),
            Located::Nan => x,
            Located::In(i, t) => {
                let (s0, s1) = (self.scores[i - 1], self.scores[i]);
                if s0.is_finite() && s1.is_finite() {
                    s0 + (s1 - s0) * t
                } else {
                    self.interpolate_cdf(x).norm_inv()
                }
            }
        }
    }

    /// Quantile at probability Φ(z), saturating at the end nodes.
    pub fn quantile_at_score(&self, z: T) -> T {
        if let Some(NormalTag { mean, sd }) = self.normal {
            return mean + sd * z;
        }
        let m = self.nodes.len();
        let i = self.scores.partition_point(|&s| s < z);
        if i == 0 {
            return self.nodes[0];
        }
        if i == m {
            return self.nodes[m - 1];
        }
        let (s0, s1) = (self.scores[i - 1], self.scores[i]);
        if !(s0.is_finite() && s1.is_finite()) {
            return self.interpolate_quantile(z.norm_cdf());
        }
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        x0 + (x1 - x0) * (z - s0) / (s1 - s0)
    }

    /// Mean, variance, skewness and excess kurtosis.
    ///
    /// Exact for normal tags; otherwise the interpolated distribution is
    /// integrated segment by segment with a three-point Gauss rule in the
    /// normal score.
    pub fn moments(&self) -> Moments<T> {
        let tail = self.cdf[0] + T::one() - self.cdf[self.cdf.len() - 1];
        let tail_warning = tail > T::lit(TAIL_MASS_THRESHOLD);
        if let Some(NormalTag { mean, sd }) = self.normal {
            return Moments {
                mean,
                variance: sd * sd,
                skewness: T::zero(),
                excess_kurtosis: T::zero(),
                tail_warning: false,
            };
        }
        // (x, probability) atoms exact for polynomials of degree ≤ 5 on every segment
        let (gx, gw) = crate::scalar::gauss_legendre(3);
        let mut atoms: Vec<(T, T)> = Vec::with_capacity(3 * self.nodes.len());
        for i in 1..self.nodes.len() {
            let mass = self.cdf[i] - self.cdf[i - 1];
            if !(mass > T::zero()) {
                continue;
            }
            let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
            let (s0, s1) = (self.scores[i - 1], self.scores[i]);
            let half = T::lit(0.5);
            if s0.is_finite() && s1.is_finite() {
                // density ∝ φ(s) in the score s, with x linear in s
                let pts: Vec<(T, T)> = gx
                    .iter()
                    .zip(&gw)
                    .map(|(&a, &w)| {
                        let s = (s0 + s1) * half + (s1 - s0) * half * T::lit(a);
                        let x = x0 + (x1 - x0) * (s - s0) / (s1 - s0);
                        (x, T::lit(w) * s.norm_pdf())
                    })
                    .collect();
                let total: T = pts.iter().map(|p| p.1).sum();
                atoms.extend(pts.into_iter().map(|(x, w)| (x, mass * w / total)));
            } else {
                for (&a, &w) in gx.iter().zip(&gw) {
                    atoms.push(((x0 + x1) * half + (x1 - x0) * half * T::lit(a), mass * T::lit(w) * half));
                }
            }
        }
        let mass: T = atoms.iter().map(|a| a.1).sum();
        let mean = atoms.iter().map(|&(x, w)| w * x).sum::<T>() / mass;
        let central = |r: i32| -> T { atoms.iter().map(|&(x, w)| w * (x - mean).powi(r)).sum::<T>() / mass };
        let variance = central(2);
        let skewness = central(3) / variance.powf(T::lit(1.5));
        let excess_kurtosis = central(4) / (variance * variance) - T::lit(3.0);
        Moments {
            mean,
            variance,
            skewness,
            excess_kurtosis,
            tail_warning,
        }
    }

    /// Writes `x,F` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,F")?;
        for (x, f) in self.nodes.iter().zip(&self.cdf) {
            writeln!(out, "{},{}", sig17(x.to_f64_lossy()), sig17(f.to_f64_lossy()))?;
        }
        Ok(())
    }
}

enum Located<T> {
    Below,
    Above,
    Nan,
    In(usize, T),
}

fn check_samples<T: Real>(nodes: &[T], cdf: &[T]) -> Result<()> {
    if nodes.len() != cdf.len() || nodes.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "nodes ({}) and cdf values ({}) must have equal nonzero length",
            nodes.len(),
            cdf.len()
        )));
    }
    if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "nodes must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if let Some(f) = cdf.iter().find(|f| !(**f >= T::zero() && **f <= T::one())) {
        return Err(Error::domain("cdf value", f.to_f64_lossy(), "[0, 1]"));
    }
    if let Some(w) = cdf.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::Monotonicity {
            at: 0.0,
            drop: (w[0] - w[1]).to_f64_lossy(),
        });
    }
    Ok(())
}
