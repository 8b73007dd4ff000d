//! Path simulation of Y_t = Y_{t-1} + ξ_t, Y_0 = 0, by conditional copula
//! sampling, and cross-sectional estimators over the simulated ensemble.
//!
//! Path i draws from a ChaCha20 generator seeded with `seed_from_u64(seed)`
//! and switched to stream i, so every path has its own substream and the
//! ensemble does not depend on the number of worker threads.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cconvolution::{iterate_process, IterateOptions};
use crate::copula::{BivariateCopula, Copula};
use crate::error::{Error, Result};
use crate::gaussian_cur::{variance_path, GaussianCurParams};
use crate::griddist::GridDistribution;
use crate::scalar::Real;

/// Law of the simulated process.
#[derive(Debug, Clone)]
pub enum Model<T: Real> {
    /// Normal innovations with a gaussian link; sampled in closed form.
    Gaussian(GaussianCurParams<T>),
    /// Innovations with distribution `h` linked to Y_{t-1} by `link`. The
    /// level distributions are computed by C-convolution.
    General { h: GridDistribution<T>, link: Copula<T> },
}

#[derive(Debug, Clone)]
pub struct SimulationConfig<T: Real> {
    pub model: Model<T>,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
}

/// Which series an estimator looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Series {
    Levels,
    Innovations,
}

impl std::str::FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "levels" => Ok(Series::Levels),
            "innovations" => Ok(Series::Innovations),
            other => Err(Error::InvalidArgument(format!(
                "unknown series {other:?} (expected levels or innovations)"
            ))),
        }
    }
}

/// Simulated levels, one row per path and one column per time t = 1, …, T.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<T: Real> {
    pub levels: DMatrix<T>,
}

impl<T: Real> PathEnsemble<T> {
    pub fn paths(&self) -> usize {
        self.levels.nrows()
    }

    pub fn steps(&self) -> usize {
        self.levels.ncols()
    }

    fn check_time(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps() {
            return Err(Error::Index {
                what: "t",
                index: t,
                valid: format!("1..={}", self.steps()),
            });
        }
        Ok(())
    }

    /// Y_t across paths.
    pub fn level(&self, t: usize) -> Result<Vec<T>> {
        self.check_time(t)?;
        Ok(self.levels.column(t - 1).iter().copied().collect())
    }

    /// ξ_t = Y_t − Y_{t-1} across paths.
    pub fn innovation(&self, t: usize) -> Result<Vec<T>> {
        self.check_time(t)?;
        if t == 1 {
            return self.level(1);
        }
        let (a, b) = (self.levels.column(t - 1), self.levels.column(t - 2));
        Ok(a.iter().zip(b.iter()).map(|(&y, &x)| y - x).collect())
    }

    pub fn series(&self, t: usize, of: Series) -> Result<Vec<T>> {
        match of {
            Series::Levels => self.level(t),
            Series::Innovations => self.innovation(t),
        }
    }
}

/// Uniform draw on the open interval (0, 1) from the top 53 bits.
fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn path_rng(seed: u64, path: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Simulates `paths` independent paths of length `steps`.
///
/// At t ≥ 2: u = F_{t-1}(Y_{t-1}), p ~ U(0, 1), v = C⁻¹(p | u),
/// ξ_t = H⁻¹(v). In the gaussian model this is done on normal scores:
/// ξ_t = σ(ρ Y_{t-1}/V_{t-1} + √(1 − ρ²) Φ⁻¹(p)).
pub fn simulate_paths<T: Real>(cfg: &SimulationConfig<T>) -> Result<PathEnsemble<T>> {
    if cfg.paths == 0 || cfg.steps == 0 {
        return Err(Error::InvalidArgument("paths and steps must be >= 1".into()));
    }
    let rows: Vec<Vec<T>> = match &cfg.model {
        Model::Gaussian(p) => {
            let vp = variance_path(*p, cfg.steps)?;
            let (s, rho) = (p.sigma_xi, p.rho);
            let tilt = (T::one() - rho * rho).sqrt();
            (0..cfg.paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(cfg.seed, i);
                    let mut y = s * T::lit(open_unit(&mut rng)).norm_inv();
                    let mut row = Vec::with_capacity(cfg.steps);
                    row.push(y);
                    for t in 2..=cfg.steps {
                        let x = y / vp.v[t - 2];
                        let z = rho * x + tilt * T::lit(open_unit(&mut rng)).norm_inv();
                        y += s * z;
                        row.push(y);
                    }
                    row
                })
                .collect()
        }
        Model::General { h, link } => {
            let opts = IterateOptions {
                copula_grid: None,
                ..IterateOptions::default()
            };
            let laws = iterate_process(h, link, cfg.steps, &opts)?.distributions;
            let tiny = T::lit(1e-15);
            let clamp = |x: T| x.max(tiny).min(T::one() - tiny);
            (0..cfg.paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(cfg.seed, i);
                    let mut y = h.quantile(T::lit(open_unit(&mut rng)))?;
                    let mut row = Vec::with_capacity(cfg.steps);
                    row.push(y);
                    for t in 2..=cfg.steps {
                        let u = clamp(laws[t - 2].eval_cdf(y));
                        let v = link
                            .conditional_inverse(u, T::lit(open_unit(&mut rng)))
                            .map_err(|e| e.at_step(t))?;
                        y += h.quantile(clamp(v))?;
                        row.push(y);
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(PathEnsemble {
        levels: DMatrix::from_fn(cfg.paths, cfg.steps, |i, t| rows[i][t]),
    })
}

/// Sample moments of one cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMoments<T> {
    pub mean: T,
    /// Unbiased (n − 1) variance.
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

pub fn sample_moments<T: Real>(xs: &[T]) -> SampleMoments<T> {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let central = |r: i32| xs.iter().map(|&x| (x - mean).powi(r)).sum::<T>() / n;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    SampleMoments {
        mean,
        variance: m2 * n / (n - T::one()),
        skewness: m3 / m2.powf(T::lit(1.5)),
        excess_kurtosis: m4 / (m2 * m2) - T::lit(3.0),
    }
}

/// Pearson correlation.
pub fn correlation<T: Real>(x: &[T], y: &[T]) -> T {
    let n = T::from_usize_lossy(x.len());
    let (mx, my) = (x.iter().copied().sum::<T>() / n, y.iter().copied().sum::<T>() / n);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    sxy / (sxx * syy).sqrt()
}

/// Cross-sectional correlation of the series at t and t+k, with the
/// large-sample standard error (1 − r²)/√n.
pub fn empirical_acf<T: Real>(ens: &PathEnsemble<T>, t: usize, k: usize, of: Series) -> Result<(T, T)> {
    if k == 0 {
        return Err(Error::InvalidArgument("lag k must be >= 1".into()));
    }
    let (a, b) = (ens.series(t, of)?, ens.series(t + k, of)?);
    let r = correlation(&a, &b);
    let se = (T::one() - r * r) / T::from_usize_lossy(a.len()).sqrt();
    Ok((r, se))
}

/// Spearman's rank correlation with the standard error
/// (1 − r²)√((1 + r²/2)/(n − 3)).
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let r = correlation(&ranks(x), &ranks(y));
    let n = T::from_usize_lossy(x.len());
    let se = (T::one() - r * r) * ((T::one() + r * r / T::lit(2.0)) / (n - T::lit(3.0))).sqrt();
    (r, se)
}

fn ranks<T: Real>(x: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut r = vec![T::zero(); x.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = T::from_usize_lossy(rank + 1);
    }
    r
}

/// Kolmogorov-Smirnov distance between the sample and `cdf`.
pub fn ks_statistic<T: Real>(xs: &[T], cdf: impl Fn(T) -> T) -> T {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::from_usize_lossy(sorted.len());
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = T::from_usize_lossy(i) / n;
            let hi = T::from_usize_lossy(i + 1) / n;
            (f - lo).max(hi - f)
        })
        .fold(T::zero(), T::max)
}

/// 1% critical value of the KS statistic, ≈ 1.628/√n.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianityCheck<T> {
    pub skewness: T,
    pub excess_kurtosis: T,
    pub ks_statistic: T,
}

/// Shape moments of Y_t and its KS distance to `reference` (for the
/// gaussian model, N(0, V_t²)).
pub fn gaussianity_check<T: Real>(
    ens: &PathEnsemble<T>,
    t: usize,
    reference: &GridDistribution<T>,
) -> Result<GaussianityCheck<T>> {
    let y = ens.level(t)?;
    let m = sample_moments(&y);
    Ok(GaussianityCheck {
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        ks_statistic: ks_statistic(&y, |x| reference.eval_cdf(x)),
    })
}
