//! Closed-form results for the gaussian case: ξ_t ~ N(0, σ²) linked to
//! Y_{t-1} by a gaussian copula with parameter ρ, so that Y_t ~ N(0, V_t²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Innovation standard deviation σ_ξ and copula parameter ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCurParams<T> {
    pub sigma_xi: T,
    pub rho: T,
}

impl<T: Real> GaussianCurParams<T> {
    pub fn new(sigma_xi: T, rho: T) -> Result<Self> {
        if !(sigma_xi > T::zero()) || !sigma_xi.is_finite() {
            return Err(Error::domain("sigma_xi", sigma_xi.to_f64_lossy(), "finite and > 0"));
        }
        if !(rho.abs() < T::one()) {
            return Err(Error::domain("rho", rho.to_f64_lossy(), "|rho| < 1"));
        }
        Ok(Self { sigma_xi, rho })
    }

    /// True when ρ ∈ (−1, 0), where the level variance stays bounded.
    pub fn has_stationary_limit(&self) -> bool {
        self.rho < T::zero()
    }

    fn require_limit(&self) -> Result<()> {
        if self.has_stationary_limit() {
            Ok(())
        } else {
            Err(Error::domain("rho", self.rho.to_f64_lossy(), "(-1, 0)"))
        }
    }
}

/// Standard deviations V_1, …, V_T of the levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariancePath<T> {
    pub params: GaussianCurParams<T>,
    pub v: Vec<T>,
}

/// V_t² = tσ² + 2ρσ(V_1 + … + V_{t-1}), with V_1 = σ.
pub fn variance_path<T: Real>(p: GaussianCurParams<T>, t_max: usize) -> Result<VariancePath<T>> {
    if t_max == 0 {
        return Err(Error::InvalidArgument("path length must be >= 1".into()));
    }
    let s = p.sigma_xi;
    let mut v = Vec::with_capacity(t_max);
    v.push(s);
    let mut running = s;
    for t in 2..=t_max {
        let var = T::from_usize_lossy(t) * s * s + T::lit(2.0) * p.rho * s * running;
        if !(var > T::zero()) {
            return Err(Error::NegativeVariance {
                t,
                value: var.to_f64_lossy(),
            });
        }
        let vt = var.sqrt();
        v.push(vt);
        running += vt;
    }
    Ok(VariancePath { params: p, v })
}

/// lim V_t = −σ/(2ρ) for ρ ∈ (−1, 0).
pub fn limit_stddev<T: Real>(p: GaussianCurParams<T>) -> Result<T> {
    p.require_limit()?;
    Ok(-p.sigma_xi / (T::lit(2.0) * p.rho))
}

impl<T: Real> VariancePath<T> {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// V_t, 1-based.
    pub fn stddev(&self, t: usize) -> Result<T> {
        self.check(t, 1, "t")?;
        Ok(self.v[t - 1])
    }

    fn check(&self, index: usize, lo: usize, what: &'static str) -> Result<()> {
        if index < lo || index > self.v.len() {
            return Err(Error::Index {
                what,
                index,
                valid: format!("{lo}..={}", self.v.len()),
            });
        }
        Ok(())
    }

    /// Product of adjacent correlations from t to t+k, 1 when k = 0.
    fn tau_span(&self, t: usize, k: usize) -> T {
        let (s, rho) = (self.params.sigma_xi, self.params.rho);
        (t..t + k).fold(T::one(), |acc, a| acc * (self.v[a - 1] + rho * s) / self.v[a])
    }
}

/// Correlation of (Y_t, Y_{t+1}): (V_t + ρσ)/V_{t+1}.
pub fn tau_adjacent<T: Real>(vp: &VariancePath<T>, t: usize) -> Result<T> {
    tau_lag(vp, t, 1)
}

/// Correlation of (Y_t, Y_{t+k}), the product of the adjacent correlations.
pub fn tau_lag<T: Real>(vp: &VariancePath<T>, t: usize, k: usize) -> Result<T> {
    vp.check(t, 1, "t")?;
    if k == 0 {
        return Err(Error::InvalidArgument("lag k must be >= 1".into()));
    }
    vp.check(t + k, 2, "t + k")?;
    Ok(vp.tau_span(t, k))
}

/// (1 − 2ρ²)^k.
pub fn level_acf_limit<T: Real>(p: GaussianCurParams<T>, k: usize) -> Result<T> {
    p.require_limit()?;
    if k == 0 {
        return Err(Error::InvalidArgument("lag k must be >= 1".into()));
    }
    Ok(adjacent_limit(p.rho).powi(k as i32))
}

fn adjacent_limit<T: Real>(rho: T) -> T {
    T::one() - T::lit(2.0) * rho * rho
}

/// E[ξ_t ξ_{t+k}] at finite t, for t ≥ 2 and k ≥ 1.
pub fn innovation_autocov<T: Real>(vp: &VariancePath<T>, t: usize, k: usize) -> Result<T> {
    vp.check(t, 2, "t")?;
    if k == 0 {
        return Err(Error::InvalidArgument("lag k must be >= 1".into()));
    }
    vp.check(t + k, 3, "t + k")?;
    let v = |a: usize| vp.v[a - 1];
    let tau = |a: usize, b: usize| vp.tau_span(a, b - a);
    Ok(tau(t, t + k) * v(t) * v(t + k)
        - tau(t, t + k - 1) * v(t) * v(t + k - 1)
        - tau(t - 1, t + k) * v(t - 1) * v(t + k)
        + tau(t - 1, t + k - 1) * v(t - 1) * v(t + k - 1))
}

/// −ρ²(1 − 2ρ²)^{k−1}.
pub fn innovation_acf_limit<T: Real>(p: GaussianCurParams<T>, k: usize) -> Result<T> {
    p.require_limit()?;
    if k == 0 {
        return Err(Error::InvalidArgument("lag k must be >= 1".into()));
    }
    Ok(-p.rho * p.rho * adjacent_limit(p.rho).powi(k as i32 - 1))
}

/// lim τ_{t,t+1} = 1 − 2ρ² for ρ ∈ (−1, 0).
pub fn tau_adjacent_limit<T: Real>(p: GaussianCurParams<T>) -> Result<T> {
    p.require_limit()?;
    Ok(adjacent_limit(p.rho))
}
