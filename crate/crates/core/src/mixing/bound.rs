use nalgebra::RealField;
use rayon::prelude::*;
use serde::Serialize;

use super::spectral::{gaussian_l2_norm, l2_norm_centered, maximal_correlation, spectral_decomposition};
use crate::copula::{iterate_lag_copula, BivariateCopula, Copula, CopulaOperand};
use crate::error::{Error, Result};
use crate::gaussian_cur::{tau_adjacent, tau_adjacent_limit, variance_path, GaussianCurParams};
use crate::scalar::Real;

/// Correlations above this are flagged as near-critical.
pub const NEAR_CRITICAL: f64 = 0.9;

/// Largest density asymmetry accepted by [`check_theorem_conditions`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Maximal correlations, L² norms and the geometric bound on β_k over a
/// window of adjacent-time copulas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport<T> {
    pub eta_per_t: Vec<T>,
    pub eta_hat: T,
    pub l2_norms: Vec<T>,
    /// ½ η̂^{k−1} sup_t ‖c_{t,t+1} − 1‖ for k = 1, …, k_max.
    pub beta_bounds: Vec<T>,
    pub verdict: bool,
    pub flags: Vec<String>,
}

fn assemble<T: Real>(
    eta_per_t: Vec<T>,
    l2_norms: Vec<T>,
    eta_hat: T,
    sup_l2: T,
    k_max: usize,
    flags: Vec<String>,
) -> MixingReport<T> {
    let mut beta_bounds = Vec::with_capacity(k_max);
    let mut b = T::lit(0.5) * sup_l2;
    for _ in 0..k_max {
        beta_bounds.push(b);
        b *= eta_hat;
    }
    MixingReport {
        verdict: eta_hat < T::one() && sup_l2.is_finite(),
        eta_per_t,
        eta_hat,
        l2_norms,
        beta_bounds,
        flags,
    }
}

fn sup<T: Real>(xs: &[T]) -> T {
    xs.iter()
        .fold(T::zero(), |a, &b| if b > a || b.is_nan() { b } else { a })
}

fn near_critical_flag<T: Real>(label: &str, eta: T) -> Option<String> {
    (eta > T::lit(NEAR_CRITICAL)).then(|| {
        format!("{label}: eta = {eta} > {NEAR_CRITICAL}, near-critical (grid spectrum unreliable, closed form used where available)")
    })
}

/// Bound on β_k from a window of adjacent-time copulas c_{t,t+1}.
pub fn beta_bound<'a, T: Real + RealField>(
    window: &[CopulaOperand<'a, T>],
    k_max: usize,
    n: usize,
) -> Result<MixingReport<T>> {
    if window.is_empty() {
        return Err(Error::InvalidArgument("copula window is empty".into()));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let per: Vec<(T, T)> = window
        .par_iter()
        .enumerate()
        .map(|(i, &c)| {
            let eta = maximal_correlation(c, n).map_err(|e| e.at_step(i + 1))?;
            let l2 = l2_norm_centered(c, n).map_err(|e| e.at_step(i + 1))?;
            Ok((eta, l2))
        })
        .collect::<Result<_>>()?;
    let (eta_per_t, l2_norms): (Vec<T>, Vec<T>) = per.into_iter().unzip();
    let flags = eta_per_t
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| near_critical_flag(&format!("element {}", i + 1), e))
        .collect();
    let (eta_hat, sup_l2) = (sup(&eta_per_t), sup(&l2_norms));
    Ok(assemble(eta_per_t, l2_norms, eta_hat, sup_l2, k_max, flags))
}

/// Adjacent-time copulas C_{t,t+1}, t = 1, …, window, of the gaussian model.
pub fn gaussian_cur_chain<T: Real>(p: GaussianCurParams<T>, window: usize) -> Result<Vec<Copula<T>>> {
    let vp = variance_path(p, window + 1)?;
    (1..=window).map(|t| Copula::gaussian(tau_adjacent(&vp, t)?)).collect()
}

/// [`MixingReport`] of the gaussian model over t = 1, …, window.
///
/// η̂ also covers every t beyond the window: for ρ ∈ (−1, 0) the adjacent
/// correlation converges to 1 − 2ρ², which is included in the supremum;
/// otherwise it tends to 1 and the verdict is false.
pub fn gaussian_cur_report<T: Real>(p: GaussianCurParams<T>, window: usize, k_max: usize) -> Result<MixingReport<T>> {
    if window == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("window and k_max must be >= 1".into()));
    }
    let vp = variance_path(p, window + 1)?;
    let taus: Vec<T> = (1..=window).map(|t| tau_adjacent(&vp, t)).collect::<Result<_>>()?;
    let eta_per_t: Vec<T> = taus.iter().map(|t| t.abs()).collect();
    let l2_norms: Vec<T> = taus.iter().map(|&t| gaussian_l2_norm(t)).collect();
    let mut flags: Vec<String> = eta_per_t
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| near_critical_flag(&format!("t = {}", i + 1), e))
        .collect();
    let (tail_eta, tail_l2) = match tau_adjacent_limit(p) {
        Ok(lim) => {
            flags.push(format!("tail: tau_(t,t+1) -> 1 - 2 rho^2 = {lim}, included in eta_hat"));
            (lim.abs(), gaussian_l2_norm(lim))
        }
        Err(_) => {
            flags.push("tail: rho >= 0, tau_(t,t+1) -> 1 and the conditions fail beyond the window".into());
            (T::one(), T::infinity())
        }
    };
    let eta_hat = sup(&eta_per_t).max(tail_eta);
    let sup_l2 = sup(&l2_norms).max(tail_l2);
    Ok(assemble(eta_per_t, l2_norms, eta_hat, sup_l2, k_max, flags))
}

/// ‖c_{t,t+k} − 1‖ from the ∗-product of the first k copulas of `chain`.
pub fn lag_density_norm<T: Real>(chain: &[Copula<T>], k: usize, n: usize) -> Result<T> {
    check_lag(chain, k)?;
    if chain[..k].iter().any(Copula::is_independence) {
        return Ok(T::zero());
    }
    if k == 1 {
        return l2_norm_centered(&chain[0], n);
    }
    let d = iterate_lag_copula(&chain[..k], n)?;
    l2_norm_centered(&d, n)
}

/// ‖c_{t,t+k} − 1‖ = √(Σ_i Π_j λ_{i,t+j}²), valid when the copulas of the
/// chain share their eigenfunctions (as gaussian copulas do).
pub fn lag_density_norm_spectral<T: Real + RealField>(chain: &[Copula<T>], k: usize, n: usize) -> Result<T> {
    check_lag(chain, k)?;
    let spectra: Vec<Vec<T>> = chain[..k]
        .iter()
        .map(|c| spectral_decomposition(c, n).map(|d| d.singular_values))
        .collect::<Result<_>>()?;
    let modes = spectra.iter().map(Vec::len).min().unwrap_or(0);
    let total: T = (0..modes)
        .map(|i| spectra.iter().fold(T::one(), |acc, s| acc * s[i] * s[i]))
        .sum();
    Ok(num_traits::Float::sqrt(total))
}

fn check_lag<T: Real>(chain: &[Copula<T>], k: usize) -> Result<()> {
    if k == 0 || k > chain.len() {
        return Err(Error::Index {
            what: "lag k",
            index: k,
            valid: format!("1..={}", chain.len()),
        });
    }
    Ok(())
}

/// Per-copula outcome of [`check_theorem_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementCheck<T> {
    pub symmetry_residual: T,
    pub symmetric: bool,
    pub l2_norm: T,
    pub square_integrable: bool,
    pub eta: T,
    pub eta_below_one: bool,
}

/// Hypotheses of the mixing theorem checked over a window of copulas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport<T> {
    pub elements: Vec<ElementCheck<T>>,
    pub eta_hat: T,
    pub verdict: bool,
    pub flags: Vec<String>,
}

/// Checks density symmetry, square integrability and η_t < 1 for each
/// copula, and η̂ < 1 over the window. Numerical failures are reported in
/// the record rather than returned as errors.
pub fn check_theorem_conditions<T: Real + RealField>(chain: &[Copula<T>], n: usize) -> ConditionsReport<T> {
    let mut flags = Vec::new();
    let elements: Vec<ElementCheck<T>> = chain
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let symmetry_residual = symmetry_residual(c, n);
            let l2_norm = l2_norm_centered(c, n).unwrap_or_else(|e| {
                flags.push(format!("element {}: {e}", i + 1));
                T::infinity()
            });
            let eta = maximal_correlation(c, n).unwrap_or_else(|e| {
                flags.push(format!("element {}: {e}", i + 1));
                T::one()
            });
            flags.extend(near_critical_flag(&format!("element {}", i + 1), eta));
            ElementCheck {
                symmetric: symmetry_residual <= T::lit(SYMMETRY_TOLERANCE),
                symmetry_residual,
                square_integrable: l2_norm.is_finite(),
                l2_norm,
                eta_below_one: eta < T::one(),
                eta,
            }
        })
        .collect();
    let eta_hat = sup(&elements.iter().map(|e| e.eta).collect::<Vec<_>>());
    let verdict = !elements.is_empty()
        && elements
            .iter()
            .all(|e| e.symmetric && e.square_integrable && e.eta_below_one)
        && eta_hat < T::one();
    if elements.is_empty() {
        flags.push("empty chain".into());
    }
    ConditionsReport {
        elements,
        eta_hat,
        verdict,
        flags,
    }
}

/// max |c(u_i, u_j) − c(u_j, u_i)| over cell midpoints of an n-grid.
fn symmetry_residual<T: Real>(c: &Copula<T>, n: usize) -> T {
    let nt = T::from_usize_lossy(n.max(1));
    let mid = |i: usize| (T::from_usize_lossy(i) + T::lit(0.5)) / nt;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst = T::zero();
            for j in 0..i {
                let (a, b) = (c.density(mid(i), mid(j)), c.density(mid(j), mid(i)));
                let r = match (a, b) {
                    (Ok(a), Ok(b)) => (a - b).abs(),
                    _ => T::infinity(),
                };
                worst = worst.max(r);
            }
            worst
        })
        .reduce(T::zero, |a, b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rho: f64) -> Copula<f64> {
        Copula::<f64>::gaussian(rho).unwrap()
    }

    #[test]
    fn bounds_for_constant_gaussian_window() {
        let w = [g(0.5), g(0.5), g(-0.5)];
        let ops: Vec<CopulaOperand<f64>> = w.iter().map(Into::into).collect();
        let r = beta_bound(&ops, 3, 128).unwrap();
        let expect = [
            0.288_675_134_594_812_9,
            0.144_337_567_297_406_4,
            0.072_168_783_648_703_2,
        ];
        for (b, e) in r.beta_bounds.iter().zip(expect) {
            assert!((b - e).abs() < 1e-12);
        }
        assert_eq!(r.eta_hat, 0.5);
        assert!(r.verdict);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn independence_window_has_zero_bounds() {
        let ops = [CopulaOperand::Closed(&Copula::<f64>::Independence)];
        let r = beta_bound(&ops, 4, 64).unwrap();
        assert!(r.beta_bounds.iter().all(|&b| b == 0.0));
        assert!(beta_bound::<f64>(&[], 4, 64).is_err());
    }

    #[test]
    fn gaussian_model_report() {
        let p = GaussianCurParams::new(1.0, -0.5).unwrap();
        let r = gaussian_cur_report(p, 20, 10).unwrap();
        assert_eq!(r.eta_hat, 0.5);
        assert!(r.verdict);
        for w in r.beta_bounds.windows(2) {
            assert_eq!(w[1] / w[0], 0.5);
        }
        let walk = gaussian_cur_report(GaussianCurParams::new(1.0, 0.0).unwrap(), 20, 3).unwrap();
        assert!(!walk.verdict);
        assert_eq!(gaussian_cur_chain(p, 5).unwrap(), vec![g(0.5); 5]);
    }

    #[test]
    fn lag_norm_two_ways() {
        let chain = vec![g(0.5); 4];
        let b = lag_density_norm(&chain, 2, 256).unwrap();
        assert!((b - gaussian_l2_norm(0.25)).abs() < 1e-6);
        let a = lag_density_norm_spectral(&chain, 2, 256).unwrap();
        assert!((a - b).abs() / b < 1e-6);
        assert_eq!(lag_density_norm(&chain, 1, 64).unwrap(), gaussian_l2_norm(0.5));
        let with_pi = vec![g(0.5), Copula::Independence, g(0.5)];
        assert_eq!(lag_density_norm(&with_pi, 3, 64).unwrap(), 0.0);
        assert!(lag_density_norm(&chain, 5, 64).is_err());
    }

    #[test]
    fn theorem_conditions() {
        let r = check_theorem_conditions(&[g(0.99)], 128);
        assert!(r.verdict);
        assert_eq!(r.eta_hat, 0.99);
        assert_eq!(r.flags.len(), 1);
        let f = check_theorem_conditions(&[Copula::<f64>::fgm(1.0).unwrap()], 128);
        assert!(f.verdict);
        assert!((f.eta_hat - 1.0 / 3.0).abs() < 1e-6);
        assert!(!check_theorem_conditions::<f64>(&[], 64).verdict);
    }
}
