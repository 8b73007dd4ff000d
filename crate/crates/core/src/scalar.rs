//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for
//! `f32` and `f64`. The normal-distribution special functions are evaluated
//! in double precision and rounded back to the working type.

use std::fmt::Display;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use statrs::function::erf;

/// Floating point type usable by the copula and process kernels.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + nalgebra::Scalar
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Standard normal density.
    #[inline]
    fn norm_pdf(self) -> Self {
        Self::lit(norm_pdf(self.to_f64_lossy()))
    }

    /// Standard normal distribution function Φ.
    #[inline]
    fn norm_cdf(self) -> Self {
        Self::lit(norm_cdf(self.to_f64_lossy()))
    }

    /// Standard normal quantile Φ⁻¹; returns ∓∞ at 0 and 1.
    #[inline]
    fn norm_inv(self) -> Self {
        Self::lit(norm_inv(self.to_f64_lossy()))
    }
}

impl Real for f32 {}
impl Real for f64 {}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub(crate) fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub(crate) fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }
}

pub(crate) fn norm_inv(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else if p > 0.5 {
        -norm_inv(1.0 - p)
    } else {
        // one Halley step on the erfc_inv starting value
        let x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
        let e = norm_cdf(x) - p;
        let u = e / norm_pdf(x);
        x - u / (1.0 + 0.5 * x * u)
    }
}

// Gauss-Legendre abscissae/weights (half rules) used by the bivariate normal
// integrator for the three correlation regimes.
const BVN_W6: [f64; 3] = [
    0.171_324_492_379_170_5,
    0.360_761_573_048_138_4,
    0.467_913_934_572_690_4,
];
const BVN_X6: [f64; 3] = [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197];
const BVN_W12: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const BVN_X12: [f64; 6] = [
    0.981_560_634_246_719_1,
    0.904_117_256_370_475,
    0.769_902_674_194_305,
    0.587_317_954_286_617_1,
    0.367_831_498_998_180_2,
    0.125_233_408_511_469_2,
];
const BVN_W20: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const BVN_X20: [f64; 10] = [
    0.993_128_599_185_094_9,
    0.963_971_927_277_913_8,
    0.912_234_428_251_326,
    0.839_116_971_822_218_8,
    0.746_331_906_460_150_8,
    0.636_053_680_726_515,
    0.510_867_001_950_827_1,
    0.373_706_088_715_419_6,
    0.227_785_851_141_645_1,
    0.076_526_521_133_497_33,
];

/// P(X ≤ x, Y ≤ y) for a standard bivariate normal with correlation `r`.
///
/// Genz's BVND algorithm (double precision, absolute error below 1e-15).
pub(crate) fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    bvn_upper(-x, -y, r)
}

/// P(X > h, Y > k).
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { norm_cdf(-k) };
    }
    if k == f64::NEG_INFINITY {
        return norm_cdf(-h);
    }
    if r == 0.0 {
        return norm_cdf(-h) * norm_cdf(-k);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&BVN_W6, &BVN_X6)
    } else if r.abs() < 0.75 {
        (&BVN_W12, &BVN_X12)
    } else {
        (&BVN_W20, &BVN_X20)
    };
    // Full rule on [0, 2]: nodes 1 - x and 1 + x, each with weight w.
    let nodes = || w.iter().zip(x).flat_map(|(&wi, &xi)| [(wi, 1.0 - xi), (wi, 1.0 + xi)]);

    let mut hk = h * k;
    let mut bvn;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        bvn = nodes()
            .map(|(wi, xi)| {
                let sn = (asr * xi).sin();
                wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp()
            })
            .sum::<f64>();
        bvn = bvn * asr / two_pi + norm_cdf(-h) * norm_cdf(-k);
    } else {
        let mut k = k;
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        bvn = 0.0;
        if r.abs() < 1.0 {
            let a_s = 1.0 - r * r;
            let mut a = a_s.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            let asr = -(bs / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = two_pi.sqrt() * norm_cdf(-b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            let sum: f64 = nodes()
                .filter_map(|(wi, xi)| {
                    let xs = (a * xi) * (a * xi);
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr <= -100.0 {
                        return None;
                    }
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    Some(wi * asr.exp() * (sp - ep))
                })
                .sum();
            bvn = (a * sum - bvn) / two_pi;
        }
        if r > 0.0 {
            bvn += norm_cdf(-h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 {
                norm_cdf(k) - norm_cdf(h)
            } else {
                norm_cdf(-h) - norm_cdf(-k)
            };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &x in &[-8.0, -3.2, -1.0, 0.0, 0.4, 2.5] {
            let p = norm_cdf(x);
            assert!((norm_inv(p) - x).abs() < 1e-9 * (1.0 + x.abs()), "x={x}");
        }
        assert_eq!(norm_inv(0.0), f64::NEG_INFINITY);
        assert_eq!(norm_inv(1.0), f64::INFINITY);
        assert!((norm_inv(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((norm_inv(norm_cdf(-6.0)) + 6.0).abs() < 1e-12);
        assert!((norm_inv(0.25) + norm_inv(0.75)).abs() < 1e-15);
    }

    #[test]
    fn bvn_known_values() {
        // orthant probability 1/4 + asin(r)/(2π)
        for &r in &[-0.95, -0.5, -0.2, 0.1, 0.6, 0.8, 0.99] {
            let expect = 0.25 + f64::asin(r) / (2.0 * std::f64::consts::PI);
            assert!((bvn_cdf(0.0, 0.0, r) - expect).abs() < 1e-14, "r={r}");
        }
        assert!((bvn_cdf(1.0, 2.0, 0.0) - norm_cdf(1.0) * norm_cdf(2.0)).abs() < 1e-15);
        assert_eq!(bvn_cdf(f64::INFINITY, 0.3, 0.4), norm_cdf(0.3));
    }

    #[test]
    fn bvn_matches_one_dimensional_integral() {
        // P(X ≤ x, Y ≤ y) = ∫_{-∞}^{x} φ(s) Φ((y - r s)/√(1-r²)) ds
        let (gx, gw) = gauss_legendre(200);
        for &(x, y, r) in &[
            (0.3, -0.7, 0.5),
            (-1.2, 0.4, -0.8),
            (1.5, 1.1, 0.95),
            (-0.5, 2.0, -0.97),
        ] {
            let lo = -12.0;
            let half = (x - lo) / 2.0;
            let s: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(&t, &w)| {
                    let s = lo + half * (t + 1.0);
                    w * half * norm_pdf(s) * norm_cdf((y - r * s) / (1.0 - r * r).sqrt())
                })
                .sum();
            assert!((bvn_cdf(x, y, r) - s).abs() < 1e-12, "{x} {y} {r}");
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
    }
}
