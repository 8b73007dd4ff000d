//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime limit.
//!
//! Run with `cargo test -p copula-markov --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use copula_markov::cconvolution::{c_convolve, iterate_process, transition_copula, IterateOptions};
use copula_markov::copula::{iterate_lag_copula, star_product, BivariateCopula, Copula, DiscretizedCopula};
use copula_markov::gaussian_cur::{
    innovation_acf_limit, innovation_autocov, level_acf_limit, limit_stddev, tau_adjacent, tau_lag, variance_path,
    GaussianCurParams, VariancePath,
};
use copula_markov::griddist::GridDistribution;
use copula_markov::mixing::{
    beta_bound, gaussian_cur_chain, gaussian_cur_report, l2_norm_centered, lag_density_norm, lag_density_norm_spectral,
    spectral_decomposition,
};
use copula_markov::montecarlo::{
    empirical_acf, gaussianity_check, sample_moments, simulate_paths, spearman, Model, PathEnsemble, Series,
    SimulationConfig,
};
use statrs::distribution::{ContinuousCDF, Normal};

type C = Copula<f64>;

/// Collects failed checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{label}: got {got:.12e}, want {want:.12e} ± {tol:e}")
        });
    }
}

fn run(id: usize, name: &str, limit: Duration, body: impl FnOnce(&mut Checks)) -> bool {
    let mut checks = Checks::default();
    let start = Instant::now();
    let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| body(&mut checks)));
    if caught.is_err() {
        checks.failures.push("panicked".into());
    }
    let elapsed = start.elapsed();
    if elapsed > limit {
        checks.failures.push(format!(
            "runtime {:.3}s exceeds {:.1}s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ));
    }
    let ok = checks.failures.is_empty();
    println!(
        "{} criterion {id:>2}: {name} ({} checks, {:.3}s, limit {:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        checks.count,
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    for f in checks.failures.iter().take(10) {
        println!("      {f}");
    }
    ok
}

fn g(rho: f64) -> C {
    Copula::gaussian(rho).unwrap()
}

fn params(sigma: f64, rho: f64) -> GaussianCurParams<f64> {
    GaussianCurParams::new(sigma, rho).unwrap()
}

fn std_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Composite rule for ∫ f(z) φ(z) dz over [-9, 9]: `panels` Gauss-Legendre
/// panels of 16 points.
fn normal_rule(panels: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = legendre(16);
    let width = 18.0 / panels as f64;
    let mut out = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let mid = -9.0 + width * (p as f64 + 0.5);
        for (&x, &w) in gx.iter().zip(&gw) {
            let z = mid + 0.5 * width * x;
            let phi = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
            out.push((z, 0.5 * width * w * phi));
        }
    }
    out
}

/// ∬ (c − 1)² du dv for the gaussian copula, density written out in scores.
fn gaussian_squared_norm_oracle(tau: f64) -> f64 {
    let rule = normal_rule(32);
    let one_m = 1.0 - tau * tau;
    let mut s = 0.0;
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            let c = (-(tau * tau * (x * x + y * y) - 2.0 * tau * x * y) / (2.0 * one_m)).exp() / one_m.sqrt();
            s += wx * wy * (c - 1.0) * (c - 1.0);
        }
    }
    s
}

/// Cell averages of a copula from rectangle probabilities of its cdf.
fn cell_average_oracle(c: &C, n: usize) -> Vec<f64> {
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let cdf: Vec<Vec<f64>> = grid
        .iter()
        .map(|&u| grid.iter().map(|&v| c.cdf(u, v).unwrap()).collect())
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mass = cdf[i + 1][j + 1] - cdf[i][j + 1] - cdf[i + 1][j] + cdf[i][j];
            out.push(mass * (n * n) as f64);
        }
    }
    out
}

fn sup_against_oracle(d: &DiscretizedCopula<f64>, oracle: &[f64]) -> f64 {
    let n = d.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((d.value(i, j) - oracle[i * n + j]).abs());
        }
    }
    worst
}

const RHOS: [f64; 3] = [-0.3, -0.5, -0.7];
const FAR: usize = 10_000;

fn criterion_1(c: &mut Checks) {
    let vp = variance_path(params(1.0, -0.5), FAR).unwrap();
    for t in 1..=FAR {
        let v = vp.v[t - 1];
        c.check((v - 1.0).abs() <= f64::EPSILON, || format!("V_{t} = {v:e}"));
        if t < FAR {
            let tau = tau_adjacent(&vp, t).unwrap();
            c.check((tau - 0.5).abs() <= f64::EPSILON, || format!("tau_{t} = {tau:e}"));
        }
    }
}

fn criterion_2(c: &mut Checks) {
    for rho in RHOS {
        let p = params(1.0, rho);
        let vp = variance_path(p, FAR).unwrap();
        c.close(&format!("V_1e4 rho={rho}"), vp.v[FAR - 1], -1.0 / (2.0 * rho), 1e-3);
        c.close(
            &format!("limit rho={rho}"),
            limit_stddev(p).unwrap(),
            -1.0 / (2.0 * rho),
            1e-15,
        );
    }
}

fn far_path(rho: f64) -> VariancePath<f64> {
    variance_path(params(1.0, rho), FAR + 4).unwrap()
}

fn criterion_3(c: &mut Checks) {
    for rho in RHOS {
        let vp = far_path(rho);
        for k in 1..=4 {
            let want = (1.0 - 2.0 * rho * rho).powi(k as i32);
            c.close(
                &format!("tau_lag rho={rho} k={k}"),
                tau_lag(&vp, FAR, k).unwrap(),
                want,
                1e-6,
            );
            c.close(
                &format!("acf limit rho={rho} k={k}"),
                level_acf_limit(vp.params, k).unwrap(),
                want,
                1e-15,
            );
        }
    }
}

fn criterion_4(c: &mut Checks) {
    for rho in RHOS {
        let vp = far_path(rho);
        for k in 1..=4 {
            let want = -rho * rho * (1.0 - 2.0 * rho * rho).powi(k as i32 - 1);
            c.close(
                &format!("autocov rho={rho} k={k}"),
                innovation_autocov(&vp, FAR, k).unwrap(),
                want,
                1e-4,
            );
            c.close(
                &format!("acf limit rho={rho} k={k}"),
                innovation_acf_limit(vp.params, k).unwrap(),
                want,
                1e-15,
            );
        }
    }
}

fn criterion_5(c: &mut Checks) {
    let n = 256;
    let p = star_product(&g(-0.5), &g(0.4), n).unwrap();
    let oracle = cell_average_oracle(&g(-0.2), n);
    let sup = sup_against_oracle(&p, &oracle);
    c.check(sup <= 1e-3, || format!("sup-norm {sup:e} > 1e-3"));
}

fn criterion_6(c: &mut Checks) {
    let n01 = GridDistribution::normal(0.0, 1.0).unwrap();
    let link = g(-0.5);
    let f2 = c_convolve(&n01, &n01, &link, 512, 2001).unwrap();
    let sup = f2
        .nodes()
        .iter()
        .map(|&x| (f2.eval_cdf(x) - std_normal_cdf(x)).abs())
        .fold(0.0, f64::max);
    c.check(sup <= 1e-3, || format!("one-step sup-norm {sup:e}"));
    let opts = IterateOptions {
        quad_n: 512,
        out_m: 2001,
        copula_grid: None,
    };
    let path = iterate_process(&n01, &link, 11, &opts).unwrap();
    let vp = variance_path(params(1.0, -0.5), 11).unwrap();
    for (t, d) in path.distributions.iter().enumerate() {
        let want = vp.v[t] * vp.v[t];
        let rel = (d.moments().variance / want - 1.0).abs();
        c.check(rel <= 1e-3, || format!("t={} relative variance error {rel:e}", t + 1));
    }
}

fn criterion_7(c: &mut Checks) {
    for tau in [-0.7, -0.5, -0.3, 0.3, 0.5, 0.7] {
        let d = spectral_decomposition(&g(tau), 512).unwrap();
        c.close(
            &format!("lambda_1 tau={tau}"),
            d.singular_values[0],
            f64::abs(tau),
            1e-2,
        );
        c.close(&format!("lambda_2 tau={tau}"), d.singular_values[1], tau * tau, 1e-2);
    }
    let d = spectral_decomposition(&Copula::fgm(0.9).unwrap(), 512).unwrap();
    c.close("fgm lambda_1", d.singular_values[0], 0.3, 1e-3);
    c.check(d.singular_values[1] <= 1e-3, || {
        format!("fgm lambda_2 = {:e}", d.singular_values[1])
    });
}

fn criterion_8(c: &mut Checks) {
    let p = params(1.0, -0.5);
    let report = gaussian_cur_report(p, 50, 10).unwrap();
    let chain = gaussian_cur_chain(p, 50).unwrap();
    let ops: Vec<_> = chain.iter().map(Into::into).collect();
    let generic = beta_bound(&ops, 10, 128).unwrap();
    for r in [&report, &generic] {
        c.check(r.eta_hat == 0.5, || format!("eta_hat = {}", r.eta_hat));
        c.check(r.verdict, || "verdict false".into());
        for (k, w) in r.beta_bounds.windows(2).enumerate() {
            c.check(w[1] / w[0] == 0.5, || {
                format!("ratio at k={} is {:e}", k + 1, w[1] / w[0])
            });
        }
        let b10 = r.beta_bounds[9];
        c.check(b10 <= 6e-4, || format!("beta bound k=10 = {b10:e}"));
    }
    let critical = [g(0.5), g(1.0 - 1e-12)];
    let ops: Vec<_> = critical.iter().map(Into::into).collect();
    let r = beta_bound(&ops, 10, 128).unwrap();
    c.check(r.eta_hat < 1.0 && r.eta_hat == 1.0 - 1e-12, || {
        format!("critical eta_hat = {}", r.eta_hat)
    });
    c.check(r.verdict == (r.eta_hat < 1.0), || {
        "verdict does not follow eta_hat < 1".into()
    });
    c.check(r.flags.iter().any(|f| f.contains("near-critical")), || {
        "near-critical flag missing".into()
    });
}

fn criterion_9(c: &mut Checks) {
    let tau: f64 = 0.5;
    let squared = gaussian_squared_norm_oracle(tau);
    let display = tau * tau / (1.0 - tau * tau);
    c.close("oracle ∬(c-1)² vs τ²/(1-τ²)", squared, display, 5e-3);
    let norm = squared.sqrt();
    c.check((norm - 0.5773503).abs() < 5e-3 && (norm - 0.3333).abs() > 0.1, || {
        format!("oracle norm {norm} does not single out the square root")
    });
    c.close("l2_norm_centered", l2_norm_centered(&g(tau), 512).unwrap(), norm, 5e-3);
    let quad = l2_norm_centered(&g(tau).discretize(512).unwrap(), 512).unwrap();
    c.close("l2 norm of discretised copula", quad, norm, 5e-3);
    let cop = g(tau);
    let ops = [(&cop).into()];
    let r = beta_bound(&ops, 1, 512).unwrap();
    c.close("beta bound k=1", r.beta_bounds[0], 0.5 * norm, 5e-3);
}

fn gaussian_ensemble(rho: f64, seed: u64) -> PathEnsemble<f64> {
    let cfg = SimulationConfig {
        model: Model::Gaussian(params(1.0, rho)),
        paths: 100_000,
        steps: 50,
        seed,
    };
    simulate_paths(&cfg).unwrap()
}

const SEED: u64 = 2024;

fn criterion_10(c: &mut Checks) {
    let e = gaussian_ensemble(-0.5, SEED);
    let var = sample_moments(&e.level(50).unwrap()).variance;
    c.close("Var(Y_50)", var, 1.0, 0.0134);
    let (r, se) = empirical_acf(&e, 49, 1, Series::Levels).unwrap();
    c.close("level ACF k=1", r, 0.5, 3.0 * se);
    let (r, se) = empirical_acf(&e, 49, 1, Series::Innovations).unwrap();
    c.close("innovation ACF k=1", r, -0.25, 3.0 * se);
    let reference = GridDistribution::normal(0.0, 1.0).unwrap();
    let gc = gaussianity_check(&e, 50, &reference).unwrap();
    c.check(gc.skewness.abs() <= 0.025, || format!("skewness {}", gc.skewness));
    c.check(gc.excess_kurtosis.abs() <= 0.05, || {
        format!("excess kurtosis {}", gc.excess_kurtosis)
    });
}

fn copula_axioms(c: &mut Checks) {
    let family = [
        Copula::Independence,
        g(-0.9),
        g(-0.5),
        g(0.3),
        g(0.95),
        Copula::fgm(-1.0).unwrap(),
        Copula::fgm(0.5).unwrap(),
        Copula::fgm(1.0).unwrap(),
    ];
    let pts: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let inner: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    for cop in &family {
        for &u in &pts {
            c.close(&format!("{cop} C(u,0)"), cop.cdf(u, 0.0).unwrap(), 0.0, 1e-12);
            c.close(&format!("{cop} C(0,u)"), cop.cdf(0.0, u).unwrap(), 0.0, 1e-12);
            c.close(&format!("{cop} C(u,1)"), cop.cdf(u, 1.0).unwrap(), u, 1e-12);
            c.close(&format!("{cop} C(1,u)"), cop.cdf(1.0, u).unwrap(), u, 1e-12);
        }
        for w in pts.windows(2) {
            for z in pts.windows(2) {
                let vol = cop.cdf(w[1], z[1]).unwrap() - cop.cdf(w[1], z[0]).unwrap() - cop.cdf(w[0], z[1]).unwrap()
                    + cop.cdf(w[0], z[0]).unwrap();
                c.check(vol >= -1e-12, || format!("{cop}: negative volume {vol:e}"));
            }
        }
        for &u in &inner {
            c.close(&format!("{cop} d1(u,0)"), cop.d1(u, 0.0).unwrap(), 0.0, 1e-9);
            c.close(&format!("{cop} d1(u,1)"), cop.d1(u, 1.0).unwrap(), 1.0, 1e-9);
            let mut last = 0.0;
            for &v in &pts {
                let d = cop.d1(u, v).unwrap();
                c.check(d >= last - 1e-12, || format!("{cop}: d1 decreases at u={u} v={v}"));
                last = d;
            }
            for &v in &inner {
                let p = cop.d1(u, v).unwrap();
                // skip points where rounding p alone moves v by more than 1e-10
                let density = cop.density(u, v).unwrap();
                if f64::EPSILON / density <= 1e-10 {
                    let back = cop.conditional_inverse(u, p).unwrap();
                    c.close(&format!("{cop} inverse u={u} v={v}"), back, v, 1e-9);
                }
            }
        }
        // density integrates to one
        let rule = normal_rule(18);
        let mass: f64 = rule
            .iter()
            .flat_map(|&(x, wx)| rule.iter().map(move |&(y, wy)| wx * wy * cop.density_scores(x, y)))
            .sum();
        c.close(&format!("{cop} density mass"), mass, 1.0, 1e-6);
    }
}

fn discretized_axioms(c: &mut Checks) {
    let made = [
        g(-0.7).discretize(64).unwrap(),
        Copula::fgm(0.8).unwrap().discretize(64).unwrap(),
        star_product(&g(0.6), &Copula::fgm(-0.5).unwrap(), 64).unwrap(),
        iterate_lag_copula(&[g(-0.5), g(0.8), g(0.9)], 64).unwrap(),
    ];
    for (i, d) in made.iter().enumerate() {
        c.check(d.values().iter().all(|&x| x >= 0.0), || {
            format!("discretised #{i}: negative cell")
        });
        let (r, col) = d.margin_deviation();
        c.check(r.max(col) <= 1e-6, || {
            format!("discretised #{i}: margin deviation {:e}", r.max(col))
        });
        for k in 0..=8 {
            let u = k as f64 / 8.0;
            c.close(&format!("discretised #{i} C(u,1)"), d.cdf(u, 1.0).unwrap(), u, 1e-6);
            c.close(&format!("discretised #{i} C(u,0)"), d.cdf(u, 0.0).unwrap(), 0.0, 1e-12);
        }
        for &(u, v) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.7)] {
            let p = d.d1(u, v).unwrap();
            c.close(
                &format!("discretised #{i} inverse"),
                d.conditional_inverse(u, p).unwrap(),
                v,
                1e-4,
            );
        }
    }
}

fn galois(c: &mut Checks) {
    let tagged = GridDistribution::normal(0.0, 2.0).unwrap();
    let untagged = tagged.clone().into_untagged();
    let n01 = GridDistribution::normal(0.0, 1.0).unwrap();
    let convolved = c_convolve(&n01, &n01, &g(0.4), 256, 1001).unwrap();
    for (name, d) in [("tagged", &tagged), ("untagged", &untagged), ("convolved", &convolved)] {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let q = d.quantile(p).unwrap();
            c.check(d.eval_cdf(q) >= p - 1e-9, || format!("{name}: F(Q({p})) < p"));
        }
        let nodes = d.nodes();
        for w in nodes.windows(2).skip(1).take(nodes.len() - 3) {
            let x = w[0];
            let step = w[1] - w[0];
            let back = d.quantile(d.eval_cdf(x)).unwrap();
            c.check(back <= x + step, || {
                format!("{name}: Q(F({x})) = {back} beyond x + step")
            });
        }
    }
    for k in -40..=40 {
        let x = k as f64 * 0.2;
        let back = tagged.quantile(tagged.eval_cdf(x)).unwrap();
        c.close("tagged round trip", back, x, 1e-6);
    }
}

fn associativity(c: &mut Checks) {
    let n = 256;
    for (a, b, d) in [(g(-0.5), g(0.4), g(0.7)), (g(0.9), Copula::fgm(0.7).unwrap(), g(-0.6))] {
        let left = star_product(&star_product(&a, &b, n).unwrap(), &d, n).unwrap();
        let right = star_product(&a, &star_product(&b, &d, n).unwrap(), n).unwrap();
        let sup = left.sup_distance(&right).unwrap();
        c.check(sup <= 1e-3, || format!("({a}*{b})*{d}: associativity gap {sup:e}"));
    }
    let fgm = star_product(&Copula::fgm(0.9).unwrap(), &Copula::fgm(0.9).unwrap(), n).unwrap();
    let sup = sup_against_oracle(&fgm, &cell_average_oracle(&Copula::fgm(0.27).unwrap(), n));
    c.check(sup <= 1e-3, || format!("fgm parameter law gap {sup:e}"));
}

fn spectral_invariants(c: &mut Checks) {
    for tau in [0.3, 0.5, 0.7] {
        let d = spectral_decomposition(&g(tau), 512).unwrap();
        let oracle = gaussian_squared_norm_oracle(tau);
        let rel = (d.squared_sum() / oracle - 1.0).abs();
        c.check(rel <= 1e-2, || format!("Parseval tau={tau}: relative gap {rel:e}"));
        c.check(d.singular_values.windows(2).all(|w| w[0] >= w[1]), || {
            "singular values not sorted".into()
        });
        for i in 0..3 {
            let a = d.mode_alignment(i);
            c.check(a >= 0.99, || format!("mode {i} alignment {a} at tau={tau}"));
        }
    }
    let chain = vec![g(0.5), g(-0.6), g(0.7), g(0.4)];
    for k in 1..=4 {
        let b = lag_density_norm(&chain, k, 256).unwrap();
        let a = lag_density_norm_spectral(&chain, k, 256).unwrap();
        c.check((a - b).abs() <= 2e-2 * b, || format!("lag norm k={k}: {a} vs {b}"));
    }
    let two = lag_density_norm(&[g(0.5), g(0.5)], 2, 256).unwrap();
    c.close("lag norm tau=0.25", two, (0.0625f64 / 0.9375).sqrt(), 1e-2);
}

fn convolution_invariants(c: &mut Checks) {
    let n01 = GridDistribution::normal(0.0, 1.0).unwrap();
    for rho in [-0.5, -0.3] {
        let opts = IterateOptions {
            quad_n: 512,
            out_m: 2001,
            copula_grid: Some(256),
        };
        let path = iterate_process(&n01, &g(rho), 3, &opts).unwrap();
        let vp = variance_path(params(1.0, rho), 3).unwrap();
        for (i, tc) in path.transitions.iter().enumerate() {
            let t = i + 1;
            let tau = tau_adjacent(&vp, t).unwrap();
            let oracle = cell_average_oracle(&g(tau), 256);
            let sup = sup_against_oracle(tc, &oracle);
            c.check(sup <= 5e-3, || {
                format!("rho={rho} transition {t}->{}: sup {sup:e}", t + 1)
            });
        }
        for (t, d) in path.distributions.iter().enumerate() {
            let m = d.moments();
            c.check(m.skewness.abs() <= 1e-2 && m.excess_kurtosis.abs() <= 1e-2, || {
                format!(
                    "rho={rho} t={}: skew {} exkurt {}",
                    t + 1,
                    m.skewness,
                    m.excess_kurtosis
                )
            });
        }
    }
    // independence: F(y) = ∫ φ(x) Φ(y − x) dx by direct quadrature
    let h = GridDistribution::normal(0.0, 0.7).unwrap().into_untagged();
    let f = c_convolve(&n01.clone().into_untagged(), &h, &Copula::Independence, 512, 2001).unwrap();
    let rule = normal_rule(36);
    let inner = Normal::new(0.0, 0.7).unwrap();
    let mut worst: f64 = 0.0;
    for k in -30..=30 {
        let y = k as f64 * 0.15;
        let direct: f64 = rule.iter().map(|&(x, w)| w * inner.cdf(y - x)).sum();
        worst = worst.max((f.eval_cdf(y) - direct).abs());
    }
    c.check(worst <= 1e-6, || {
        format!("independence vs double quadrature: {worst:e}")
    });
    let wrong = GridDistribution::normal(0.0, 2.5).unwrap();
    c.check(transition_copula(&n01, &wrong, &n01, &g(-0.5), 32).is_err(), || {
        "inconsistent margin not reported".into()
    });
}

fn gaussian_cur_invariants(c: &mut Checks) {
    for rho in [-0.95, -0.7, -0.3, -0.05] {
        let vp = variance_path(params(1.3, rho), 2000).unwrap();
        let s = 1.3;
        for t in 1..2000 {
            let tau = tau_adjacent(&vp, t).unwrap();
            c.check(tau.abs() < 1.0, || format!("|tau| >= 1 at t={t}, rho={rho}"));
            let (a, b) = (vp.v[t - 1], vp.v[t]);
            let rebuilt = a * a + s * s + 2.0 * rho * s * a;
            // the running-sum form cancels terms of size tσ²
            let tol = 64.0 * f64::EPSILON * (t + 1) as f64 * s * s;
            c.check((rebuilt - b * b).abs() <= tol, || {
                format!("self-consistency t={t} rho={rho}")
            });
        }
    }
    let rw = variance_path(params(1.0, 0.0), 30).unwrap();
    for t in 2..25 {
        for k in 1..5 {
            c.close("autocov at rho=0", innovation_autocov(&rw, t, k).unwrap(), 0.0, 1e-12);
        }
    }
}

fn montecarlo_invariants(c: &mut Checks) {
    let small = SimulationConfig {
        model: Model::Gaussian(params(1.0, -0.3)),
        paths: 1000,
        steps: 20,
        seed: 99,
    };
    c.check(
        simulate_paths(&small).unwrap() == simulate_paths(&small).unwrap(),
        || "identical seeds gave different ensembles".into(),
    );
    let rho = -0.3;
    let e = gaussian_ensemble(rho, SEED + 1);
    let vp = variance_path(params(1.0, rho), 50).unwrap();
    let n = e.paths() as f64;
    for t in 1..=50 {
        let v2 = vp.v[t - 1] * vp.v[t - 1];
        let se = v2 * (2.0 / (n - 1.0)).sqrt();
        let got = sample_moments(&e.level(t).unwrap()).variance;
        c.close(&format!("Var(Y_{t})"), got, v2, 4.0 * se);
    }
    let t = 49;
    let tau = tau_adjacent(&vp, t).unwrap();
    let (rs, se) = spearman(&e.level(t).unwrap(), &e.level(t + 1).unwrap());
    c.close("Spearman (Y_49, Y_50)", rs, 6.0 / PI * (tau / 2.0).asin(), 3.0 * se);
}

fn criterion_11(c: &mut Checks) {
    copula_axioms(c);
    discretized_axioms(c);
    galois(c);
    associativity(c);
    spectral_invariants(c);
    convolution_invariants(c);
    gaussian_cur_invariants(c);
    montecarlo_invariants(c);
}

fn main() {
    let s = Duration::from_secs_f64;
    let results = [
        run(1, "variance recursion fixed point", s(0.1), criterion_1),
        run(2, "limit of V_t", s(0.1), criterion_2),
        run(3, "level autocorrelation limit", s(1.0), criterion_3),
        run(4, "innovation autocorrelation limit", s(1.0), criterion_4),
        run(5, "star-product parameter law", s(5.0), criterion_5),
        run(6, "C-convolution against closed form", s(30.0), criterion_6),
        run(7, "spectral decomposition", s(10.0), criterion_7),
        run(8, "beta-mixing bound suite", s(10.0), criterion_8),
        run(9, "L2 norm oracle", s(5.0), criterion_9),
        run(10, "Monte Carlo end to end", s(60.0), criterion_10),
        run(11, "property suites", s(60.0), criterion_11),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
