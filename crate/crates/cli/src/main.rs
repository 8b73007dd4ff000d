use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use copula_markov::cconvolution::{iterate_process, IterateOptions};
use copula_markov::copula::star_product;
use copula_markov::gaussian_cur::{
    innovation_acf_limit, innovation_autocov, level_acf_limit, limit_stddev, tau_adjacent, tau_lag, variance_path,
};
use copula_markov::griddist::GridDistribution;
use copula_markov::io::sig17;
use copula_markov::mixing::{
    check_theorem_conditions, gaussian_cur_chain, gaussian_cur_report, spectral_decomposition,
};
use copula_markov::montecarlo::{
    empirical_acf, gaussianity_check, ks_critical_1pct, sample_moments, simulate_paths, Model, Series,
};
use copula_markov::{Copula, GaussianCurParams, SimulationConfig};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "copula-markov", version)]
#[command(about = "Copula-based Markov processes: variance paths, mixing bounds, C-convolution and simulation")]
struct Cli {
    /// File of key=value lines supplying flag defaults; flags override
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output file (standard output if omitted)
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GaussianArgs {
    /// Copula parameter of the gaussian link
    #[arg(long, allow_negative_numbers = true)]
    rho: f64,
    /// Standard deviation of the innovations
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rows t, V_t, tau_adjacent, limit
    VariancePath {
        #[command(flatten)]
        model: GaussianArgs,
        #[arg(long)]
        t_max: usize,
    },
    /// Rows k, finite_t, limit for the level or innovation autocorrelation
    Acf {
        #[command(flatten)]
        model: GaussianArgs,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value = "levels")]
        of: Series,
    },
    /// Mixing report (JSON) for the gaussian model
    MixingBound {
        #[command(flatten)]
        model: GaussianArgs,
        #[arg(long, default_value_t = 50)]
        t_window: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// Grid for the symmetry and spectral condition checks
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Rows index, singular_value of the centred copula density
    Spectrum {
        /// gaussian:<rho>, fgm:<theta> or independence
        #[arg(long, allow_hyphen_values = true)]
        copula: Copula,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Rows t, mean, variance, skewness, excess_kurtosis of Y_t by C-convolution
    Convolve {
        #[arg(long, allow_hyphen_values = true)]
        copula: Copula,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 512)]
        quad: usize,
        /// Interior nodes of each output grid
        #[arg(long, default_value_t = 2001)]
        nodes: usize,
    },
    /// Per-t ensemble statistics (CSV) and a JSON summary
    Simulate {
        #[command(flatten)]
        model: GaussianArgs,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Summary file (standard error if omitted)
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
    },
    /// Star product of two copulas and its nearest gaussian copula (JSON)
    Star {
        /// Given twice: first and second factor
        #[arg(long = "copula", allow_hyphen_values = true, required = true, num_args = 1)]
        copulas: Vec<Copula>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
}

fn flag_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

impl GaussianArgs {
    fn params(&self) -> GaussianCurParams {
        GaussianCurParams::new(self.sigma, self.rho).unwrap_or_else(|e| flag_error(e))
    }
}

/// Inserts `--key=value` for every config entry the chosen subcommand knows
/// and the command line does not already set.
fn apply_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let root = Cli::command();
    let Some((pos, sub)) = strs
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(args);
    };
    let known = |key: &str| {
        sub.get_arguments()
            .chain(root.get_arguments())
            .any(|a| a.get_long() == Some(key))
    };
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{path}:{}: expected key=value", n + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let given = strs
            .iter()
            .any(|a| a == &format!("--{key}") || a.starts_with(&format!("--{key}=")));
        if known(key) && !given && key != "config" {
            injected.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_row(out: &mut dyn Write, first: usize, values: &[f64]) -> io::Result<()> {
    write!(out, "{first}")?;
    for v in values {
        write!(out, ",{}", sig17(*v))?;
    }
    writeln!(out)
}

#[derive(Serialize)]
struct StarReport {
    first: String,
    second: String,
    grid: usize,
    spearman_rho: f64,
    nearest_gaussian_rho: f64,
    sup_residual: f64,
}

#[derive(Serialize)]
struct AcfSummary {
    t: usize,
    estimate: f64,
    standard_error: f64,
    limit: Option<f64>,
}

#[derive(Serialize)]
struct SimulationSummary {
    rho: f64,
    sigma: f64,
    paths: usize,
    steps: usize,
    seed: u64,
    final_variance: f64,
    analytic_final_variance: f64,
    skewness: f64,
    excess_kurtosis: f64,
    ks_statistic: f64,
    ks_critical_1pct: f64,
    level_acf_k1: Option<AcfSummary>,
    innovation_acf_k1: Option<AcfSummary>,
}

fn run(cli: Cli) -> Result<()> {
    let mut out = open_out(cli.out.as_deref())?;
    match cli.command {
        Command::VariancePath { model, t_max } => {
            let p = model.params();
            if t_max == 0 {
                flag_error("--t-max must be >= 1");
            }
            let vp = variance_path(p, t_max + 1)?;
            let limit = limit_stddev(p).unwrap_or(f64::NAN);
            writeln!(out, "t,V_t,tau_adjacent,limit")?;
            for t in 1..=t_max {
                csv_row(&mut *out, t, &[vp.v[t - 1], tau_adjacent(&vp, t)?, limit])?;
            }
        }
        Command::Acf { model, t, k_max, of } => {
            let p = model.params();
            let lo = if of == Series::Levels { 1 } else { 2 };
            if t < lo || k_max == 0 {
                flag_error(format!("need --t >= {lo} and --k-max >= 1"));
            }
            let vp = variance_path(p, t + k_max)?;
            writeln!(out, "k,finite_t,limit")?;
            for k in 1..=k_max {
                let (finite, limit) = match of {
                    Series::Levels => (tau_lag(&vp, t, k)?, level_acf_limit(p, k)),
                    Series::Innovations => {
                        let s2 = p.sigma_xi * p.sigma_xi;
                        (innovation_autocov(&vp, t, k)? / s2, innovation_acf_limit(p, k))
                    }
                };
                csv_row(&mut *out, k, &[finite, limit.unwrap_or(f64::NAN)])?;
            }
        }
        Command::MixingBound {
            model,
            t_window,
            k_max,
            grid,
        } => {
            let p = model.params();
            if t_window == 0 || k_max == 0 || grid < 64 {
                flag_error("need --t-window >= 1, --k-max >= 1 and --grid >= 64");
            }
            let mut report = gaussian_cur_report(p, t_window, k_max)?;
            let conditions = check_theorem_conditions(&gaussian_cur_chain(p, t_window)?, grid);
            for (i, e) in conditions.elements.iter().enumerate() {
                if !(e.symmetric && e.square_integrable && e.eta_below_one) {
                    report
                        .flags
                        .push(format!("t = {}: theorem conditions fail on the grid", i + 1));
                }
            }
            report
                .flags
                .extend(conditions.flags.into_iter().filter(|f| !f.contains("near-critical")));
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Command::Spectrum { copula, grid, top } => {
            if grid < 64 {
                flag_error("--grid must be >= 64");
            }
            let d = spectral_decomposition(&copula, grid)?;
            writeln!(out, "index,singular_value")?;
            for (i, s) in d.singular_values.iter().take(top).enumerate() {
                csv_row(&mut *out, i + 1, &[*s])?;
            }
        }
        Command::Convolve {
            copula,
            sigma,
            steps,
            quad,
            nodes,
        } => {
            if steps == 0 || quad < 64 || nodes < 101 {
                flag_error("need --steps >= 1, --quad >= 64 and --nodes >= 101");
            }
            let h = GridDistribution::normal(0.0, sigma).unwrap_or_else(|e| flag_error(e));
            let opts = IterateOptions {
                quad_n: quad,
                out_m: nodes,
                copula_grid: None,
            };
            let path = iterate_process(&h, &copula, steps, &opts)?;
            writeln!(out, "t,mean,variance,skewness,excess_kurtosis")?;
            for (t, d) in path.distributions.iter().enumerate() {
                let m = d.moments();
                csv_row(&mut *out, t + 1, &[m.mean, m.variance, m.skewness, m.excess_kurtosis])?;
            }
        }
        Command::Simulate {
            model,
            paths,
            steps,
            seed,
            summary,
        } => {
            let p = model.params();
            if paths < 2 || steps == 0 {
                flag_error("need --paths >= 2 and --steps >= 1");
            }
            let vp = variance_path(p, steps + 1)?;
            let ens = simulate_paths(&SimulationConfig {
                model: Model::Gaussian(p),
                paths,
                steps,
                seed,
            })?;
            writeln!(out, "t,sample_mean,sample_var,analytic_var,acf_k1,innovation_acf_k1")?;
            for t in 1..=steps {
                let m = sample_moments(&ens.level(t)?);
                let acf = |of| -> Result<f64> {
                    Ok(if t < steps && (of == Series::Levels || t >= 2) {
                        empirical_acf(&ens, t, 1, of)?.0
                    } else {
                        f64::NAN
                    })
                };
                let v2 = vp.v[t - 1] * vp.v[t - 1];
                csv_row(
                    &mut *out,
                    t,
                    &[m.mean, m.variance, v2, acf(Series::Levels)?, acf(Series::Innovations)?],
                )?;
            }
            let last = steps;
            let reference = GridDistribution::normal(0.0, vp.v[last - 1])?;
            let check = gaussianity_check(&ens, last, &reference)?;
            let acf_at = |of, lo: usize, limit: Option<f64>| -> Result<Option<AcfSummary>> {
                if last < lo + 1 {
                    return Ok(None);
                }
                let (estimate, standard_error) = empirical_acf(&ens, last - 1, 1, of)?;
                Ok(Some(AcfSummary {
                    t: last - 1,
                    estimate,
                    standard_error,
                    limit,
                }))
            };
            let s = SimulationSummary {
                rho: p.rho,
                sigma: p.sigma_xi,
                paths,
                steps,
                seed,
                final_variance: sample_moments(&ens.level(last)?).variance,
                analytic_final_variance: vp.v[last - 1] * vp.v[last - 1],
                skewness: check.skewness,
                excess_kurtosis: check.excess_kurtosis,
                ks_statistic: check.ks_statistic,
                ks_critical_1pct: ks_critical_1pct(paths),
                level_acf_k1: acf_at(Series::Levels, 1, level_acf_limit(p, 1).ok())?,
                innovation_acf_k1: acf_at(Series::Innovations, 2, innovation_acf_limit(p, 1).ok())?,
            };
            let json = serde_json::to_string_pretty(&s)?;
            match summary {
                Some(path) => fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => eprintln!("{json}"),
            }
        }
        Command::Star { copulas, grid } => {
            let [a, b] = copulas.as_slice() else {
                flag_error(format!("--copula must be given exactly twice (got {})", copulas.len()))
            };
            if grid < 2 {
                flag_error("--grid must be >= 2");
            }
            let product = star_product(a, b, grid)?;
            let rs = product.spearman_rho();
            let rho = (2.0 * (std::f64::consts::PI * rs / 6.0).sin()).clamp(-0.999_999, 0.999_999);
            let fit = Copula::gaussian(rho)?.discretize(grid)?;
            let report = StarReport {
                first: a.to_string(),
                second: b.to_string(),
                grid,
                spearman_rho: rs,
                nearest_gaussian_rho: rho,
                sup_residual: product.sup_distance(&fit)?,
            };
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = match apply_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
