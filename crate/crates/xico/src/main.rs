//! Thin command-line surface over the `xico` library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! precision failure.

use clap::{Parser, Subcommand, ValueEnum};
use std::process::ExitCode;
use xico::asymptotics::{self, AsymptoticsError};
use xico::sim::{self, PsdMode, SimConfig};
use xico::{Variant, XicoError};

#[derive(Parser)]
#[command(name = "xico", version, about = "Rank-based Azadkia-Chatterjee correlation coefficient")]
struct Cli {
    /// Cap the worker thread count (falls back to XICO_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Rank,
    Ac,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Rank,
    Raw,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the coefficient from a CSV file.
    Xi {
        #[arg(long)]
        input: String,
        /// Response column name; the rest are covariates.
        #[arg(long, default_value = "y")]
        y_col: String,
        #[arg(long, value_enum, default_value_t = VariantArg::Rank)]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Asymptotic independence test (right-tailed normal).
    Test {
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "y")]
        y_col: String,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Null-variance constants sigma_d^2 (with q_d and o_d for d >= 2).
    Sigma {
        #[arg(long)]
        d: usize,
        /// Absolute error budget for the o_d quadrature (>= 1e-4).
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Mean / RMSE / rejection-frequency table for the Gaussian model.
    Simulate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        /// Comma-separated scaling factors for the last covariate.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated test levels.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        levels: Vec<f64>,
        /// Refuse non-positive-semidefinite covariances (set false to
        /// project to the nearest correlation matrix instead).
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        strict_psd: bool,
        /// Also write the report as CSV to this path.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Empirical variance of sqrt(n) xi_n under independent normals.
    Nullvar {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Mutual-pair and shared-neighbor functionals of the NN graph.
    Graphstats {
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "y")]
        y_col: String,
        #[arg(long, value_enum, default_value_t = MetricArg::Rank)]
        metric: MetricArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

struct Failure {
    message: String,
    code: u8,
}

fn fail<E: Into<XicoError>>(e: E) -> Failure {
    let e: XicoError = e.into();
    let code = match &e {
        XicoError::Data(_) => 2,
        XicoError::Asymptotics(AsymptoticsError::PrecisionNotReached { .. }) => 3,
        XicoError::Asymptotics(AsymptoticsError::DomainError(_)) => 1,
        XicoError::Nng(_) => 2,
        XicoError::Sim(_) => 2,
    };
    Failure { message: e.to_string(), code }
}

fn sim_failure(e: xico::sim::SimError) -> Failure {
    let code = match &e {
        sim::SimError::BadConfig(_) => 1,
        sim::SimError::NonPsdCovariance { .. } => 2,
        sim::SimError::Data(_) => 2,
        sim::SimError::Asymptotics(AsymptoticsError::PrecisionNotReached { .. }) => 3,
        sim::SimError::Asymptotics(_) => 1,
    };
    Failure { message: e.to_string(), code }
}

fn io_failure(path: &str, e: std::io::Error) -> Failure {
    Failure { message: format!("failed to write {path}: {e}"), code: 2 }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("XICO_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(input: &str, y_col: &str) -> Result<xico::Dataset, Failure> {
    let ds = xico::load_csv(input, y_col).map_err(fail)?;
    Ok(xico::validate(ds).map_err(fail)?)
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Xi { input, y_col, variant, seed, format } => {
            let ds = load(&input, &y_col)?;
            let mut estimates = Vec::new();
            if matches!(variant, VariantArg::Rank | VariantArg::Both) {
                estimates.push(xico::xi_rank(&ds, seed).map_err(fail)?);
            }
            if matches!(variant, VariantArg::Ac | VariantArg::Both) {
                estimates.push(xico::xi_ac(&ds, seed).map_err(fail)?);
            }
            match format {
                Format::Text => {
                    for e in &estimates {
                        println!(
                            "variant={} xi={:.3} q_n={:.3} p_n={:.3} n={} d={} seed={}",
                            e.variant, e.xi, e.q_n, e.p_n, e.n, e.d, e.seed
                        );
                    }
                }
                Format::Json => {
                    if estimates.len() == 1 {
                        println!("{}", serde_json::to_string_pretty(&estimates[0]).unwrap());
                    } else {
                        println!("{}", serde_json::to_string_pretty(&estimates).unwrap());
                    }
                }
                Format::Csv => {
                    println!("variant,xi,q_n,p_n,n,d,seed");
                    for e in &estimates {
                        println!(
                            "{},{},{},{},{},{},{}",
                            e.variant, e.xi, e.q_n, e.p_n, e.n, e.d, e.seed
                        );
                    }
                }
            }
            Ok(())
        }
        Cmd::Test { input, y_col, level, seed, format } => {
            let ds = load(&input, &y_col)?;
            let r = xico::independence_test(&ds, level, seed).map_err(fail)?;
            match format {
                Format::Text => {
                    println!(
                        "xi={:.3} z={:.3} p={:.3} level={} reject={} n={} d={} seed={seed}",
                        r.xi, r.z, r.p_one_sided, r.level, r.reject, r.n, r.d
                    );
                    for w in &r.warnings {
                        println!("warning: {w}");
                    }
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&r).unwrap()),
                Format::Csv => {
                    println!("xi,z,p_one_sided,level,reject,n,d,seed");
                    println!(
                        "{},{},{},{},{},{},{},{seed}",
                        r.xi, r.z, r.p_one_sided, r.level, r.reject, r.n, r.d
                    );
                }
            }
            Ok(())
        }
        Cmd::Sigma { d, precision, format } => {
            let c = if d >= 2 && precision != 1e-4 {
                // recompute o_d at the requested budget
                let q = asymptotics::q_const(d);
                let (o, err) = asymptotics::o_const(d, precision).map_err(fail)?;
                asymptotics::SigmaConstants {
                    d,
                    q: Some(q),
                    o: Some(o),
                    sigma_sq: 0.4 + 0.4 * q + 0.8 * o,
                    o_abs_error: err,
                    method: asymptotics::SigmaMethod::Quadrature,
                    conjectured: d == 2,
                }
            } else {
                asymptotics::sigma_sq(d).map_err(fail)?
            };
            match format {
                Format::Text => {
                    let opt = |v: Option<f64>| v.map_or("NA".into(), |v| format!("{v:.6}"));
                    println!(
                        "d={} sigma_sq={:.3} q={} o={} o_abs_error={:.1e} conjectured={}",
                        c.d,
                        c.sigma_sq,
                        opt(c.q),
                        opt(c.o),
                        c.o_abs_error,
                        c.conjectured
                    );
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&c).unwrap()),
                Format::Csv => {
                    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                    println!("d,sigma_sq,q,o,o_abs_error,conjectured");
                    println!(
                        "{},{},{},{},{},{}",
                        c.d,
                        c.sigma_sq,
                        opt(c.q),
                        opt(c.o),
                        c.o_abs_error,
                        c.conjectured
                    );
                }
            }
            Ok(())
        }
        Cmd::Simulate { d, n, rho, alpha, reps, seed, levels, strict_psd, out, format } => {
            let cfg = SimConfig {
                d,
                n,
                rho,
                alphas: alpha,
                replications: reps,
                seed,
                estimators: vec![Variant::RankAc, Variant::Ac],
                levels,
                psd_mode: if strict_psd { PsdMode::Strict } else { PsdMode::Project },
            };
            let report = sim::table_study(&cfg).map_err(sim_failure)?;
            if let Some(path) = out {
                std::fs::write(&path, report.to_csv()).map_err(|e| io_failure(&path, e))?;
            }
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                Format::Csv => print!("{}", report.to_csv()),
            }
            Ok(())
        }
        Cmd::Nullvar { d, n, reps, seed, format } => {
            let (var, se) = sim::null_variance_study(d, n, reps, seed).map_err(sim_failure)?;
            match format {
                Format::Text => {
                    println!("d={d} n={n} reps={reps} seed={seed} var={var:.3} stderr={se:.3}")
                }
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "d": d, "n": n, "reps": reps, "seed": seed,
                        "var": var, "stderr": se
                    })
                ),
                Format::Csv => {
                    println!("d,n,reps,seed,var,stderr");
                    println!("{d},{n},{reps},{seed},{var},{se}");
                }
            }
            Ok(())
        }
        Cmd::Graphstats { input, y_col, metric, seed, format } => {
            let ds = load(&input, &y_col)?;
            let (n, d) = (ds.n(), ds.d());
            let draws = xico::estimator::tie_uniforms(seed, 0, n);
            let graph = match metric {
                MetricArg::Rank => {
                    let pts = xico::rank_matrix(&ds).points_scaled();
                    xico::build_nng(&pts, n, d, &draws, xico::MetricSpace::Rank)
                }
                MetricArg::Raw => {
                    xico::build_nng(ds.x_data(), n, d, &draws, xico::MetricSpace::Raw)
                }
            }
            .map_err(fail)?;
            let f = xico::graph_functionals(&graph);
            let tied = graph.tie_counts.iter().filter(|&&m| m > 1).count();
            let (tn, cn) = (f.t_sum as f64 / n as f64, f.c_sum as f64 / n as f64);
            match format {
                Format::Text => println!(
                    "n={n} d={d} t_sum={} c_sum={} t_over_n={tn:.3} c_over_n={cn:.3} \
                     tied_queries={tied} seed={seed}",
                    f.t_sum, f.c_sum
                ),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "n": n, "d": d, "t_sum": f.t_sum, "c_sum": f.c_sum,
                        "t_over_n": tn, "c_over_n": cn,
                        "tied_queries": tied, "seed": seed
                    })
                ),
                Format::Csv => {
                    println!("n,d,t_sum,c_sum,t_over_n,c_over_n,tied_queries,seed");
                    println!("{n},{d},{},{},{tn},{cn},{tied},{seed}", f.t_sum, f.c_sum);
                }
            }
            Ok(())
        }
    }
}
