//! Command-line front end. Each subcommand reads one JSON configuration and
//! writes its results into an output directory.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::json;

use crate::burgers_mean::{hopf_cole_circle, solve_mean, solve_mean_line, MeanError};
use crate::combinatorics::{a_closed, a_recursive, bound_value, CombinatoricsError, Leaves};
use crate::config::{ConfigError, PropagatorConfig};
use crate::multiindex::{enumerate_truncated, MultiIndex, WeightSpec};
use crate::noise::{verify_bound0, NoiseCoefficients};
use crate::pde::Field1D;
use crate::propagator::{solve_with, write_outputs, PropagatorError, SolveOptions};
use crate::validate::{report_all, ValidateError};

#[derive(Debug, Parser)]
#[command(
    name = "wickburgers",
    version,
    about = "Wiener-chaos solver for the Wick-stochastic Burgers equation"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the propagator system and write coefficients and norms.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Keep every K-th time level (overrides the configuration).
        #[arg(long, value_name = "K")]
        snapshot_stride: Option<usize>,
    },
    /// Solve the deterministic Burgers equation for the mean coefficient.
    Mean {
        #[command(flatten)]
        io: Io,
        /// Also compare against the Hopf-Cole solution.
        #[arg(long)]
        hopf_cole: bool,
        #[arg(long, value_name = "K")]
        snapshot_stride: Option<usize>,
    },
    /// Tabulate the quadratic recursion and its closed form.
    Comb {
        #[arg(long)]
        max_order: u32,
        /// Number of variables.
        #[arg(long)]
        support: usize,
        /// Weights for the leaves; the default is q_k = 2k².
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Write comb.csv here instead of printing the table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the boundedness condition of the noise coefficients.
    NoiseReport {
        #[command(flatten)]
        io: Io,
    },
    /// Run every consistency check and write a JSON report.
    Validate {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Propagator(PropagatorError),
    #[error(transparent)]
    Mean(#[from] MeanError),
    #[error(transparent)]
    Validate(ValidateError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl From<PropagatorError> for CliError {
    fn from(e: PropagatorError) -> Self {
        match e {
            PropagatorError::Config(c) => CliError::Config(c),
            other => CliError::Propagator(other),
        }
    }
}

impl From<ValidateError> for CliError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Propagator(p) => p.into(),
            other => CliError::Validate(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("WICKBURGERS_LOG", "warn")).try_init();
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve { io, snapshot_stride } => {
            let cfg = PropagatorConfig::from_path(&io.config)?;
            let options = SolveOptions {
                snapshot_stride,
                ..SolveOptions::default()
            };
            let sol = solve_with(&cfg, &options)?;
            write_outputs(&sol, &io.out)?;
            log::info!("solve finished in {:.2}s", sol.elapsed_seconds);
            Ok(())
        }
        Command::Mean {
            io,
            hopf_cole,
            snapshot_stride,
        } => mean(&io, hopf_cole, snapshot_stride),
        Command::Comb {
            max_order,
            support,
            config,
            lambda,
            m,
            out,
        } => {
            let weights = match config {
                Some(path) => PropagatorConfig::from_path(&path)?.weights,
                None => WeightSpec::default(),
            };
            let table = comb_table(max_order, support, &weights, lambda, m)?;
            match out {
                Some(dir) => {
                    create_dir(&dir)?;
                    write(&dir.join("comb.csv"), &table)
                }
                None => {
                    let _ = std::io::stdout().write_all(table.as_bytes());
                    Ok(())
                }
            }
        }
        Command::NoiseReport { io } => {
            let cfg = PropagatorConfig::from_path(&io.config)?;
            let spec = cfg
                .noise
                .as_ref()
                .ok_or_else(|| ConfigError::invalid("noise", "the noise report needs a noise block"))?;
            let grid = cfg.grid()?;
            let coeffs = NoiseCoefficients::assemble(spec, grid, cfg.t_final, cfg.truncation.d);
            let report = verify_bound0(&coeffs, &spec.bound_weights, spec.r);
            create_dir(&io.out)?;
            write(&io.out.join("bound0.csv"), &report.to_csv())?;
            let bad: Vec<usize> = report.violations().map(|r| r.k).collect();
            if bad.is_empty() {
                println!("bound holds for k = 1..={}", cfg.truncation.d);
            } else {
                println!("bound fails for k in {bad:?}");
            }
            Ok(())
        }
        Command::Validate { io } => {
            let cfg = PropagatorConfig::from_path(&io.config)?;
            let report = report_all(&cfg)?;
            create_dir(&io.out)?;
            write(&io.out.join("report.json"), &report.to_json())?;
            let summary = report.summary();
            write(&io.out.join("summary.txt"), &summary)?;
            print!("{summary}");
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Failed("at least one check failed".into()))
            }
        }
    }
}

fn field_rows(out: &mut String, t: f64, f: &Field1D) {
    for (x, v) in f.grid().points().iter().zip(f.values()) {
        let _ = writeln!(out, "{t:.16e},{x:.16e},{v:.16e}");
    }
}

fn mean(io: &Io, hopf_cole: bool, stride: Option<usize>) -> Result<(), CliError> {
    let cfg = PropagatorConfig::from_path(&io.config)?;
    let grid = cfg.grid()?;
    let stride = stride.unwrap_or(cfg.snapshot_stride);
    let u0 = cfg.initial_field(&MultiIndex::zero(), grid);
    let direct = solve_mean(&u0, cfg.forcing.as_ref(), cfg.t_final, cfg.dt, stride)?;
    create_dir(&io.out)?;
    let mut csv = String::from("t,x,value\n");
    for (t, f) in direct.times.iter().zip(&direct.snapshots) {
        field_rows(&mut csv, *t, f);
    }
    write(&io.out.join("mean.csv"), &csv)?;
    let mut meta = json!({
        "energy": {"h2_integral": direct.energy.h2_integral, "h1_sup": direct.energy.h1_sup},
    });
    if hopf_cole {
        let mut csv = String::from("t,x,value\n");
        let mut diff: f64 = 0.0;
        if grid.is_circle() {
            for (t, f) in direct.times.iter().zip(&direct.snapshots) {
                let exact = hopf_cole_circle(&u0, *t)?;
                diff = diff.max(exact.max_abs_diff(f));
                field_rows(&mut csv, *t, &exact);
            }
        } else {
            let hc = solve_mean_line(&u0, cfg.forcing.as_ref(), cfg.t_final, cfg.dt, stride)?;
            for ((t, f), g) in hc
                .trajectory
                .times
                .iter()
                .zip(&hc.trajectory.snapshots)
                .zip(&direct.snapshots)
            {
                diff = diff.max(f.max_abs_diff(g));
                field_rows(&mut csv, *t, f);
            }
            meta["v_range"] = json!([hc.v_min, hc.v_max]);
            meta["v_bounds"] = json!([hc.v_bounds.0, hc.v_bounds.1]);
        }
        write(&io.out.join("hopf_cole.csv"), &csv)?;
        meta["hopf_cole_max_difference"] = json!(diff);
        println!("max |direct - Hopf-Cole| = {diff:.3e}");
    }
    write(
        &io.out.join("mean.json"),
        &serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )
}

/// CSV of `A_α` by recursion and closed form with leaves `4λ² q_k^m`, and
/// the floating-point bound `(2λ)^{2|α|} C_{|α|−1} (|α| choose α) 𝔮^{mα}`.
pub fn comb_table(
    max_order: u32,
    support: usize,
    q: &WeightSpec,
    lambda: f64,
    m: f64,
) -> Result<String, CombinatoricsError> {
    let exact = |x: f64| BigRational::from_float(x).ok_or(CombinatoricsError::Overflow(x));
    let mut leaves = Leaves::new();
    for k in 1..=support {
        let unit = MultiIndex::unit(k);
        let q_m = match q.weight_pow_exact(&unit, m as i32) {
            Some(v) if m.fract() == 0.0 => v,
            _ => exact(q.ln_weight_pow(&unit, m).exp())?,
        };
        leaves.insert(k, exact(4.0 * lambda * lambda)? * q_m);
    }
    let mut out = String::from("multiindex,order,A_recursive,A_closed,bound\n");
    for alpha in enumerate_truncated(support, max_order).into_iter().skip(1) {
        let rec = a_recursive(&alpha, &leaves)?;
        let closed = a_closed(&alpha, &leaves)?;
        let bound = bound_value(&alpha, lambda, m, q)?.full;
        let _ = writeln!(out, "{},{},{},{},{:.16e}", alpha, alpha.order(), rec, closed, bound);
    }
    Ok(out)
}
