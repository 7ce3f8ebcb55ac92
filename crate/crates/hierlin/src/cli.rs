//! The `hierlin` command-line front end.
//!
//! Four subcommands: `table1` reproduces the benchmark simulation study,
//! `turlach` traces the stage-one failure curve of two-stage selection,
//! `prop2` certifies the block-covariance identity numerically, and
//! `custom` runs an experiment described by a config file. Every run writes
//! its results (CSV or JSON) plus a JSON manifest holding the full
//! configuration, seed and versions, so a run can be reproduced exactly.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on flag or config
//! errors.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config, serialize_config, table1_config, ConfigError};
use crate::data::{table1_spec_with_p, turlach_spec, DesignConfig, DesignFamily};
use crate::evaluation::{monte_carlo, prop2_check, turlach_curve, Method, MetricsReport};

#[derive(Parser, Debug)]
#[command(
    name = "hierlin",
    version,
    about = "Variable selection for high-dimensional linear regression with interactions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Base seed for every random stream of the run.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads. Defaults to the HIERLIN_THREADS environment
    /// variable, then to the available parallelism. Results do not depend
    /// on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Directory the result and manifest files are written to.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Format of the results file.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo benchmark: n = 200, p = 1000, AR(1) design, 9 true
    /// effects; reports selection and prediction metrics per method.
    Table1 {
        #[command(flatten)]
        common: CommonArgs,
        /// Monte Carlo replicates per method.
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        /// Comma-separated methods to run (two_stage_fs, iform,
        /// two_stage_lasso, iform_lasso, oracle).
        #[arg(long, value_delimiter = ',', default_values_t = [
            "two_stage_fs".to_string(), "iform".to_string(), "oracle".to_string()
        ])]
        methods: Vec<String>,
    },
    /// Stage-one selection frequency of X1 for Y = (X1 - c)^2 + X2 + ... +
    /// X5 + eps across a grid of c values.
    Turlach {
        #[command(flatten)]
        common: CommonArgs,
        /// Replicates per c value.
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        /// Sample size per replicate.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Grid of c values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
        c_values: Vec<f64>,
    },
    /// Numerical check that the mains-only population regression recovers
    /// the true main coefficients under a symmetric design, and fails to on
    /// the asymmetric uniform construction.
    Prop2 {
        #[command(flatten)]
        common: CommonArgs,
        /// Sample size standing in for the population.
        #[arg(long, default_value_t = 500_000)]
        n_big: usize,
        /// Dimension of the symmetric-design check.
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// AR(1) correlation of the symmetric design.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
    },
    /// Run a single experiment described by a plain-text config file.
    Custom {
        #[command(flatten)]
        common: CommonArgs,
        /// Path to the config file.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
enum RunError {
    Config(ConfigError),
    Numerical(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<crate::evaluation::EvalError> for RunError {
    fn from(e: crate::evaluation::EvalError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Numerical(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Numerical(format!("serialization error: {e}"))
    }
}

/// Runs the CLI on explicit arguments (`argv[0]` is the program name) and
/// returns the process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            if e.use_stderr() {
                eprint!("{e}");
                return 2;
            }
            print!("{e}");
            return 0;
        }
    };

    let threads = resolve_threads(common_of(&cli.command).threads);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return 1;
        }
    };

    match pool.install(|| dispatch(&cli.command, threads)) {
        Ok(()) => 0,
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(RunError::Numerical(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn common_of(command: &Command) -> &CommonArgs {
    match command {
        Command::Table1 { common, .. }
        | Command::Turlach { common, .. }
        | Command::Prop2 { common, .. }
        | Command::Custom { common, .. } => common,
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("HIERLIN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|t| *t >= 1)
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn dispatch(command: &Command, threads: usize) -> Result<(), RunError> {
    let started = Instant::now();
    match command {
        Command::Table1 {
            common,
            replicates,
            methods,
        } => {
            let methods = parse_methods(methods)?;
            let mut reports = Vec::new();
            let mut experiments = Vec::new();
            for &method in &methods {
                let cfg = table1_config(method, *replicates, common.seed);
                let report = monte_carlo(&cfg)?;
                experiments.push(cfg);
                reports.push(report);
            }
            let results_text = match common.format {
                OutputFormat::Csv => reports_csv(&reports),
                OutputFormat::Json => serde_json::to_string_pretty(&reports)?,
            };
            print!("{}", reports_csv(&reports));
            let results_path = write_results(common, "table1", &results_text)?;
            let manifest = serde_json::json!({
                "command": "table1",
                "version": env!("CARGO_PKG_VERSION"),
                "seed": common.seed,
                "threads": threads,
                "replicates": replicates,
                "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
                "format": format_name(common.format),
                "results_file": results_path,
                "experiments": experiments,
                "reports": reports,
                "wall_time_seconds": started.elapsed().as_secs_f64(),
            });
            write_manifest(common, "table1", &manifest)
        }
        Command::Turlach {
            common,
            replicates,
            n,
            c_values,
        } => {
            let curve = turlach_curve(c_values, *replicates, *n, common.seed)?;
            let mut csv = String::from("c,freq_select_x1\n");
            for (c, f) in &curve {
                csv.push_str(&format!("{c},{f:.4}\n"));
            }
            let results_text = match common.format {
                OutputFormat::Csv => csv.clone(),
                OutputFormat::Json => serde_json::to_string_pretty(&curve)?,
            };
            print!("{csv}");
            let results_path = write_results(common, "turlach", &results_text)?;
            let manifest = serde_json::json!({
                "command": "turlach",
                "version": env!("CARGO_PKG_VERSION"),
                "seed": common.seed,
                "threads": threads,
                "replicates": replicates,
                "n": n,
                "c_values": c_values,
                "format": format_name(common.format),
                "results_file": results_path,
                "curve": curve,
                "wall_time_seconds": started.elapsed().as_secs_f64(),
            });
            write_manifest(common, "turlach", &manifest)
        }
        Command::Prop2 {
            common,
            n_big,
            p,
            rho,
        } => {
            if *p < 10 {
                return Err(RunError::Config(ConfigError::Validation {
                    field: "--p".into(),
                    message: "the benchmark truth needs p >= 10".into(),
                }));
            }
            if !(rho.abs() < 1.0) {
                return Err(RunError::Config(ConfigError::Validation {
                    field: "--rho".into(),
                    message: format!("|rho| < 1 required, got {rho}"),
                }));
            }
            let gaussian_design = DesignConfig {
                n: *n_big,
                p: *p,
                family: DesignFamily::GaussianAr1 { rho: *rho },
                seed: common.seed,
            };
            let gaussian_truth = table1_spec_with_p(*p);
            let gaussian = prop2_check(&gaussian_design, &gaussian_truth)?;

            let uniform_truth = turlach_spec();
            let uniform_design = DesignConfig {
                n: *n_big,
                p: uniform_truth.p,
                family: DesignFamily::Uniform01,
                seed: common.seed.wrapping_add(1),
            };
            let uniform = prop2_check(&uniform_design, &uniform_truth)?;

            println!(
                "symmetric ar1(rho={rho}, p={p}): max |slope - beta| = {:.6}",
                gaussian.max_abs_deviation
            );
            println!(
                "uniform turlach design: slope(X1) = {:.6} while beta_1 = {} (deviation {:.6})",
                uniform.fitted_slopes[0], uniform_truth.beta[0], uniform.deviations[0]
            );

            let results = serde_json::json!({
                "gaussian": { "design": gaussian_design, "report": gaussian },
                "uniform_turlach": { "design": uniform_design, "report": uniform },
            });
            let results_text = serde_json::to_string_pretty(&results)?;
            let results_path = write_named_results(common, "prop2_results.json", &results_text)?;
            let manifest = serde_json::json!({
                "command": "prop2",
                "version": env!("CARGO_PKG_VERSION"),
                "seed": common.seed,
                "threads": threads,
                "n_big": n_big,
                "p": p,
                "rho": rho,
                "results_file": results_path,
                "wall_time_seconds": started.elapsed().as_secs_f64(),
            });
            write_manifest(common, "prop2", &manifest)
        }
        Command::Custom { common, config } => {
            let cfg = load_config(config)?;
            let report = monte_carlo(&cfg)?;
            let reports = vec![report];
            let results_text = match common.format {
                OutputFormat::Csv => reports_csv(&reports),
                OutputFormat::Json => serde_json::to_string_pretty(&reports)?,
            };
            print!("{}", reports_csv(&reports));
            let results_path = write_results(common, "custom", &results_text)?;
            let manifest = serde_json::json!({
                "command": "custom",
                "version": env!("CARGO_PKG_VERSION"),
                "threads": threads,
                "config_file": config,
                "config_text": serialize_config(&cfg),
                "experiment": cfg,
                "format": format_name(common.format),
                "results_file": results_path,
                "reports": reports,
                "wall_time_seconds": started.elapsed().as_secs_f64(),
            });
            write_manifest(common, "custom", &manifest)
        }
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, RunError> {
    let mut methods = Vec::new();
    for name in names {
        let m = Method::parse(name).ok_or_else(|| {
            RunError::Config(ConfigError::Validation {
                field: "--methods".into(),
                message: format!(
                    "unknown method `{name}` (expected one of {})",
                    Method::ALL.map(|m| m.name()).join(", ")
                ),
            })
        })?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(RunError::Config(ConfigError::Validation {
            field: "--methods".into(),
            message: "at least one method is required".into(),
        }));
    }
    Ok(methods)
}

fn reports_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(MetricsReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn format_name(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

fn write_results(common: &CommonArgs, stem: &str, text: &str) -> Result<PathBuf, RunError> {
    let name = match common.format {
        OutputFormat::Csv => format!("{stem}_results.csv"),
        OutputFormat::Json => format!("{stem}_results.json"),
    };
    write_named_results(common, &name, text)
}

fn write_named_results(common: &CommonArgs, name: &str, text: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(&common.output_dir)?;
    let path = common.output_dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_manifest(
    common: &CommonArgs,
    stem: &str,
    manifest: &serde_json::Value,
) -> Result<(), RunError> {
    let path = common.output_dir.join(format!("{stem}_manifest.json"));
    std::fs::write(&path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}
