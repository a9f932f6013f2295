//! Command-line front end for the maryland numerical laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical guard
//! violation, 4 failed assertion in `lemma-suite`.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, CliResult};
use config::{AlphaSpec, ExperimentConfig, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "maryland",
    version,
    about = "Numerical laboratory for the tangent-potential quasiperiodic operator"
)]
struct Cli {
    /// Configuration file (flat dotted key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files and manifests.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores). Output bytes do not depend on
    /// this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for tabular data.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Coupling λ > 0.
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Frequency: golden, sqrt2m1, a decimal in (0,1), or coeffs:a1,a2,…
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// Phase θ.
    #[arg(long, global = true)]
    theta: Option<f64>,

    /// Energy E.
    #[arg(long, global = true)]
    energy: Option<f64>,

    /// ε for the interval-scheme machinery; must satisfy 0 < ε < L(E)/600.
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Cocycle length for Birkhoff averages.
    #[arg(long, global = true)]
    k: Option<usize>,

    /// Comma-separated site list for per-k commands.
    #[arg(long, global = true)]
    k_list: Option<String>,

    /// θ-quadrature grid size.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Box size for eigenvalue problems.
    #[arg(long, global = true)]
    n_box: Option<usize>,

    /// k-range lo:hi for the decay pipeline.
    #[arg(long, global = true)]
    k_range: Option<String>,

    /// Energy window lo,hi for eigenvalue selection.
    #[arg(long, global = true)]
    energy_window: Option<String>,

    /// Index of the eigenvalue inside the window (ascending).
    #[arg(long, global = true)]
    which_eigenvalue: Option<usize>,

    /// Box left endpoint for `green`.
    #[arg(long, global = true)]
    x1: Option<i64>,

    /// Box right endpoint for `green`.
    #[arg(long, global = true)]
    x2: Option<i64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov exponents: closed form, Birkhoff averages, and the root of
    /// the constant-matrix characteristic equation, over an energy grid.
    Lyapunov,
    /// Growth of the determinant sequence P̃_k against its asymptotic
    /// bounds.
    Detgrowth,
    /// 3ε-uniformity of the interval-scheme node sets.
    Uniformity,
    /// The raw interval-scheme arithmetic per site.
    Scheme,
    /// Box Green's functions: determinant-ratio and direct routes.
    Green,
    /// Eigenfunction decay pipeline on a finite box.
    Localize,
    /// Run every lemma-level check as one batch; nonzero exit on failure.
    LemmaSuite,
    /// Closed-form and Birkhoff Lyapunov values over a (λ, E) product grid.
    Sweep,
}

fn build_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = cli.lambda {
        cfg.lambda = v;
    }
    if let Some(a) = &cli.alpha {
        cfg.alpha = AlphaSpec::parse(a)?;
    }
    if let Some(v) = cli.theta {
        cfg.theta = v;
    }
    if let Some(v) = cli.energy {
        cfg.energy = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = Some(v);
    }
    if let Some(v) = cli.k {
        cfg.k = v;
    }
    if let Some(list) = &cli.k_list {
        cfg.apply("run.k_list", list)?;
    }
    if let Some(v) = cli.grid {
        cfg.grid = v;
        cfg.theta_grid = v;
    }
    if let Some(v) = cli.n_box {
        cfg.n_box = v;
    }
    if let Some(r) = &cli.k_range {
        cfg.apply("run.k_range", r)?;
    }
    if let Some(w) = &cli.energy_window {
        cfg.apply("model.energy_window", w)?;
    }
    if let Some(v) = cli.which_eigenvalue {
        cfg.which_eigenvalue = v;
    }
    if let Some(v) = cli.x1 {
        cfg.x1 = v;
    }
    if let Some(v) = cli.x2 {
        cfg.x2 = v;
    }
    if let Some(dir) = &cli.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(f) = &cli.format {
        cfg.format = match f.as_str() {
            "json" => OutputFormat::Json,
            _ => OutputFormat::Csv,
        };
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<i32> {
    if let Some(n) = cli.threads {
        // ignore the error if a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cfg = build_config(cli)?;
    match cli.command {
        Command::Lyapunov => commands::cmd_lyapunov(&cfg),
        Command::Detgrowth => commands::cmd_detgrowth(&cfg),
        Command::Uniformity => commands::cmd_uniformity(&cfg),
        Command::Scheme => commands::cmd_scheme(&cfg),
        Command::Green => commands::cmd_green(&cfg),
        Command::Localize => commands::cmd_localize(&cfg),
        Command::LemmaSuite => commands::cmd_lemma_suite(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Model(e)) => {
            let code = match e {
                maryland::Error::SingularPhase { .. }
                | maryland::Error::SingularDenominator { .. }
                | maryland::Error::BoxTooSmall { .. }
                | maryland::Error::DegenerateRoots => 3,
                _ => 2,
            };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}
