use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phdae_mor::transfer::FrequencyGrid;
use phdae_mor_cli::{
    generate, parse_r_sweep, parse_range, regularize, resolve_out, run, validate, BenchSpec,
    CliError, CliResult, ExperimentConfig, MethodSpec, RegularizeOptions, Source,
};

/// Structure-preserving model reduction of port-Hamiltonian descriptor systems.
#[derive(Parser)]
#[command(name = "phdae-mor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark system to a container directory.
    Generate {
        /// Generator spec, e.g. `mass-spring:k=100` or `oseen:cells=8`.
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the structural conditions of a container.
    Validate { path: PathBuf },
    /// Reduce to a single order.
    Reduce {
        #[command(flatten)]
        common: ReduceArgs,
        #[arg(long)]
        r: usize,
    },
    /// Reduce over a range of orders.
    Sweep {
        #[command(flatten)]
        common: ReduceArgs,
        /// `lo:hi:step`.
        #[arg(long)]
        r_sweep: String,
    },
    /// Remove the singular part, optionally with condensed form or output feedback.
    Regularize {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the condensed form to `OUT/condensed`.
        #[arg(long)]
        condensed: bool,
        /// Output feedback gain: `I`, a scalar, or a comma list (diagonal).
        #[arg(long)]
        feedback: Option<String>,
    },
}

#[derive(Args)]
struct ReduceArgs {
    /// Container directory or generator spec.
    source: String,
    /// Reducer (`index1-shifted`, `index1-block`, `index2`, `index2-augmented`,
    /// `mixed`, or `theorem-N`), optionally prefixed with `irka-`. Defaults to
    /// IRKA with the reducer matching the system structure.
    #[arg(long, default_value = "irka")]
    method: String,
    /// Error grid `lo:hi:count` (log-spaced, rad/s).
    #[arg(long, default_value = "1e-4:1e4:400")]
    freq_grid: String,
    /// Range `lo:hi` of the log-spaced starting points.
    #[arg(long, default_value = "1e-2:1e4")]
    init: String,
    /// Seed for random tangential directions (multi-input systems).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the relative H2 error.
    #[arg(long)]
    h2: bool,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

impl ReduceArgs {
    fn config(self, rs: Vec<usize>) -> CliResult<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(
            self.source.parse::<Source>()?,
            self.method.parse::<MethodSpec>()?,
            rs,
            resolve_out(self.out),
        );
        cfg.grid = self
            .freq_grid
            .parse::<FrequencyGrid>()
            .map_err(|e| CliError::Usage(format!("--freq-grid: {e}")))?;
        cfg.init = parse_range(&self.init)?;
        cfg.seed = self.seed;
        cfg.h2 = self.h2;
        cfg.max_iterations = self.max_iterations;
        cfg.tol = self.tol;
        Ok(cfg)
    }
}

fn sweep(cfg: ExperimentConfig) -> CliResult<bool> {
    let rows = run(&cfg)?;
    println!("r    interp_residual  min_eig_W     rel_hinf      converged");
    for row in &rows {
        println!(
            "{:<4} {:<16.3e} {:<13.3e} {:<13.3e} {}",
            row.r,
            row.interp_residual_max,
            row.min_eig_w,
            row.rel_hinf,
            row.converged.map_or("-".to_string(), |c| c.to_string())
        );
    }
    println!("wrote {}", cfg.out.join("errors.csv").display());
    Ok(true)
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Generate { spec, out } => {
            let out = resolve_out(out);
            let b = generate(&spec.parse::<BenchSpec>()?, &out)?;
            println!(
                "{}: n = {}, m = {} -> {}",
                b.name,
                b.system.n(),
                b.system.m(),
                out.display()
            );
            Ok(true)
        }
        Command::Validate { path } => {
            let (report, passed) = validate(&path)?;
            print!("{report}");
            Ok(passed)
        }
        Command::Reduce { common, r } => sweep(common.config(vec![r])?),
        Command::Sweep { common, r_sweep } => {
            let rs = parse_r_sweep(&r_sweep)?;
            sweep(common.config(rs)?)
        }
        Command::Regularize {
            path,
            out,
            condensed,
            feedback,
        } => {
            let out = resolve_out(out);
            let report = regularize(
                &path,
                &out,
                &RegularizeOptions {
                    condensed,
                    feedback,
                },
            )?;
            print!("{report}");
            println!("wrote {}", out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
