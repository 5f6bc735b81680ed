//! `hypstab`: check, run and cross-validate boundary-stabilization scenarios.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypstab_cli::commands::{compare, simulate, verify};
use hypstab_cli::error::{CliError, Result};
use hypstab_cli::output::Artifacts;
use hypstab_cli::scenario::{Overrides, Scenario};

/// Environment variable fixing the size of the worker pool.
const THREADS_VAR: &str = "HYPSTAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hypstab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Override `grid.nx`.
    #[arg(long)]
    grid_nx: Option<usize>,
    /// Override `run.tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Override `run.horizon`.
    #[arg(long)]
    horizon: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<Scenario> {
        let o = Overrides {
            grid_nx: self.grid_nx,
            tol: self.tol,
            horizon: self.horizon,
        };
        Scenario::load(&self.scenario, &o)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the constants ledger and smallness conditions of every edge.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Solve the closed loop and write fields, traces and a report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run even when a smallness condition fails.
        #[arg(long)]
        force: bool,
    },
    /// Compare against the upwind solver at several resolutions.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Upwind cell counts.
        #[arg(long, value_delimiter = ',', default_values_t = [100, 200, 400])]
        cells: Vec<usize>,
        /// Directory for `compare.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io("<stdout>", e.into()))?;
    writeln!(std::io::stdout().lock(), "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Verify { common } => {
            let report = verify(&common.load()?)?;
            print_json(&report)?;
            if report.all_pass {
                Ok(())
            } else {
                Err(CliError::Conditions(report.failing_edges()))
            }
        }
        Command::Simulate { common, out, force } => {
            let report = simulate(&common.load()?, &out, force)?;
            let ext = match report.extinction_time {
                Some(t) => format!("{t:.6}"),
                None => "not reached".into(),
            };
            println!(
                "wrote {}: {} edge(s), horizon {:.6}, extinction bound {:.6}, extinction time {ext}",
                out.display(),
                report.edges.len(),
                report.horizon,
                report.extinction_bound
            );
            Ok(())
        }
        Command::Compare { common, cells, out } => {
            let report = compare(&common.load()?, &cells)?;
            print!("{}", report.table());
            if let Some(dir) = out {
                let mut a = Artifacts::create(&dir)?;
                a.write_json("compare.json", &report)?;
            }
            Ok(())
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| CliError::Scenario(format!("{THREADS_VAR}={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Scenario(format!("{THREADS_VAR}: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
