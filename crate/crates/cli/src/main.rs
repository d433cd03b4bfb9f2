use anyhow::Result;
use clap::{Parser, Subcommand};
use reactor_cli::sweep::{run_sweep, SWEEP_RATIO, SWEEP_VALUES};
use reactor_cli::{commands, execute, Outcome, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reactor design by phase-field optimization.
///
/// Exit status: 0 converged, 2 not converged (artifacts still written), 1 error.
#[derive(Parser)]
#[command(name = "reactor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in a JSON config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Optimize every (k11, k22) cell of a diffusivity grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Diffusivity values for both k11 and k22.
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_VALUES)]
        values: Vec<f64>,
        /// k12 / k11 and k21 / k22.
        #[arg(long, default_value_t = SWEEP_RATIO)]
        ratio: f64,
        /// Cells run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the configured mesh with boundary tags as VTK.
    Mesh {
        config: PathBuf,
        #[arg(long, default_value = "mesh.vtk")]
        output: PathBuf,
    },
    /// Print the default configuration.
    Defaults,
}

fn load(config: &PathBuf, output: Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(out) = output {
        cfg.output = out;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run { config, output } => execute(&load(&config, output)?),
        Command::Sweep { config, output, values, ratio, jobs } => {
            let cfg = load(&config, output)?;
            let reports = run_sweep(&cfg, &values, ratio, jobs)?;
            Ok(Outcome { converged: reports.iter().all(|r| r.converged) })
        }
        Command::Mesh { config, output } => {
            commands::write_mesh(&RunConfig::load(&config)?, &output)?;
            Ok(Outcome { converged: true })
        }
        Command::Defaults => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
            Ok(Outcome { converged: true })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
