use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmcharge::Policy;
use swarmcharge_cli::{cmd_run, cmd_sweep, CliError, RunArgs, SweepArgs};

#[derive(Parser)]
#[command(name = "swarmcharge", version, about = "Drone swarm recharge coordination simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single run and print its record as CSV.
    Run {
        /// Decision policy: BL or CT.
        #[arg(long)]
        policy: Policy,
        /// Mean battery consumption per tick, in SOC points.
        #[arg(long)]
        bc: f64,
        /// Charging capacity as a percentage of alive drones.
        #[arg(long)]
        b: f64,
        #[arg(long)]
        seed: u64,
        /// Config file supplying the fixed parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write a per-tick trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the full factorial sweep and write runs, summaries and plot data.
    Sweep {
        /// Config file; reference defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            policy,
            bc,
            b,
            seed,
            config,
            trace,
        } => {
            let args = RunArgs {
                policy,
                bc,
                b,
                seed,
                config,
                trace,
            };
            cmd_run(&args, io::stdout().lock())
        }
        Command::Sweep {
            config,
            out,
            jobs,
            seed,
        } => {
            let outcome = cmd_sweep(&SweepArgs {
                config,
                out: out.clone(),
                jobs,
                seed,
            })?;
            eprintln!(
                "wrote {} runs over {} scenarios to {}",
                outcome.runs,
                outcome.scenarios,
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
