use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cbx_cli::{cmd_bench, cmd_list, cmd_run, BenchArgs, CliError, RunArgs, DEFAULT_TOLERANCE};
use clap::{Parser, Subcommand};

/// Consensus-based optimization from the command line.
///
/// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
#[derive(Parser)]
#[command(name = "cbx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and print the result as a JSON line.
    Run {
        /// JSON config file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the per-iteration trace here as JSON Lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Repeat a run over consecutive seeds and report the success rate.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: usize,
        /// First seed; defaults to the config seed.
        #[arg(long)]
        base_seed: Option<u64>,
        /// A run succeeds when its final consensus is closer than this to the known minimizer.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List the built-in test objectives.
    ListObjectives,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                cbx_cli::EXIT_CONFIG as u8
            } else {
                0
            });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let outcome: Result<(), CliError> = match cli.command {
        Command::Run {
            config,
            seed,
            trace,
        } => cmd_run(
            &RunArgs {
                config,
                seed,
                trace,
            },
            &mut out,
        )
        .map(drop),
        Command::Bench {
            config,
            runs,
            base_seed,
            tolerance,
            report,
        } => cmd_bench(
            &BenchArgs {
                config,
                runs,
                base_seed,
                tolerance,
                report,
            },
            &mut out,
        )
        .map(drop),
        Command::ListObjectives => cmd_list(&mut out),
    };
    let _ = out.flush();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
