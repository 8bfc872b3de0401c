mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{SimulateArgs, Written};
use config::JobArgs;
use error::CliResult;

/// Compile sampled functions and grayscale images into state-preparation circuits.
#[derive(Parser)]
#[command(name = "fsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a function; writes circuit.json, report.json and optionally circuit.qasm.
    Compile(JobArgs),
    /// Simulate a compiled circuit, or compile and simulate a function.
    Simulate {
        #[command(flatten)]
        job: JobArgs,
        /// Circuit JSON to run instead of compiling.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Reference state (little-endian complex128) to compare against.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Write the final amplitudes to state.bin.
        #[arg(long)]
        save_state: bool,
    },
    /// Compile across a range of windows; writes sweep.csv.
    Sweep(JobArgs),
    /// Convert circuit JSON to OpenQASM 2.0.
    Export {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Compile a square binary PGM image into an FRQI state.
    Image {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        image: PathBuf,
        /// Also simulate and report the infidelity against the exact image state.
        #[arg(long)]
        simulate: bool,
    },
    /// Time both loaders over a window range; writes bench.csv.
    Bench(JobArgs),
}

fn run(cli: Cli) -> CliResult<Written> {
    match cli.command {
        Command::Compile(a) => commands::compile(&a.resolve()?),
        Command::Simulate { job, circuit, target, save_state } => {
            let job = job.resolve()?;
            commands::simulate(&job, SimulateArgs { circuit: circuit.as_deref(), target: target.as_deref(), save_state })
        }
        Command::Sweep(a) => commands::sweep(&a.resolve()?),
        Command::Export { job, circuit } => commands::export(&job.resolve()?, &circuit),
        Command::Image { job, image, simulate } => commands::image(&job.resolve()?, &image, simulate),
        Command::Bench(a) => {
            let mut job = a.resolve()?;
            job.fill_bench_defaults();
            commands::bench(&job)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(written) => {
            println!("{}", written.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
