use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdgml::{run, Command, RunError, RunOptions};

/// HDG Helmholtz solves and local Fourier analysis.
///
/// Log verbosity follows the HDGML_LOG environment variable
/// (error, warn, info, debug); the default is info.
#[derive(Parser)]
#[command(name = "hdgml", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multilevel-preconditioned GMRES solves or the transfer stability check.
    Solve(Args),
    /// Local Fourier analysis sweeps and the smoothing experiment.
    Lfa(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run configuration (key = value lines with [section] headers).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized test vectors.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; accepted for interface stability, runs use one.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HDGML_LOG", "info")).init();
    // usage errors exit 1; status 2 is reserved for max_iter
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Lfa(a) => (Command::Lfa, a),
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    match run(command, &text, &args.out, RunOptions { seed: args.seed, threads: args.threads }) {
        Ok(o) if o.converged => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("warning: maximum number of iterations reached");
            ExitCode::from(2)
        }
        Err(RunError::Config(e)) => {
            eprintln!("error: {}: {e}", args.config.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
