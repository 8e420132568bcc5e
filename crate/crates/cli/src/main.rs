mod args;
mod commands;
mod error;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Context;
use crate::error::{CliError, CliResult, EXIT_VALIDATION};

/// Environment variable that caps the worker threads.
const THREADS_VAR: &str = "PSWF_RADON_THREADS";

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    init_threads()?;
    let ctx = Context::from(cli);
    match &cli.command {
        Command::Phantom(cmd) => commands::phantom(&ctx, cmd),
        Command::Forward(cmd) => commands::forward(&ctx, cmd),
        Command::Reconstruct(cmd) => commands::reconstruct(&ctx, cmd),
        Command::Sweep(cmd) => commands::sweep(&ctx, cmd),
        Command::Selftest => commands::selftest(&ctx),
        Command::Run(cmd) => commands::run(&ctx, cmd),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code >= EXIT_VALIDATION);
            ExitCode::from(code as u8)
        }
    }
}
