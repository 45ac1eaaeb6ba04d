mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;
use keystep_core::Error;

use args::{Cli, Command};

/// 2: usage or configuration, 3: data, 4: numeric failure.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn run(cli: &Cli) -> keystep_core::Result<()> {
    let cfg = cli.resolve()?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if let Some(n) = cfg.thread_count()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    match &cli.command {
        Some(Command::Synth(_)) => commands::synth(&cfg),
        Some(Command::Train(a)) => commands::train(&cfg, a.resume, a.grad_check, a.save_every),
        Some(Command::Extract(_)) => commands::extract(&cfg),
        Some(Command::Eval(_)) => commands::eval(&cfg),
        None => Err(Error::Config("no command given; see --help".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
