mod args;
mod commands;
mod error;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {jobs} workers: {e}")))?;
    }
    match &cli.command {
        Command::Family(cmd) => commands::family(cmd, &cli.out),
        Command::Metric(cmd) => commands::metric(cmd, &cli.out),
        Command::Compactness(cmd) => commands::compactness(cmd, &cli.out),
        Command::Measure(cmd) => commands::measure(cmd, &cli.out),
        Command::Rarefy(cmd) => commands::rarefy_cmd(cmd, &cli.out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.code);
    }
}
