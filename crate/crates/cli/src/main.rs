use std::process::ExitCode;

use clap::Parser;
use swimflow_cli::commands::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    ExitCode::from(run(cli, &mut std::io::stdout()))
}
