use std::process::ExitCode;

use ceo_sim::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli, &mut std::io::stdout(), &mut std::io::stderr()))
}
