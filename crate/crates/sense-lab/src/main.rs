//! `sense-lab` binary entry point.

use clap::Parser;

use sense_lab::cli::Cli;
use sense_lab::commands;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = commands::dispatch(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
