//! Command-line front end for neighbor-diversity scoring.

pub mod args;
pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Score(a) => commands::score(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Generate(a) => commands::generate_cmd(a),
        Command::Sweep(a) => sweep::sweep_cmd(a),
        Command::Bench(a) => bench::bench_cmd(a),
    }
}
