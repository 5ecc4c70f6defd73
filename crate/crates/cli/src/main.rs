mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CmdResult, Failure};

fn run(cli: Cli) -> CmdResult {
    let (name, args) = match &cli.command {
        Command::ListExamples => return commands::cmd_list_examples(),
        Command::Solve(a) => ("solve", a),
        Command::Compare(a) => ("compare", a),
        Command::Convergence(a) => ("convergence", a),
    };
    let m = manifest::resolve(name, args)?;
    if let Some(n) = m.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { kind: "config", message: format!("cannot start {n} worker threads: {e}") })?;
    }
    match name {
        "solve" => commands::cmd_solve(&m, cli.quiet),
        "compare" => commands::cmd_compare(&m, cli.quiet),
        _ => commands::cmd_convergence(&m, cli.quiet),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::FAILURE
        }
    }
}
