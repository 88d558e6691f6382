mod cli;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut out = output::sink(cli.output.as_deref())?;
    let out = out.as_mut();
    match &cli.command {
        Command::Ai(a) => commands::ai(a, out)?,
        Command::Det(a) => commands::det(a, out)?,
        Command::Solve(a) | Command::Identity(a) => commands::solve(a, out)?,
        Command::Hierarchy(a) => commands::hierarchy(a, out)?,
        Command::MkdvCheck(a) => commands::mkdv_check(a, out)?,
        Command::Table(a) => commands::table(a, out)?,
        Command::Selftest(a) => return commands::selftest(a, out),
    }
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
