//! `flowkit` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure
//! (divergence, non-convergence, non-finite scores).

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;

/// A failed run: message for stderr plus the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<flowkit::Error> for Failure {
    fn from(e: flowkit::Error) -> Self {
        Self {
            code: if e.is_numeric_failure() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, Failure> {
    let cmd = Cli::command();
    // Required flags may come from the config file, so the first pass only
    // locates it and records which flags the command line set.
    let lenient = cmd.clone().ignore_errors(true).try_get_matches_from(&argv).ok();
    let extra = match lenient.as_ref().and_then(config::config_path) {
        Some(path) => config::config_args(&path, &cmd, lenient.as_ref().expect("checked"))?,
        None => Vec::new(),
    };
    let merged: Vec<OsString> = argv.into_iter().chain(extra).collect();
    let matches = cmd.try_get_matches_from(&merged).unwrap_or_else(|e| e.exit());
    Cli::from_arg_matches(&matches).map_err(|e| Failure::usage(e.to_string()))
}

fn run(argv: Vec<OsString>) -> Result<String, Failure> {
    let cli = parse(argv)?;
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", cli.out_dir.display())))?;
    let out = commands::dispatch(&cli)?;
    Ok(out.render(cli.format))
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
