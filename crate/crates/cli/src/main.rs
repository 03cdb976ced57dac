//! `mesur`: command-line front end for the mesur store.
//!
//! Exit codes: 0 success, 1 domain or data error, 2 usage error.

mod args;
mod commands;
mod config;
mod workspace;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Ctx;
use crate::config::Config;

/// Bad invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Input that was read but could not be accepted; exits with status 1.
#[derive(Debug)]
pub struct DataError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for DataError {}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("MESUR_LOG")
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Config::resolve(&cli.global) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("mesur: {e:#}");
            return ExitCode::from(2);
        }
    };
    init_logging(cfg.verbosity);
    let ctx = Ctx {
        cfg,
        format: cli.global.format,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(cli.command, &ctx, &mut out).and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mesur: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
