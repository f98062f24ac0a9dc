//! Command-line front end for `bessel-hardy`.
//!
//! [`run`] parses the arguments, executes one subcommand and returns the
//! process exit code: 0 on success, 1 on domain or configuration errors,
//! 2 when a verification fails and 3 when quadrature does not converge or a
//! bound cannot be certified.

use std::ffi::OsString;

use bessel_hardy::Error;
use clap::Parser;

mod args;
mod commands;
mod io;
mod render;

pub use args::Cli;

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Failed,
    Uncertified,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Failed => 2,
            Outcome::Uncertified => 3,
        }
    }
}

/// Exit code for an error that aborted a subcommand.
pub fn error_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_quadrature() => 3,
        _ => 1,
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::execute(cli) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            error_code(&e)
        }
    }
}
