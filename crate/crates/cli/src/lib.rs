//! `rjm` command-line front end.
//!
//! Every failure prints one line on stderr, `ERROR <code> <subcommand>: <message>`,
//! and exits with the matching code: 1 config, 2 divergence, 3 io,
//! 4 property violation.

mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;
use rjm_core::losses::ScalarLink;

pub use args::{
    BoundsArgs, Cli, Command, CompareArgs, GenDataArgs, GlobalArgs, RunOverrides, TrainArgs,
    VerifyArgs,
};
pub use commands::bounds::{BoundsGrid, OptimizerSelection, BOUNDS_CSV_HEADER};
pub use commands::verify::{run_suite, verify_losses_with, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn property(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PROPERTY,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<rjm_core::Error> for CliError {
    fn from(e: rjm_core::Error) -> Self {
        use rjm_core::Error as E;
        let code = match &e {
            E::Divergence { .. } => EXIT_DIVERGENCE,
            E::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub(crate) fn report_error(subcommand: &str, err: &CliError) {
    let one_line = err.message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("ERROR {} {}: {}", err.code, subcommand, one_line);
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_inner(args, None)
}

/// Like [`run`], but `verify-losses` checks `ce` and `rjm` in place of the
/// shipped links.
pub fn run_with_links<I, T>(args: I, ce: &dyn ScalarLink<f64>, rjm: &dyn ScalarLink<f64>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_inner(args, Some((ce, rjm)))
}

fn run_inner<I, T>(args: I, links: Option<commands::Links<'_>>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let sub = args
                .get(1)
                .and_then(|a| a.to_str())
                .filter(|a| !a.starts_with('-'))
                .unwrap_or("rjm")
                .to_string();
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            report_error(&sub, &CliError::config(first.trim_start_matches("error: ")));
            return EXIT_CONFIG;
        }
    };
    let name = cli.command.name();
    match commands::dispatch(&cli, links) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(name, &e);
            e.code
        }
    }
}
