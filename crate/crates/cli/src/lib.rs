//! Experiment harness for the `shuffle-parity` library.
//!
//! Exit codes: 0 when every assertion holds, 1 when one fails, 2 on usage
//! or I/O errors.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Parser;

use crate::config::{Cli, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` (including the program name), runs the experiment and
/// writes the report. Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match ExperimentConfig::from_command(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = match commands::run(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cfg.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            report.write(cfg.format, &mut w)?;
            w.flush()
        }),
        None => report.write(cfg.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_USAGE;
    }
    let mut code = EXIT_OK;
    for a in report.assertions.iter().filter(|a| !a.passed) {
        eprintln!("assertion failed: {}: {}", a.name, a.detail);
        code = EXIT_ASSERTION;
    }
    code
}
