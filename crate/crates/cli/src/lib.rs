//! Command-line front end: CSV in, JSON or CSV results out.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

pub mod args;
pub mod error;
pub mod input;
pub mod output;
pub mod run;

use std::ffi::OsString;

use clap::Parser;

pub use error::CliError;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("srsd: {e}");
            e.exit_code()
        }
    }
}
