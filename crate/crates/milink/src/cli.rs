//! Command-line front end.
//!
//! Subcommands: `run <config>`, `preset <name>`, `validate <config>`,
//! `mutual <config>`, `selfcheck`. Exit codes: 0 success, 1 usage error,
//! 2 configuration error, 3 numerical or I/O failure. Results go to the
//! configured output (stdout for path "-"); diagnostics go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{
    apply_overrides, execute, expand_preset, mutual_report, parse_scenario, OutputConfig,
    ScenarioConfig,
};
use crate::emit::emit_table;
use crate::error::{Error, Result};
use crate::model::SweepTable;
use crate::selfcheck;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "milink",
    about = "Circuit-level simulator for full-duplex magnetic-induction links",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a scenario config and emit its sweep table.
    Run {
        /// Path to a scenario JSON document.
        config: PathBuf,
    },
    /// Run a named scenario: case1, case2, case3, fig-distance, fig-orientation.
    Preset {
        name: String,
        /// Write the table here instead of the preset's default output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dotted-path overrides applied after expansion, e.g.
        /// `--override mutual_method=neumann --override sweep.steps=101`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Parse and validate a scenario config without running it.
    Validate {
        config: PathBuf,
    },
    /// Print the mutual-inductance matrix and coupling coefficients of a scenario.
    Mutual {
        config: PathBuf,
    },
    /// Run the physics invariant suite; non-zero exit on any violation.
    Selfcheck,
}

/// Entry point used by `main`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("milink: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Geometry(_) => EXIT_CONFIG,
        Error::Numerical(_) | Error::Io(_) => EXIT_NUMERICAL,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            let table = execute(&config)?;
            write_output(&table, &config.output)
        }
        Command::Preset { name, out, overrides } => {
            let mut config = expand_preset(&name)?;
            config = apply_overrides(&config, &overrides)?;
            if let Some(path) = out {
                config.output.path = path.to_string_lossy().into_owned();
            }
            let table = execute(&config)?;
            write_output(&table, &config.output)
        }
        Command::Validate { config } => {
            load_config(&config)?;
            println!("valid: {}", config.display());
            Ok(())
        }
        Command::Mutual { config } => {
            let config = load_config(&config)?;
            let report = mutual_report(&config)?;
            print!("{report}");
            Ok(())
        }
        Command::Selfcheck => {
            let outcomes = selfcheck::run_all();
            let mut failures = 0;
            for outcome in &outcomes {
                let status = if outcome.passed { "ok  " } else { "FAIL" };
                println!("{status} {:<22} {}", outcome.name, outcome.detail);
                if !outcome.passed {
                    failures += 1;
                }
            }
            if failures > 0 {
                return Err(Error::Numerical(format!(
                    "{failures} of {} invariant checks failed",
                    outcomes.len()
                )));
            }
            println!("all {} invariant checks passed", outcomes.len());
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| e.with_context(&format!("in {}", path.display())))
}

fn write_output(table: &SweepTable, output: &OutputConfig) -> Result<()> {
    for warning in table.warnings() {
        eprintln!("milink: warning: {warning}");
    }
    let bytes = emit_table(table, output.format);
    if output.path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(&bytes)
            .and_then(|()| lock.flush())
            .map_err(|e| Error::Io(format!("standard output: {e}")))
    } else {
        std::fs::write(&output.path, &bytes).map_err(|e| Error::Io(format!("{}: {e}", output.path)))
    }
}
