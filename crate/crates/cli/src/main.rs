mod args;
mod batch;
mod commands;
mod output;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use commands::Outcome;
use output::{render, Meta};

#[derive(Debug)]
pub enum CliError {
    Lib(erline::Error),
    Usage(String),
    Io(String),
}

impl From<erline::Error> for CliError {
    fn from(e: erline::Error) -> Self {
        CliError::Lib(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use erline::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Lib(e) => match e {
                E::Domain(_) | E::EpsTooLarge(_) | E::NoInteriorMinimum { .. } | E::Parse(_) => 2,
                E::Infeasible(_) | E::NonGraphical { .. } => 4,
                E::Capacity { .. } => 5,
                E::NonConvergence(_) | E::BoundaryConstraint { .. } => 6,
            },
        }
    }
}

fn emit(cmd: &Command, out: &OutputArgs, result: Outcome) -> Result<(), CliError> {
    let meta = Meta::new(cmd, result.tolerances);
    let text = render(&result.table, &meta, out.format);
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("writing standard output: {e}")))
        }
    }
}

fn run(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Entropy(a) => emit(cmd, &a.output, commands::entropy(a)?),
        Command::Curve(a) => emit(cmd, &a.output, commands::curve(a)?),
        Command::Solve(a) => emit(cmd, &a.output, commands::solve(a)?),
        Command::Exact(a) => emit(cmd, &a.output, commands::exact(a)?),
        Command::Mcmc(a) => emit(cmd, &a.output, commands::mcmc(a)?),
        Command::Calibrate(a) => emit(cmd, &a.output, commands::calibrate(a)?),
        Command::Classify(a) => emit(cmd, &a.output, commands::classify(a)?),
        Command::Batch(a) => {
            for (name, sub) in batch::plan(&a.config)? {
                run(&sub).map_err(|e| match e {
                    CliError::Lib(inner) => {
                        eprintln!("erline: run {name:?} failed");
                        CliError::Lib(inner)
                    }
                    CliError::Usage(m) => CliError::Usage(format!("run {name:?}: {m}")),
                    CliError::Io(m) => CliError::Io(format!("run {name:?}: {m}")),
                })?;
                eprintln!("erline: run {name:?} done");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("erline: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
