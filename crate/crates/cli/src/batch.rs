//! Batch runs driven by a TOML file:
//!
//! ```toml
//! output_dir = "runs"          # relative to the config file; default "."
//!
//! [[run]]
//! name = "below"
//! args = ["curve", "--side", "below"]
//! ```
//!
//! Each run is parsed exactly like a command line and written to
//! `<output_dir>/<name>.<ext>` unless its args name an output file.
//! Runs execute in file order and the batch stops at the first failure.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;

use crate::args::{Cli, Command};
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub run: Vec<RunEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub name: String,
    pub args: Vec<String>,
}

pub fn load(path: &Path) -> Result<BatchConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let cfg: BatchConfig = toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if cfg.run.is_empty() {
        return Err(CliError::Usage(format!("{}: no [[run]] entries", path.display())));
    }
    let mut seen = std::collections::BTreeSet::new();
    for r in &cfg.run {
        let clean = !r.name.is_empty() && r.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !clean || r.name.starts_with('.') {
            return Err(CliError::Usage(format!("run name {:?} must be a plain file stem", r.name)));
        }
        if !seen.insert(r.name.as_str()) {
            return Err(CliError::Usage(format!("run name {:?} is repeated", r.name)));
        }
    }
    Ok(cfg)
}

/// Parse every run up front so a typo late in the file fails before any work.
pub fn plan(path: &Path) -> Result<Vec<(String, Command)>, CliError> {
    let cfg = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = match cfg.output_dir {
        Some(d) if d.is_absolute() => d,
        Some(d) => base.join(d),
        None => base.to_path_buf(),
    };
    cfg.run
        .into_iter()
        .map(|r| {
            let argv = std::iter::once("erline".to_string()).chain(r.args.iter().cloned());
            let mut cmd = Cli::try_parse_from(argv)
                .map_err(|e| CliError::Usage(format!("run {:?}: {}", r.name, e.to_string().trim_end())))?
                .command;
            let output = match &mut cmd {
                Command::Batch(_) => return Err(CliError::Usage(format!("run {:?}: batches cannot nest", r.name))),
                Command::Entropy(a) => &mut a.output,
                Command::Curve(a) => &mut a.output,
                Command::Solve(a) => &mut a.output,
                Command::Exact(a) => &mut a.output,
                Command::Mcmc(a) => &mut a.output,
                Command::Calibrate(a) => &mut a.output,
                Command::Classify(a) => &mut a.output,
            };
            if output.out.is_none() {
                output.out = Some(dir.join(format!("{}.{}", r.name, output.format.extension())));
            }
            Ok((r.name, cmd))
        })
        .collect()
}
