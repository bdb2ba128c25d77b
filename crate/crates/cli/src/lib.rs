//! Config-driven front end: parse an experiment file, run its commands in
//! order and write one report per command.
//!
//! Every report is wrapped in an envelope carrying the command, its target,
//! the SHA-256 of the config file and the seed. Output is deterministic for a
//! fixed config and seed; files are written atomically.

pub mod commands;
pub mod config;
pub mod error;
pub mod resolve;

use serde_json::json;
use sha2::{Digest, Sha256};
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub use config::{check_config, parse_config, validate_config, Command, ExperimentConfig};
pub use error::CliError;

use gelfand_core::gelfand::DEFAULT_SEED;

/// Settings that override the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

/// Files written by one command.
#[derive(Debug, Clone)]
pub struct CommandRecord {
    pub name: String,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// A failure, with the output name of the command that raised it.
#[derive(Debug)]
pub struct RunFailure {
    pub command: Option<String>,
    pub error: CliError,
}

impl From<CliError> for RunFailure {
    fn from(error: CliError) -> Self {
        RunFailure { command: None, error }
    }
}

impl RunFailure {
    pub fn to_json(&self) -> serde_json::Value {
        self.error.to_json(self.command.as_deref())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.to_path_buf(), message: e.to_string() };
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Runs every command of the config at `path`. Stops at the first
/// operational failure; analysis findings are written as data.
pub fn run(path: &Path, opts: &RunOptions) -> Result<Vec<CommandRecord>, RunFailure> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Parse { line: 0, column: 0, message: e.to_string() })?;
    let config = parse_config(&text)?;
    let report = check_config(&config);
    if !report.passed() {
        return Err(CliError::Invalid(report).into());
    }

    let hash = sha256_hex(&bytes);
    let seed = opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let out_dir = match (&opts.output_dir, &config.output_dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) if dir.is_absolute() => dir.clone(),
        (None, dir) => {
            let base = path.parent().unwrap_or(Path::new("."));
            base.join(dir.clone().unwrap_or_else(|| PathBuf::from("output")))
        }
    };
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io { path: out_dir.clone(), message: e.to_string() })?;

    let mut resolver = resolve::Resolver::new(&config);
    let mut records = Vec::with_capacity(config.run.len());
    for cmd in &config.run {
        let name = cmd.output_name();
        let fail = |error| RunFailure { command: Some(name.clone()), error };
        let outcome = commands::run_command(&mut resolver, cmd, seed).map_err(fail)?;
        let envelope = json!({
            "command": cmd.keyword(),
            "target": cmd.target(),
            "name": name,
            "config_sha256": hash,
            "seed": seed,
            "result": outcome.result,
        });
        let mut json_text = serde_json::to_string_pretty(&envelope).expect("envelope serialises");
        json_text.push('\n');

        let mut files = vec![(out_dir.join(format!("{name}.report.json")), json_text)];
        if let Some(csv) = outcome.csv {
            files.push((out_dir.join(format!("{name}.csv")), csv));
        }
        if let Some(pgm) = outcome.pgm {
            files.push((out_dir.join(format!("{name}.pgm")), pgm));
        }
        for (file, contents) in &files {
            write_atomic(file, contents.as_bytes()).map_err(fail)?;
        }
        if !opts.quiet {
            eprintln!("{name}: {}", outcome.summary);
        }
        records.push(CommandRecord { name, files: files.into_iter().map(|f| f.0).collect(), summary: outcome.summary });
    }
    Ok(records)
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.command {
            Some(c) => write!(f, "{c}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
