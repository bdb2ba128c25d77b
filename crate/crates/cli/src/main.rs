use anyhow::Context;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use gelfand_cli::{run, RunFailure, RunOptions};

/// Runs the analyses listed in an experiment config and writes their reports.
#[derive(Debug, Parser)]
#[command(name = "gelfand", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports; overrides `output_dir` in the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed for randomised steps; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress per-command progress lines.
    #[arg(long)]
    quiet: bool,
}

fn try_main(args: Args) -> anyhow::Result<()> {
    let opts = RunOptions { output_dir: args.output_dir, seed: args.seed, quiet: args.quiet };
    let records = run(&args.config, &opts).with_context(|| format!("running {}", args.config.display()))?;
    if !opts.quiet {
        let files: usize = records.iter().map(|r| r.files.len()).sum();
        eprintln!("{} commands, {files} files written", records.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match try_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body = match err.downcast_ref::<RunFailure>() {
                Some(failure) => failure.to_json(),
                None => serde_json::json!({ "error": { "kind": "internal", "message": format!("{err:#}") } }),
            };
            println!("{}", serde_json::to_string_pretty(&body).expect("error serialises"));
            let config_error = err
                .downcast_ref::<RunFailure>()
                .is_some_and(|f| matches!(f.error.kind(), "parse" | "schema" | "unresolved_reference"));
            ExitCode::from(if config_error { 2 } else { 1 })
        }
    }
}
