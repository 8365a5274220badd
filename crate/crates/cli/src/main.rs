mod args;
mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Top};
use manifest::{absolutize, RunManifest};

const DEFAULT_OUT: &str = "dispatchsim-out";

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    let (mut command, out) = match cli.command {
        Top::Run(c) => (c, cli.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))),
        Top::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            (m.args, cli.out.unwrap_or(m.out_dir))
        }
    };
    absolutize(&mut command)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let out = std::path::absolute(&out)?;
    commands::execute(&command, &out)?;
    RunManifest::new(command, &out).write(&out)?;
    Ok(())
}

/// Exit status and label for an error, by what went wrong.
fn categorize(e: &anyhow::Error) -> (u8, &'static str) {
    use dispatchsim::Error;
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Validation { .. }) => (65, "invalid input"),
        Some(Error::Parse { .. }) | Some(Error::Csv(_)) => (65, "malformed input"),
        Some(Error::Io { .. }) => (74, "i/o"),
        Some(Error::Domain(_)) => (70, "computation"),
        None if e.chain().any(|c| c.is::<std::io::Error>()) => (74, "i/o"),
        None => (1, "error"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, label) = categorize(&e);
            eprintln!("error ({label}): {e:#}");
            ExitCode::from(code)
        }
    }
}
