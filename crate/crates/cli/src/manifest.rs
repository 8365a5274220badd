use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::args::Command;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run. Input paths are stored absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Full argument set, including overrides such as traffic and T_global mode.
    pub args: Command,
}

impl RunManifest {
    pub fn new(args: Command, out_dir: &Path) -> Self {
        let (scenario, seed) = match &args {
            Command::Simulate(a) => (Some(a.scenario.scenario.clone()), Some(a.seed)),
            Command::Equilibrium(a) => (Some(a.scenario.scenario.clone()), Some(a.seed)),
            Command::SweepMap(a) => (Some(a.scenario.scenario.clone()), Some(a.seed)),
            Command::Sobol(a) => (Some(a.scenario.scenario.clone()), Some(a.seed)),
            Command::Fit(_) => (None, None),
            Command::Citywide(a) => (a.scenario.clone(), Some(a.seed)),
            Command::Analyze(a) => (Some(a.scenario.scenario.clone()), None),
        };
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: args.name().to_string(),
            scenario,
            seed,
            out_dir: out_dir.to_path_buf(),
            args,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

fn absolute(p: &mut PathBuf) -> Result<()> {
    *p = std::path::absolute(&*p).with_context(|| format!("resolving {}", p.display()))?;
    Ok(())
}

/// Makes every input path absolute so the manifest replays from any directory.
pub fn absolutize(cmd: &mut Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => absolute(&mut a.scenario.scenario),
        Command::Equilibrium(a) => absolute(&mut a.scenario.scenario),
        Command::SweepMap(a) => absolute(&mut a.scenario.scenario),
        Command::Sobol(a) => {
            if let Some(f) = &mut a.factors {
                absolute(f)?;
            }
            absolute(&mut a.scenario.scenario)
        }
        Command::Fit(a) => absolute(&mut a.samples),
        Command::Citywide(a) => {
            for p in [&mut a.scenario, &mut a.records, &mut a.observed, &mut a.curve]
                .into_iter()
                .flatten()
            {
                absolute(p)?;
            }
            Ok(())
        }
        Command::Analyze(a) => absolute(&mut a.scenario.scenario),
    }
}
