use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "dispatchsim",
    version,
    about = "Ambulance dispatch simulation and hospital strategy games"
)]
pub struct Cli {
    /// Worker threads; defaults to the number of cores. Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "DISPATCHSIM_OUT")]
    pub out: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Top,
}

#[derive(Debug, Subcommand)]
pub enum Top {
    #[command(flatten)]
    Run(Command),
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Run one strategy profile and report per-hospital metrics.
    Simulate(SimulateArgs),
    /// Build the payoff tensor, its pure equilibria and the T_global optimum.
    Equilibrium(EquilibriumArgs),
    /// Equilibrium occurrence over a (lambda, mu) grid.
    SweepMap(SweepMapArgs),
    /// Sobol sensitivity indices of the simulation output.
    Sobol(SobolArgs),
    /// Fit exponential and kernel density models to duration samples.
    Fit(FitArgs),
    /// Pairwise analysis, weighted strategies and the mortality sweep for a city.
    Citywide(CitywideArgs),
    /// Closed-form queueing figures for a scenario.
    Analyze(AnalyzeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Equilibrium(_) => "equilibrium",
            Command::SweepMap(_) => "sweep-map",
            Command::Sobol(_) => "sobol",
            Command::Fit(_) => "fit",
            Command::Citywide(_) => "citywide",
            Command::Analyze(_) => "analyze",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TGlobal {
    Printed,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Force time-of-day traffic multipliers on or off.
    #[arg(long, value_enum)]
    pub traffic: Option<Toggle>,
    /// How per-hospital times are combined into T_global.
    #[arg(long, value_enum)]
    pub tglobal: Option<TGlobal>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Strategy profile such as `AR`; defaults to the scenario's strategies.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Also write the per-patient trace of the first replication.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepMapArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Arrival rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
    /// Service rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub mus: Vec<f64>,
    /// Independent tensor builds per cell.
    #[arg(long, default_value_t = 106)]
    pub batches: usize,
    /// Replications per profile within a tensor build.
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SobolArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Base sample size (power of two).
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Extra ascending sizes for a convergence table.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `system`, `tglobal`, or `hospital=<index>`.
    #[arg(long, default_value = "system")]
    pub output: String,
    /// Factor list (TOML with `[[factors]]` tables); defaults to the built-in space.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Drop overcrowded runs instead of keeping their finite-horizon value.
    #[arg(long)]
    pub drop_invalid: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// One duration per line, in minutes.
    #[arg(long)]
    pub samples: PathBuf,
    /// Kernel bandwidth in minutes; Scott's rule when omitted.
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CitywideArgs {
    /// City scenario; not needed with `--synthetic`.
    #[arg(long, required_unless_present = "synthetic")]
    pub scenario: Option<PathBuf>,
    /// Patient records (`timestamp_hours,x,y[,node_id][,nearest_hospital]`).
    #[arg(long, required_unless_present = "synthetic")]
    pub records: Option<PathBuf>,
    /// Observed mortality (`hospital_id,mortality_rate`).
    #[arg(long, required_unless_present = "synthetic")]
    pub observed: Option<PathBuf>,
    /// Generate a planted-truth city from this seed instead of reading inputs.
    #[arg(long)]
    pub synthetic: Option<u64>,
    /// Mortality base curve (`minutes,probability`); a built-in table otherwise.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0128, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = -3.0560, allow_hyphen_values = true)]
    pub beta: f64,
    /// Minimum shared-patient proportion for a pair.
    #[arg(long, default_value_t = 0.10)]
    pub threshold: f64,
    /// Travel-time ratio to the nearest hospital that still counts as feasible.
    #[arg(long, default_value_t = 1.5)]
    pub ratio: f64,
    /// Fixed actions as `id:A` or `id:R`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fixed: Vec<String>,
    /// Hospital ids left out of the correlation, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<usize>,
    /// Replications per profile in the mortality sweep.
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    /// Tensor builds per cell of each pair's equilibrium map.
    #[arg(long, default_value_t = 8)]
    pub batches: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub traffic: Option<Toggle>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}
