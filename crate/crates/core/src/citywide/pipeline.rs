use serde::{Deserialize, Serialize};

use super::mortality::MortalityModel;
use super::pairs::{
    aggregate_strategies, pair_scenario, pairwise_equilibrium, PairOptions, PairOutcome, WeightedStrategy,
};
use super::shared::{filter_pairs, shared_matrix, SharedPatientMatrix};
use super::sweep::{strategy_sweep, SweepConfig, SweepRow};
use crate::des::StrategyProfile;
use crate::error::Result;
use crate::scenario::{Action, PatientRecord, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Travel-time ratio to the nearest hospital under which a hospital is feasible.
    pub feasibility_ratio: f64,
    /// Minimum shared proportion for a pair to be analysed.
    pub threshold: f64,
    pub pair: PairOptions,
    /// Force time-of-day traffic on or off; `None` keeps the scenario's setting.
    pub traffic: Option<bool>,
    pub sweep: SweepConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            feasibility_ratio: 1.5,
            threshold: 0.10,
            pair: PairOptions::default(),
            traffic: None,
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub matrix: SharedPatientMatrix,
    pub pairs: Vec<(usize, usize)>,
    pub outcomes: Vec<PairOutcome>,
    pub weighted: Vec<Option<WeightedStrategy>>,
    /// Weighted actions, with fixed actions applied and Accept for hospitals
    /// no pair informed.
    pub predicted: StrategyProfile,
    pub sweep: Vec<SweepRow>,
}

impl PipelineReport {
    pub fn rank_of(&self, profile: &StrategyProfile) -> Option<usize> {
        self.sweep.iter().find(|r| &r.profile == profile).and_then(|r| r.rank)
    }
}

/// Shared-patient matrix, pair filter, pairwise equilibria, weighted
/// strategies, then the correlation sweep against observed mortality.
pub fn run_pipeline(
    city: &Scenario,
    records: &[PatientRecord],
    assignments: &[usize],
    observed: &[(usize, f64)],
    model: &MortalityModel,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let mut city = city.clone();
    if let Some(on) = opts.traffic {
        city.travel.set_traffic(on);
    }
    let matrix = shared_matrix(&city, records, assignments, opts.feasibility_ratio)?;
    let pairs = filter_pairs(&matrix, opts.threshold);
    let outcomes = pairs
        .iter()
        .map(|&(i, j)| {
            let s = pair_scenario(&city, i, j, records, assignments)?;
            pairwise_equilibrium(&s, (i, j), &opts.pair)
        })
        .collect::<Result<Vec<_>>>()?;
    let weighted = aggregate_strategies(&matrix, &outcomes);
    let mut actions: Vec<Action> = weighted
        .iter()
        .map(|w| w.map_or(Action::Accept, |w| w.action))
        .collect();
    for &(id, a) in &opts.sweep.fixed {
        if let Some(j) = city.hospitals.iter().position(|h| h.id == id) {
            actions[j] = a;
        }
    }
    let sweep = strategy_sweep(&city, observed, model, &opts.sweep)?;
    Ok(PipelineReport {
        matrix,
        pairs,
        outcomes,
        weighted,
        predicted: StrategyProfile::new(actions),
        sweep,
    })
}
