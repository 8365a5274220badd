use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::Simulator;
use super::{SimulationResult, StrategyProfile};
use crate::scenario::{GlobalTimeMode, Scenario};

/// Sample mean with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// `None` with fewer than two observations.
    pub half_width: Option<f64>,
    pub n: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let half_width = (n > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        });
        Some(Self { mean, half_width, n })
    }

    pub fn covers(&self, value: f64) -> bool {
        match self.half_width {
            Some(h) => (self.mean - value).abs() <= h,
            None => self.mean == value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub profile: StrategyProfile,
    /// Per hospital; `None` if the hospital never served anyone.
    pub scores: Vec<Option<MetricSummary>>,
    pub total_times: Vec<Option<MetricSummary>>,
    pub mean_queue: Vec<Option<MetricSummary>>,
    pub mean_queue_length: Vec<Option<MetricSummary>>,
    pub global_time: Option<MetricSummary>,
    pub system_score: Option<MetricSummary>,
    /// Share of replications flagged overcrowded.
    pub overcrowded_share: f64,
    pub runs: Vec<SimulationResult>,
}

impl ReplicationSummary {
    /// Majority of replications saw a diverging queue.
    pub fn overcrowded(&self) -> bool {
        self.overcrowded_share > 0.5
    }
}

/// Mixes a base seed with two indices (SplitMix64 finaliser).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one simulation per seed (in parallel) and summarises across them.
pub fn replicate(scenario: &Scenario, profile: &StrategyProfile, seeds: &[u64]) -> ReplicationSummary {
    assert!(!seeds.is_empty(), "need at least one seed");
    let sim = Simulator::new(scenario);
    let runs: Vec<SimulationResult> = seeds.par_iter().map(|s| sim.run(profile, *s)).collect();
    summarize(profile.clone(), runs, scenario.options.global_time)
}

pub(crate) fn summarize(
    profile: StrategyProfile,
    runs: Vec<SimulationResult>,
    mode: GlobalTimeMode,
) -> ReplicationSummary {
    let k = runs[0].hospitals.len();
    let per_hospital = |f: &dyn Fn(&SimulationResult, usize) -> Option<f64>| -> Vec<Option<MetricSummary>> {
        (0..k)
            .map(|j| {
                let vals: Vec<f64> = runs.iter().filter_map(|r| f(r, j)).collect();
                MetricSummary::from_values(&vals)
            })
            .collect()
    };
    let scores = per_hospital(&|r, j| r.hospitals[j].score);
    let total_times = per_hospital(&|r, j| (r.hospitals[j].served > 0).then_some(r.hospitals[j].total_time));
    let mean_queue = per_hospital(&|r, j| (r.hospitals[j].served > 0).then_some(r.hospitals[j].mean_queue));
    let mean_queue_length = per_hospital(&|r, j| Some(r.hospitals[j].mean_queue_length));
    let globals: Vec<f64> = runs.iter().filter_map(|r| r.global_time(mode)).collect();
    let system: Vec<f64> = runs.iter().filter_map(|r| r.system_score()).collect();
    let overcrowded_share = runs.iter().filter(|r| r.overcrowded).count() as f64 / runs.len() as f64;
    ReplicationSummary {
        profile,
        scores,
        total_times,
        mean_queue,
        mean_queue_length,
        global_time: MetricSummary::from_values(&globals),
        system_score: MetricSummary::from_values(&system),
        overcrowded_share,
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_has_no_interval() {
        let m = MetricSummary::from_values(&[3.5]).unwrap();
        assert_eq!(m.mean, 3.5);
        assert_eq!(m.half_width, None);
        assert!(MetricSummary::from_values(&[]).is_none());
    }

    #[test]
    fn identical_values_have_zero_width() {
        let m = MetricSummary::from_values(&[2.0; 5]).unwrap();
        assert_eq!(m.half_width, Some(0.0));
    }

    #[test]
    fn seeds_are_spread() {
        let a = derive_seed(1, 0, 0);
        let b = derive_seed(1, 0, 1);
        let c = derive_seed(1, 1, 0);
        assert!(a != b && b != c && a != c);
        assert_eq!(a, derive_seed(1, 0, 0));
    }
}
