use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::des::{derive_seed, replicate, MetricSummary, StrategyProfile};
use crate::scenario::Scenario;

/// Utilities for every profile of a k-player, two-action game.
///
/// Entry `i` belongs to `StrategyProfile::from_index(k, i)`. `None` marks a
/// profile whose simulated system was overcrowded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTensor {
    players: usize,
    entries: Vec<Option<Vec<f64>>>,
    replications: usize,
}

impl PayoffTensor {
    /// # Panics
    /// If the entry count is not `2^players` or a utility vector has the wrong length.
    pub fn new(players: usize, entries: Vec<Option<Vec<f64>>>, replications: usize) -> Self {
        assert_eq!(entries.len(), 1 << players, "need one entry per profile");
        for u in entries.iter().flatten() {
            assert_eq!(u.len(), players, "utility vector length");
        }
        Self {
            players,
            entries,
            replications,
        }
    }

    pub fn from_fn(players: usize, mut f: impl FnMut(&StrategyProfile) -> Option<Vec<f64>>) -> Self {
        let entries = StrategyProfile::all(players).map(|p| f(&p)).collect();
        Self::new(players, entries, 1)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn utilities(&self, profile: &StrategyProfile) -> Option<&[f64]> {
        self.entries[profile.index()].as_deref()
    }

    pub fn is_valid(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    pub fn entries(&self) -> &[Option<Vec<f64>>] {
        &self.entries
    }
}

fn replication_seeds(seed: u64, replications: usize) -> Vec<u64> {
    (0..replications as u64).map(|r| derive_seed(seed, r, 0)).collect()
}

/// Simulates every profile with the same seed list, so profiles are compared
/// under common random numbers. A hospital that served nobody gets utility 0.
pub fn build_payoff_tensor(scenario: &Scenario, replications: usize, seed: u64) -> PayoffTensor {
    assert!(replications >= 1, "need at least one replication");
    let k = scenario.hospital_count();
    let seeds = replication_seeds(seed, replications);
    let entries = (0..1usize << k)
        .into_par_iter()
        .map(|i| {
            let profile = StrategyProfile::from_index(k, i);
            let summary = replicate(scenario, &profile, &seeds);
            if summary.overcrowded() {
                return None;
            }
            Some(summary.scores.iter().map(|s| s.map_or(0.0, |m| m.mean)).collect())
        })
        .collect();
    PayoffTensor::new(k, entries, replications)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalProfile {
    pub profile: StrategyProfile,
    /// Replicated T_global per profile, in index order.
    pub global_times: Vec<(StrategyProfile, Option<MetricSummary>)>,
    /// Profiles statistically tied with the smallest mean, including the winner.
    pub tied: Vec<StrategyProfile>,
}

/// Relative excess over the best mean T_global below which two profiles are
/// considered practically equivalent.
pub const EQUIVALENCE_MARGIN: f64 = 0.01;

/// Profile with the smallest mean T_global.
///
/// Runs share seeds across profiles, so each profile is compared with the
/// smallest-mean one through paired differences. A profile is tied with the
/// best when its mean excess is within 1.96 standard errors or within
/// [`EQUIVALENCE_MARGIN`] of the best mean. The lexicographically smallest
/// tied profile (A before R) wins.
pub fn optimal_profile(scenario: &Scenario, replications: usize, seed: u64) -> OptimalProfile {
    assert!(replications >= 1, "need at least one replication");
    let k = scenario.hospital_count();
    let mode = scenario.options.global_time;
    let seeds = replication_seeds(seed, replications);
    let results: Vec<_> = (0..1usize << k)
        .into_par_iter()
        .map(|i| {
            let profile = StrategyProfile::from_index(k, i);
            let summary = replicate(scenario, &profile, &seeds);
            // Runs where nobody was served count as infinitely slow.
            let per_run: Vec<f64> = summary
                .runs
                .iter()
                .map(|r| r.global_time(mode).unwrap_or(f64::INFINITY))
                .collect();
            (profile, summary.global_time, per_run)
        })
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let best = results
        .iter()
        .min_by(|a, b| {
            mean(&a.2)
                .total_cmp(&mean(&b.2))
                .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
        })
        .expect("at least one profile");
    let mut tied: Vec<StrategyProfile> = results
        .iter()
        .filter(|(_, _, runs)| {
            let d: Vec<f64> = runs.iter().zip(&best.2).map(|(x, y)| x - y).collect();
            let m = mean(&d);
            if !m.is_finite() {
                return false;
            }
            if m <= EQUIVALENCE_MARGIN * mean(&best.2).abs() {
                return true;
            }
            if d.len() < 2 {
                return false;
            }
            let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
            m <= 1.96 * (var / d.len() as f64).sqrt()
        })
        .map(|(p, _, _)| p.clone())
        .collect();
    tied.sort_by_key(|p| p.to_string());
    let profile = tied.first().cloned().unwrap_or_else(|| best.0.clone());
    let global_times = results.into_iter().map(|(p, g, _)| (p, g)).collect();
    OptimalProfile {
        profile,
        global_times,
        tied,
    }
}
