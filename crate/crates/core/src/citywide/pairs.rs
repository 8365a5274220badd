use serde::{Deserialize, Serialize};

use super::shared::SharedPatientMatrix;
use crate::error::{Error, Result};
use crate::game::{equilibrium_map, EquilibriumMap, MapOptions};
use crate::scenario::{Action, PatientRecord, Scenario, SpatialSampler};

/// One hospital's mixed action across a pair's equilibrium grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStrategy {
    pub accept: f64,
    pub redirect: f64,
}

impl PairStrategy {
    pub fn pure(a: Action) -> Self {
        match a {
            Action::Accept => Self {
                accept: 1.0,
                redirect: 0.0,
            },
            Action::Redirect => Self {
                accept: 0.0,
                redirect: 1.0,
            },
        }
    }

    pub fn share(&self, a: Action) -> f64 {
        match a {
            Action::Accept => self.accept,
            Action::Redirect => self.redirect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOptions {
    /// Multipliers applied to the pair's empirical arrival rate.
    pub lambda_factors: Vec<f64>,
    /// Multipliers applied to the pair's mean service rate.
    pub mu_factors: Vec<f64>,
    pub map: MapOptions,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            lambda_factors: vec![0.8, 1.0, 1.2],
            mu_factors: vec![0.8, 1.0, 1.2],
            map: MapOptions {
                replications: 2,
                batches: 8,
                seed: 0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    /// Scenario indices of the two hospitals.
    pub pair: (usize, usize),
    /// `None` when no cell of the grid produced an equilibrium.
    pub strategies: Option<[PairStrategy; 2]>,
    pub map: EquilibriumMap,
}

/// The city with only hospitals `i` and `j`, fed by the records assigned to
/// them at the matching share of the city's arrival rate.
pub fn pair_scenario(
    city: &Scenario,
    i: usize,
    j: usize,
    records: &[PatientRecord],
    assignments: &[usize],
) -> Result<Scenario> {
    let (hi, hj) = (city.hospitals[i].id, city.hospitals[j].id);
    let mine: Vec<&PatientRecord> = records
        .iter()
        .zip(assignments)
        .filter(|(_, &a)| a == hi || a == hj)
        .map(|(r, _)| r)
        .collect();
    if mine.is_empty() {
        return Err(Error::validation(
            "records",
            format!("no records assigned to hospitals {hi} or {hj}"),
        ));
    }
    let mut s = city.clone();
    s.hospitals = vec![city.hospitals[i].clone(), city.hospitals[j].clone()];
    s.arrivals.rate = city.arrivals.rate * mine.len() as f64 / records.len() as f64;
    let mut points = Vec::new();
    let mut nodes = Vec::new();
    for r in mine {
        match &r.node_id {
            Some(n) => nodes.push(n.clone()),
            None => points.push([r.x, r.y]),
        }
    }
    if !nodes.is_empty() {
        points.clear();
    }
    s.arrivals.spatial = SpatialSampler::Empirical {
        file: None,
        points,
        nodes,
    };
    s.validate()?;
    Ok(s)
}

/// Equilibrium map over a neighbourhood of the pair's own `(lambda, mu)`,
/// summarised as the share of grid cells whose dominant equilibrium has
/// each hospital accepting.
pub fn pairwise_equilibrium(pair: &Scenario, indices: (usize, usize), opts: &PairOptions) -> Result<PairOutcome> {
    if pair.hospital_count() != 2 {
        return Err(Error::validation(
            "hospitals",
            "a pair scenario has exactly two hospitals",
        ));
    }
    let mu = pair.hospitals.iter().map(|h| h.service.rate()).sum::<f64>() / 2.0;
    let lambdas: Vec<f64> = opts.lambda_factors.iter().map(|f| f * pair.arrivals.rate).collect();
    let mus: Vec<f64> = opts.mu_factors.iter().map(|f| f * mu).collect();
    let map = equilibrium_map(pair, &lambdas, &mus, &opts.map)?;
    // Each consistent cell votes with its dominant equilibrium, the profile
    // a map plot would display for that cell.
    let mut accept = [0.0; 2];
    let mut cells = 0.0;
    for (profile, _) in map.cells.iter().filter_map(|c| c.dominant(2)) {
        cells += 1.0;
        for (h, a) in accept.iter_mut().enumerate() {
            if profile.action(h) == Action::Accept {
                *a += 1.0;
            }
        }
    }
    let strategies = (cells > 0.0).then(|| {
        accept.map(|a| PairStrategy {
            accept: a / cells,
            redirect: 1.0 - a / cells,
        })
    });
    Ok(PairOutcome {
        pair: indices,
        strategies,
        map,
    })
}

/// Aggregated action of one hospital over the pairs it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedStrategy {
    pub accept_mass: f64,
    pub redirect_mass: f64,
    /// The action with the larger mass (Accept on an exact tie).
    pub action: Action,
    /// The winning share lies strictly between 0.40 and 0.60, so both
    /// actions are kept as candidates.
    pub ambiguous: bool,
}

/// `mass(a) = sum over pairs of weight * share of a`; `None` without any
/// contributing pair or with zero total weight.
pub fn weighted_strategy(contributions: &[(f64, PairStrategy)]) -> Option<WeightedStrategy> {
    let accept_mass: f64 = contributions.iter().map(|(w, s)| w * s.accept).sum();
    let redirect_mass: f64 = contributions.iter().map(|(w, s)| w * s.redirect).sum();
    let total = accept_mass + redirect_mass;
    if contributions.is_empty() || !(total > 0.0) {
        return None;
    }
    let action = if redirect_mass > accept_mass {
        Action::Redirect
    } else {
        Action::Accept
    };
    let share = accept_mass.max(redirect_mass) / total;
    Some(WeightedStrategy {
        accept_mass,
        redirect_mass,
        action,
        ambiguous: share > 0.40 && share < 0.60,
    })
}

/// Weighted strategy of every hospital from the pair outcomes, weighting
/// each pair by its shared-patient proportion.
pub fn aggregate_strategies(matrix: &SharedPatientMatrix, outcomes: &[PairOutcome]) -> Vec<Option<WeightedStrategy>> {
    let mut contrib: Vec<Vec<(f64, PairStrategy)>> = vec![Vec::new(); matrix.len()];
    for o in outcomes {
        let Some(s) = o.strategies else { continue };
        let (i, j) = o.pair;
        let w = matrix.omega[i][j];
        contrib[i].push((w, s[0]));
        contrib[j].push((w, s[1]));
    }
    contrib.iter().map(|c| weighted_strategy(c)).collect()
}
