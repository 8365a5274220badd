use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::mortality::{simulate_mortality, MortalityModel};
use crate::des::{derive_seed, StrategyProfile};
use crate::error::{Error, Result};
use crate::scenario::{Action, Scenario};

/// Pearson correlation; `None` when either vector is constant or too short.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "vectors must have equal length");
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the no-correlation t-test with `n - 2` degrees of freedom.
pub fn correlation_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 {
        return None;
    }
    if r.abs() >= 1.0 {
        return Some(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some(2.0 * dist.sf(t.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Hospital ids whose action is held fixed.
    #[serde(default)]
    pub fixed: Vec<(usize, Action)>,
    /// Hospital ids left out of the correlation.
    #[serde(default)]
    pub excluded: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_replications() -> usize {
    10
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fixed: Vec::new(),
            excluded: Vec::new(),
            replications: default_replications(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub profile: StrategyProfile,
    pub pearson_r: Option<f64>,
    pub p_value: Option<f64>,
    /// 1 = best; `None` for profiles without a defined correlation.
    pub rank: Option<usize>,
    pub note: Option<String>,
}

/// `0` for Accept and `1` for Redirect, in scenario order.
pub fn profile_bits(p: &StrategyProfile) -> String {
    p.actions()
        .iter()
        .map(|a| if *a == Action::Redirect { '1' } else { '0' })
        .collect()
}

/// Every profile compatible with the fixed actions, in index order.
pub fn admissible_profiles(scenario: &Scenario, fixed: &[(usize, Action)]) -> Result<Vec<StrategyProfile>> {
    let k = scenario.hospital_count();
    let mut pins = Vec::new();
    for &(id, a) in fixed {
        let j = scenario
            .hospitals
            .iter()
            .position(|h| h.id == id)
            .ok_or_else(|| Error::validation("fixed", format!("unknown hospital id {id}")))?;
        pins.push((j, a));
    }
    Ok(StrategyProfile::all(k)
        .filter(|p| pins.iter().all(|&(j, a)| p.action(j) == a))
        .collect())
}

/// Simulates every admissible profile and ranks them by the correlation of
/// simulated against observed per-hospital mortality.
pub fn strategy_sweep(
    scenario: &Scenario,
    observed: &[(usize, f64)],
    model: &MortalityModel,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if cfg.replications == 0 {
        return Err(Error::validation("replications", "must be positive"));
    }
    let mut cols = Vec::new();
    let mut obs = Vec::new();
    for &(id, rate) in observed {
        if cfg.excluded.contains(&id) {
            continue;
        }
        let j = scenario
            .hospitals
            .iter()
            .position(|h| h.id == id)
            .ok_or_else(|| Error::validation("observed", format!("unknown hospital id {id}")))?;
        cols.push(j);
        obs.push(rate);
    }
    if cols.len() < 3 {
        return Err(Error::validation(
            "observed",
            "need observed mortality for at least three hospitals",
        ));
    }
    let seeds: Vec<u64> = (0..cfg.replications as u64)
        .map(|r| derive_seed(cfg.seed, r, 0))
        .collect();
    let profiles = admissible_profiles(scenario, &cfg.fixed)?;
    let mut rows: Vec<SweepRow> = profiles
        .into_par_iter()
        .map(|profile| {
            let sim = simulate_mortality(scenario, &profile, model, &seeds);
            let picked: Option<Vec<f64>> = cols.iter().map(|&j| sim[j]).collect();
            let (pearson_r, note) = match picked {
                None => (None, Some("a compared hospital served no patients".to_string())),
                Some(v) => match pearson(&v, &obs) {
                    Some(r) => (Some(r), None),
                    None => (None, Some("simulated mortality is constant".to_string())),
                },
            };
            let p_value = pearson_r.and_then(|r| correlation_p_value(r, cols.len()));
            SweepRow {
                profile,
                pearson_r,
                p_value,
                rank: None,
                note,
            }
        })
        .collect();
    rank_rows(&mut rows);
    Ok(rows)
}

/// Sorts by decreasing r (undefined last, ties by profile index) and assigns ranks.
pub fn rank_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        let key = |r: &SweepRow| r.pearson_r.unwrap_or(f64::NEG_INFINITY);
        key(b)
            .total_cmp(&key(a))
            .then_with(|| a.profile.index().cmp(&b.profile.index()))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = r.pearson_r.map(|_| i + 1);
    }
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["profile_bits", "pearson_r", "p_value", "rank"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            profile_bits(&r.profile),
            opt(r.pearson_r),
            opt(r.p_value),
            r.rank.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads `hospital_id, mortality_rate` rows with a header.
pub fn read_observed_mortality(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_observed_mortality(path: &Path, rows: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["hospital_id", "mortality_rate"])?;
    for (id, m) in rows {
        w.write_record([id.to_string(), m.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
