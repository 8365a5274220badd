use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_payoff_tensor, find_pure_nash, NashOutcome};
use crate::des::{derive_seed, StrategyProfile};
use crate::error::{self, Result};
use crate::scenario::{Overflow, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    /// Replications per profile inside one tensor build.
    pub replications: usize,
    /// Independent tensor builds per cell.
    pub batches: usize,
    pub seed: u64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            replications: 1,
            batches: 106,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub lambda: f64,
    pub mu: f64,
    pub inconsistent: bool,
    /// Per profile index: share of consistent batches where it was an equilibrium.
    pub occurrence: Vec<f64>,
}

impl MapCell {
    /// Most frequent equilibrium; ties go to the lexicographically first profile.
    pub fn dominant(&self, players: usize) -> Option<(StrategyProfile, f64)> {
        if self.inconsistent {
            return None;
        }
        let mut ranked: Vec<(StrategyProfile, f64)> = self
            .occurrence
            .iter()
            .enumerate()
            .filter(|(_, &o)| o > 0.0)
            .map(|(i, &o)| (StrategyProfile::from_index(players, i), o))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
        ranked.into_iter().next()
    }

    pub fn occurrence_of(&self, profile: &StrategyProfile) -> f64 {
        self.occurrence[profile.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumMap {
    pub players: usize,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    /// Row-major: all `mu` values for the first `lambda`, then the next.
    pub cells: Vec<MapCell>,
}

impl EquilibriumMap {
    pub fn cell(&self, li: usize, mi: usize) -> &MapCell {
        &self.cells[li * self.mus.len() + mi]
    }
}

/// Offered load at or above capacity diverges unless every hospital has a
/// finite buffer and overflowing patients are turned away.
fn structurally_unstable(s: &Scenario) -> bool {
    let bounded = s.options.overflow == Overflow::Lost && s.hospitals.iter().all(|h| h.capacity().is_some());
    s.stability_ratio() >= 1.0 && !bounded
}

/// Builds the occurrence map over a `(lambda, mu)` grid. Every cell uses the
/// same batch seeds, so neighbouring cells share random numbers.
pub fn equilibrium_map(template: &Scenario, lambdas: &[f64], mus: &[f64], opts: &MapOptions) -> Result<EquilibriumMap> {
    if lambdas.is_empty() || mus.is_empty() {
        return Err(error::Error::validation(
            "grid",
            "lambda and mu grids must be non-empty",
        ));
    }
    if opts.batches == 0 || opts.replications == 0 {
        return Err(error::Error::validation(
            "batches",
            "batches and replications must be positive",
        ));
    }
    let k = template.hospital_count();
    let mut cells = Vec::with_capacity(lambdas.len() * mus.len());
    for &lambda in lambdas {
        for &mu in mus {
            let s = template.with_arrival_rate(lambda).with_service_rate(mu);
            cells.push(map_cell(&s, lambda, mu, k, opts));
        }
    }
    Ok(EquilibriumMap {
        players: k,
        lambdas: lambdas.to_vec(),
        mus: mus.to_vec(),
        cells,
    })
}

fn map_cell(s: &Scenario, lambda: f64, mu: f64, k: usize, opts: &MapOptions) -> MapCell {
    let mut occurrence = vec![0.0; 1 << k];
    if structurally_unstable(s) {
        return MapCell {
            lambda,
            mu,
            inconsistent: true,
            occurrence,
        };
    }
    let mut consistent = 0usize;
    for b in 0..opts.batches as u64 {
        let tensor = build_payoff_tensor(s, opts.replications, derive_seed(opts.seed, b, 1));
        if let NashOutcome::Equilibria(eq) = find_pure_nash(&tensor) {
            consistent += 1;
            for p in eq {
                occurrence[p.index()] += 1.0;
            }
        }
    }
    if 2 * consistent <= opts.batches {
        return MapCell {
            lambda,
            mu,
            inconsistent: true,
            occurrence: vec![0.0; 1 << k],
        };
    }
    for o in &mut occurrence {
        *o /= consistent as f64;
    }
    MapCell {
        lambda,
        mu,
        inconsistent: false,
        occurrence,
    }
}

/// One row per cell with its dominant equilibrium.
pub fn write_map_csv(path: &Path, map: &EquilibriumMap) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["lambda", "mu", "profile", "occurrence", "inconsistent"])?;
    for c in &map.cells {
        let (profile, occ) = c
            .dominant(map.players)
            .map_or((String::new(), 0.0), |(p, o)| (p.to_string(), o));
        w.write_record([
            c.lambda.to_string(),
            c.mu.to_string(),
            profile,
            occ.to_string(),
            c.inconsistent.to_string(),
        ])?;
    }
    w.flush().map_err(|e| error::Error::io(path, e))?;
    Ok(())
}

/// One row per cell and profile.
pub fn write_occurrence_csv(path: &Path, map: &EquilibriumMap) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["lambda", "mu", "profile", "occurrence", "inconsistent"])?;
    for c in &map.cells {
        for (i, occ) in c.occurrence.iter().enumerate() {
            let p = StrategyProfile::from_index(map.players, i);
            w.write_record([
                c.lambda.to_string(),
                c.mu.to_string(),
                p.to_string(),
                occ.to_string(),
                c.inconsistent.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| error::Error::io(path, e))?;
    Ok(())
}

/// One row of `map.csv`: `(lambda, mu, profile, occurrence, inconsistent)`.
pub type MapRow = (f64, f64, String, f64, bool);

/// Reads back the per-cell rows written by [`write_map_csv`].
pub fn read_map_csv(path: &Path) -> Result<Vec<MapRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

fn csv_io(path: &Path, e: csv::Error) -> error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => error::Error::io(path, io),
        other => error::Error::Parse {
            context: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;

    const PAIR: &str = r#"
horizon = 1500
[arrivals]
rate = 1.0
spatial = { kind = "line", min = 0.0, max = 10.0 }
[travel]
kind = "line"
velocity = 40.0
[[hospitals]]
id = 0
location = 0.0
servers = 2
queue_buffer = 0
service = { kind = "exponential", rate = 1.0 }
[[hospitals]]
id = 1
location = 10.0
servers = 2
queue_buffer = 0
service = { kind = "exponential", rate = 1.0 }
"#;

    fn pair() -> Scenario {
        Scenario::from_toml_str(PAIR, Path::new(".")).unwrap()
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(equilibrium_map(&pair(), &[], &[1.0], &MapOptions::default()).is_err());
    }

    #[test]
    fn unstable_cell_is_inconsistent() {
        let opts = MapOptions {
            replications: 1,
            batches: 2,
            seed: 0,
        };
        let map = equilibrium_map(&pair(), &[5.0], &[1.0], &opts).unwrap();
        assert!(map.cells[0].inconsistent);
        assert!(map.cells[0].dominant(2).is_none());
    }

    #[test]
    fn near_empty_cell_prefers_all_accept() {
        let opts = MapOptions {
            replications: 2,
            batches: 4,
            seed: 3,
        };
        let map = equilibrium_map(&pair(), &[0.01], &[2.0], &opts).unwrap();
        let c = &map.cells[0];
        assert!(!c.inconsistent);
        assert!(c.occurrence_of(&"AA".parse().unwrap()) >= 0.99);
        assert_eq!(c.dominant(2).unwrap().0.to_string(), "AA");
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let opts = MapOptions {
            replications: 1,
            batches: 2,
            seed: 0,
        };
        let map = equilibrium_map(&pair(), &[0.2, 5.0], &[1.0, 2.0], &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("map.csv");
        write_map_csv(&p, &map).unwrap();
        let rows = read_map_csv(&p).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[2].4);
        let q = dir.path().join("long.csv");
        write_occurrence_csv(&q, &map).unwrap();
        assert_eq!(std::fs::read_to_string(q).unwrap().lines().count(), 1 + 4 * 4);
    }
}
