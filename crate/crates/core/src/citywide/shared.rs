use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{PatientRecord, Scenario};

/// Symmetric share of patients two hospitals have in common.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedPatientMatrix {
    /// Hospital ids, in scenario order.
    pub ids: Vec<usize>,
    /// `omega[i][j]`: among patients taken to `i` or `j`, the share for which
    /// both were feasible destinations. The diagonal is zero.
    pub omega: Vec<Vec<f64>>,
    /// Patients taken to each hospital.
    pub visits: Vec<usize>,
}

impl SharedPatientMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// A hospital is feasible for a patient when its travel time is within
/// `ratio` times the travel time to the nearest hospital.
///
/// `assignments` holds, per record, the id of the hospital that took it.
pub fn shared_matrix(
    scenario: &Scenario,
    records: &[PatientRecord],
    assignments: &[usize],
    ratio: f64,
) -> Result<SharedPatientMatrix> {
    if records.len() != assignments.len() {
        return Err(Error::validation(
            "assignments",
            "one assignment per record is required",
        ));
    }
    if !(ratio >= 1.0) {
        return Err(Error::validation("ratio", "must be at least 1"));
    }
    let k = scenario.hospital_count();
    let ids: Vec<usize> = scenario.hospitals.iter().map(|h| h.id).collect();
    let mut visits = vec![0usize; k];
    // both[i][j]: records assigned to i or j for which i and j are both feasible.
    let mut both = vec![vec![0usize; k]; k];
    for (r, &id) in records.iter().zip(assignments) {
        let a = ids
            .iter()
            .position(|&h| h == id)
            .ok_or_else(|| Error::validation("assignments", format!("unknown hospital id {id}")))?;
        visits[a] += 1;
        let pos = scenario.record_position(r)?;
        let times: Vec<f64> = (0..k)
            .map(|j| scenario.travel_hours(&pos, j, r.timestamp_hours))
            .collect();
        let nearest = times.iter().copied().fold(f64::INFINITY, f64::min);
        let feasible: Vec<bool> = times.iter().map(|&t| t <= ratio * nearest + 1e-12).collect();
        if !feasible[a] {
            continue;
        }
        for j in (0..k).filter(|&j| j != a && feasible[j]) {
            both[a][j] += 1;
        }
    }
    let mut omega = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let denom = visits[i] + visits[j];
            if denom > 0 {
                let w = (both[i][j] + both[j][i]) as f64 / denom as f64;
                omega[i][j] = w;
                omega[j][i] = w;
            }
        }
    }
    Ok(SharedPatientMatrix { ids, omega, visits })
}

/// Index pairs `(i, j)` with `i < j` and `omega >= threshold`.
pub fn filter_pairs(matrix: &SharedPatientMatrix, threshold: f64) -> Vec<(usize, usize)> {
    let k = matrix.len();
    let mut out = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            if matrix.omega[i][j] >= threshold {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;

    const LINE: &str = r#"
horizon = 100
[arrivals]
rate = 1.0
spatial = { kind = "line", min = 0.0, max = 10.0 }
[travel]
kind = "line"
velocity = 10.0
[[hospitals]]
id = 3
location = 0.0
servers = 1
service = { kind = "exponential", rate = 1.0 }
[[hospitals]]
id = 8
location = 10.0
servers = 1
service = { kind = "exponential", rate = 1.0 }
"#;

    fn line() -> Scenario {
        Scenario::from_toml_str(LINE, Path::new(".")).unwrap()
    }

    fn rec(x: f64) -> PatientRecord {
        PatientRecord {
            timestamp_hours: 0.0,
            x,
            y: 0.0,
            node_id: None,
            nearest_hospital: None,
        }
    }

    #[test]
    fn disjoint_catchments_share_nothing() {
        let records = vec![rec(1.0), rec(2.0), rec(9.0)];
        let m = shared_matrix(&line(), &records, &[3, 3, 8], 1.5).unwrap();
        assert_eq!(m.omega[0][1], 0.0);
        assert_eq!(m.visits, [2, 1]);
    }

    #[test]
    fn equidistant_patients_are_all_shared() {
        let records = vec![rec(5.0); 6];
        let m = shared_matrix(&line(), &records, &[3, 8, 3, 8, 3, 3], 1.5).unwrap();
        assert_eq!(m.omega[0][1], 1.0);
        assert_eq!(m.omega[1][0], 1.0);
    }

    #[test]
    fn unknown_id_is_an_error() {
        assert!(shared_matrix(&line(), &[rec(1.0)], &[4], 1.5).is_err());
    }

    #[test]
    fn filter_is_monotone_in_threshold() {
        let m = SharedPatientMatrix {
            ids: vec![0, 1, 2],
            omega: vec![vec![0.0, 0.2, 0.05], vec![0.2, 0.0, 0.5], vec![0.05, 0.5, 0.0]],
            visits: vec![1; 3],
        };
        assert_eq!(filter_pairs(&m, 0.0).len(), 3);
        assert_eq!(filter_pairs(&m, 0.1), [(0, 1), (1, 2)]);
        assert!(filter_pairs(&m, 1.0).is_empty());
    }
}
