use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One recorded (or synthesised) patient request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub timestamp_hours: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_id: Option<String>,
    /// Ground-truth nearest hospital id, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest_hospital: Option<usize>,
}

/// Reads `timestamp_hours, x, y[, node_id][, nearest_hospital]` with a header row.
pub fn read_patient_records(path: &Path) -> Result<Vec<PatientRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let mut r: PatientRecord = row?;
        if r.node_id.as_deref() == Some("") {
            r.node_id = None;
        }
        out.push(r);
    }
    Ok(out)
}

pub fn write_patient_records(path: &Path, records: &[PatientRecord]) -> Result<()> {
    let with_node = records.iter().any(|r| r.node_id.is_some());
    let with_nearest = records.iter().any(|r| r.nearest_hospital.is_some());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["timestamp_hours", "x", "y"];
    if with_node {
        header.push("node_id");
    }
    if with_nearest {
        header.push("nearest_hospital");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.timestamp_hours.to_string(), r.x.to_string(), r.y.to_string()];
        if with_node {
            row.push(r.node_id.clone().unwrap_or_default());
        }
        if with_nearest {
            row.push(r.nearest_hospital.map(|h| h.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
