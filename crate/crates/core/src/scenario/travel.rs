use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{hour_of_day, HospitalSpec, Location, SpatialSampler};
use crate::error::{Error, Result};

/// A pickup location resolved against the travel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Position {
    Line(f64),
    Plane(f64, f64),
    /// Index into the network's origin table.
    Node(usize),
}

/// One row of a travel network file:
/// `from_node, to_node, travel_minutes[, hour_multiplier...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from_node: String,
    pub to_node: String,
    pub travel_minutes: f64,
    /// Empty (no time-of-day effect), one constant, or 24 hourly values.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hour_multipliers: Vec<f64>,
}

impl EdgeRecord {
    fn multiplier(&self, hour: usize) -> f64 {
        match self.hour_multipliers.len() {
            0 => 1.0,
            1 => self.hour_multipliers[0],
            _ => self.hour_multipliers[hour],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkIndex {
    origins: BTreeMap<String, usize>,
    origin_names: Vec<String>,
    /// `table[origin * k + hospital]` indexes `edges`.
    table: Vec<usize>,
    k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TravelModel {
    /// Distance along a line divided by `velocity` (distance units per hour).
    Line { velocity: f64 },
    /// Straight-line distance divided by `velocity`.
    Euclidean { velocity: f64 },
    /// Directed travel-time table between pickup nodes and hospital nodes.
    Network {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        edges: Vec<EdgeRecord>,
        /// Apply time-of-day multipliers.
        #[serde(default)]
        traffic: bool,
        #[serde(skip)]
        index: NetworkIndex,
    },
}

impl TravelModel {
    pub(super) fn inline_files(&mut self, base: &Path) -> Result<()> {
        if let TravelModel::Network { file, edges, .. } = self {
            if let Some(f) = file.take() {
                edges.extend(read_travel_network(&base.join(f))?);
            }
        }
        Ok(())
    }

    pub fn traffic(&self) -> bool {
        matches!(self, TravelModel::Network { traffic: true, .. })
    }

    /// Sets the time-of-day toggle; a no-op for geometric models.
    pub fn set_traffic(&mut self, on: bool) {
        if let TravelModel::Network { traffic, .. } = self {
            *traffic = on;
        }
    }

    pub(super) fn validate(&mut self, hospitals: &[HospitalSpec], spatial: &SpatialSampler) -> Result<()> {
        match self {
            TravelModel::Line { velocity } | TravelModel::Euclidean { velocity } => {
                if !(*velocity > 0.0) || !velocity.is_finite() {
                    return Err(Error::validation("travel.velocity", "must be positive"));
                }
            }
            TravelModel::Network { .. } => {}
        }
        let kind = match self {
            TravelModel::Line { .. } => "line",
            TravelModel::Euclidean { .. } => "euclidean",
            TravelModel::Network { .. } => "network",
        };
        for (i, h) in hospitals.iter().enumerate() {
            let ok = matches!(
                (&*self, &h.location),
                (TravelModel::Line { .. }, Location::Line(_))
                    | (TravelModel::Euclidean { .. }, Location::Plane(_))
                    | (TravelModel::Network { .. }, Location::Node(_))
            );
            if !ok {
                return Err(Error::validation(
                    format!("hospitals[{i}].location"),
                    format!("does not match travel kind `{kind}`"),
                ));
            }
        }
        let spatial_ok = match (&*self, spatial) {
            (TravelModel::Line { .. }, SpatialSampler::Line { .. }) => true,
            (TravelModel::Euclidean { .. }, SpatialSampler::Rect { .. } | SpatialSampler::Disc { .. }) => true,
            (TravelModel::Line { .. } | TravelModel::Euclidean { .. }, SpatialSampler::Empirical { nodes, .. }) => {
                nodes.is_empty()
            }
            (TravelModel::Network { .. }, SpatialSampler::Empirical { points, .. }) => points.is_empty(),
            _ => false,
        };
        if !spatial_ok {
            return Err(Error::validation(
                "arrivals.spatial",
                format!("sampler kind does not match travel kind `{kind}`"),
            ));
        }
        if let TravelModel::Network { edges, index, .. } = self {
            let nodes = match spatial {
                SpatialSampler::Empirical { nodes, .. } => nodes,
                _ => unreachable!(),
            };
            *index = build_index(edges, hospitals, nodes)?;
        }
        Ok(())
    }

    pub(super) fn origin_index(&self, name: &str) -> Option<usize> {
        match self {
            TravelModel::Network { index, .. } => index.origins.get(name).copied(),
            _ => None,
        }
    }

    pub(super) fn position_from_xy(&self, x: f64, y: f64) -> Position {
        match self {
            TravelModel::Line { .. } => Position::Line(x),
            _ => Position::Plane(x, y),
        }
    }

    /// `(x, y, node)` columns for a patient record.
    pub fn describe(&self, pos: &Position) -> (f64, f64, Option<String>) {
        match (self, pos) {
            (_, Position::Line(x)) => (*x, 0.0, None),
            (_, Position::Plane(x, y)) => (*x, *y, None),
            (TravelModel::Network { index, .. }, Position::Node(i)) => (0.0, 0.0, Some(index.origin_names[*i].clone())),
            (_, Position::Node(_)) => (0.0, 0.0, None),
        }
    }

    pub(super) fn hours(&self, pos: &Position, loc: &Location, j: usize, t: f64) -> f64 {
        match (self, pos, loc) {
            (TravelModel::Line { velocity }, Position::Line(x), Location::Line(h)) => (x - h).abs() / velocity,
            (TravelModel::Euclidean { velocity }, Position::Plane(x, y), Location::Plane(h)) => {
                (x - h[0]).hypot(y - h[1]) / velocity
            }
            (
                TravelModel::Network {
                    edges, traffic, index, ..
                },
                Position::Node(o),
                _,
            ) => {
                let e = &edges[index.table[o * index.k + j]];
                let m = if *traffic { e.multiplier(hour_of_day(t)) } else { 1.0 };
                e.travel_minutes * m / 60.0
            }
            _ => panic!("position {pos:?} incompatible with travel model"),
        }
    }
}

fn build_index(edges: &[EdgeRecord], hospitals: &[HospitalSpec], origins: &[String]) -> Result<NetworkIndex> {
    for (i, e) in edges.iter().enumerate() {
        if !(e.travel_minutes >= 0.0) || !e.travel_minutes.is_finite() {
            return Err(Error::validation(
                format!("travel.edges[{i}].travel_minutes"),
                "must be non-negative",
            ));
        }
        if !matches!(e.hour_multipliers.len(), 0 | 1 | 24) {
            return Err(Error::validation(
                format!("travel.edges[{i}].hour_multipliers"),
                "expected 0, 1 or 24 values",
            ));
        }
        if e.hour_multipliers.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::validation(
                format!("travel.edges[{i}].hour_multipliers"),
                "must be non-negative",
            ));
        }
    }
    let lookup: BTreeMap<(&str, &str), usize> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.from_node.as_str(), e.to_node.as_str()), i))
        .collect();
    let mut index = NetworkIndex {
        k: hospitals.len(),
        ..Default::default()
    };
    for name in origins {
        if index.origins.contains_key(name) {
            continue;
        }
        let o = index.origin_names.len();
        index.origins.insert(name.clone(), o);
        index.origin_names.push(name.clone());
        for h in hospitals {
            let Location::Node(dest) = &h.location else {
                unreachable!()
            };
            let e = lookup.get(&(name.as_str(), dest.as_str())).ok_or_else(|| {
                Error::validation(
                    "travel.edges",
                    format!("no edge from `{name}` to hospital node `{dest}`"),
                )
            })?;
            index.table.push(*e);
        }
    }
    Ok(index)
}

/// Reads `from_node, to_node, travel_minutes[, hour_multiplier...]` rows.
/// A header row is optional.
pub fn read_travel_network(path: &Path) -> Result<Vec<EdgeRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let ctx = || format!("{}:{}", path.display(), i + 1);
        if rec.len() < 3 {
            return Err(Error::Parse {
                context: ctx(),
                message: "expected at least 3 columns".into(),
            });
        }
        let Ok(minutes) = rec[2].parse::<f64>() else {
            if i == 0 {
                continue;
            }
            return Err(Error::Parse {
                context: ctx(),
                message: format!("travel_minutes `{}` is not a number", &rec[2]),
            });
        };
        let mults = rec
            .iter()
            .skip(3)
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    context: ctx(),
                    message: format!("hour multiplier `{s}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(EdgeRecord {
            from_node: rec[0].to_string(),
            to_node: rec[1].to_string(),
            travel_minutes: minutes,
            hour_multipliers: mults,
        });
    }
    Ok(out)
}
