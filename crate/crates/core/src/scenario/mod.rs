//! World model: hospitals, arrival profile, service and travel models.
//!
//! A scenario is a single TOML document. Durations are in hours, except
//! service-time samples and network travel times, which are in minutes to
//! match how such data is usually recorded. See `docs/scenario.md` in the
//! repository for the full schema.

mod records;
mod travel;

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{stream_rng, KdeFit, Stream};

pub use records::{read_patient_records, write_patient_records, PatientRecord};
pub use travel::{read_travel_network, EdgeRecord, Position, TravelModel};

/// A hospital's stationary action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "A", alias = "accept", alias = "Accept")]
    Accept,
    #[serde(rename = "R", alias = "redirect", alias = "Redirect")]
    Redirect,
}

impl Action {
    pub fn flipped(self) -> Self {
        match self {
            Action::Accept => Action::Redirect,
            Action::Redirect => Action::Accept,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Action::Accept => 'A',
            Action::Redirect => 'R',
        }
    }
}

/// Where a hospital sits: on the line, in the plane, or at a network node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    Line(f64),
    Plane([f64; 2]),
    Node(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceModel {
    /// Exponential service with `rate` services per hour per server.
    Exponential { rate: f64 },
    /// Gaussian KDE over recorded service durations in minutes.
    Kde {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        samples: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<f64>,
    },
}

impl ServiceModel {
    /// Mean service duration in hours.
    pub fn mean_hours(&self) -> f64 {
        match self {
            ServiceModel::Exponential { rate } => 1.0 / rate,
            ServiceModel::Kde { samples, .. } => samples.iter().sum::<f64>() / samples.len() as f64 / 60.0,
        }
    }

    /// Services per hour per server.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean_hours()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HospitalSpec {
    pub id: usize,
    pub location: Location,
    pub servers: u32,
    /// Waiting places before a Redirecting hospital turns patients away.
    /// `None` means unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_buffer: Option<u32>,
    pub service: ServiceModel,
    #[serde(default = "default_strategy")]
    pub strategy: Action,
}

fn default_strategy() -> Action {
    Action::Accept
}

impl HospitalSpec {
    /// Redirect threshold `N = C + Q`, or `None` when the buffer is unbounded.
    pub fn capacity(&self) -> Option<u32> {
        self.queue_buffer.map(|q| self.servers + q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialSampler {
    /// Uniform on `[min, max]` of a one-dimensional map.
    Line {
        min: f64,
        max: f64,
    },
    Rect {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    /// Resample recorded pickup locations uniformly.
    Empirical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        nodes: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProfile {
    /// Mean request rate, patients per hour.
    pub rate: f64,
    /// Hour-of-day multipliers. Normalised to mean 1 on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hourly_scale: Option<Vec<f64>>,
    pub spatial: SpatialSampler,
}

impl ArrivalProfile {
    pub fn scale_at(&self, t: f64) -> f64 {
        match &self.hourly_scale {
            Some(s) => s[hour_of_day(t)],
            None => 1.0,
        }
    }

    pub fn max_scale(&self) -> f64 {
        match &self.hourly_scale {
            Some(s) => s.iter().cloned().fold(0.0, f64::max),
            None => 1.0,
        }
    }
}

pub fn hour_of_day(t: f64) -> usize {
    (t.rem_euclid(24.0).floor() as usize).min(23)
}

/// What happens when every hospital turns a patient away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Overflow {
    /// The dispatcher forces a hospital to take the patient.
    #[default]
    Forced,
    /// The patient is lost to the system (finite-capacity loss model).
    Lost,
}

/// Rule for picking the hospital in a forced assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcedRule {
    /// Minimum of travel + queue_len * mean_service / C + mean_service.
    #[default]
    MinExpectedTime,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GlobalTimeMode {
    /// `sum(T_j * lambda_j) / sum(T_j)`.
    #[default]
    Printed,
    /// `sum(T_j * lambda_j) / sum(lambda_j)`, the arrival-weighted mean time.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SimOptions {
    /// Count patients travelling to a hospital toward its admitted total.
    #[serde(default)]
    pub count_in_transit: bool,
    #[serde(default)]
    pub overflow: Overflow,
    #[serde(default)]
    pub forced_rule: ForcedRule,
    #[serde(default)]
    pub global_time: GlobalTimeMode,
    /// Keep a per-patient trace in the result.
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Simulated duration in hours.
    pub horizon: f64,
    /// Initial period excluded from metrics. Defaults to 10% of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    pub arrivals: ArrivalProfile,
    pub travel: TravelModel,
    pub hospitals: Vec<HospitalSpec>,
    #[serde(default)]
    pub options: SimOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    /// `lambda / sum(C_j mu_j) >= 1`; queues are expected to grow without bound.
    Overloaded { rho: f64 },
}

impl std::fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioWarning::Overloaded { rho } => {
                write!(f, "stability ratio rho = {rho:.4} >= 1: the system is overloaded")
            }
        }
    }
}

/// A validated scenario together with what was noticed while loading it.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub rho: f64,
    pub warnings: Vec<ScenarioWarning>,
}

/// Reads, resolves and validates a scenario file. Relative data-file paths
/// are resolved against the scenario's directory and inlined.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let scenario = Scenario::from_toml_str(&text, base)?;
    let rho = scenario.stability_ratio();
    let mut warnings = Vec::new();
    if rho >= 1.0 {
        let w = ScenarioWarning::Overloaded { rho };
        log::warn!("{}: {w}", path.display());
        warnings.push(w);
    }
    Ok(LoadedScenario {
        scenario,
        rho,
        warnings,
    })
}

impl Scenario {
    /// Parses TOML, inlines referenced data files relative to `base`, and validates.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            context: "scenario".into(),
            message: e.to_string(),
        })?;
        scenario.inline_files(base)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    fn inline_files(&mut self, base: &Path) -> Result<()> {
        for h in &mut self.hospitals {
            if let ServiceModel::Kde { samples, file, .. } = &mut h.service {
                if let Some(f) = file.take() {
                    let path = base.join(f);
                    samples.extend(crate::stochastic::read_duration_samples(&path)?);
                }
            }
        }
        if let SpatialSampler::Empirical { file, points, nodes } = &mut self.arrivals.spatial {
            if let Some(f) = file.take() {
                for r in read_patient_records(&base.join(f))? {
                    match r.node_id {
                        Some(n) => nodes.push(n),
                        None => points.push([r.x, r.y]),
                    }
                }
            }
        }
        self.travel.inline_files(base)?;
        Ok(())
    }

    pub fn validate(&mut self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::validation("horizon", "must be positive"));
        }
        let warmup = self.warmup();
        if !(warmup >= 0.0) || warmup >= self.horizon {
            return Err(Error::validation("warmup", "must satisfy 0 <= warmup < horizon"));
        }
        if !(self.arrivals.rate > 0.0) || !self.arrivals.rate.is_finite() {
            return Err(Error::validation("arrivals.rate", "must be positive"));
        }
        if let Some(scale) = &mut self.arrivals.hourly_scale {
            if scale.len() != 24 {
                return Err(Error::validation(
                    "arrivals.hourly_scale",
                    format!("needs 24 entries, got {}", scale.len()),
                ));
            }
            if scale.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                return Err(Error::validation("arrivals.hourly_scale", "entries must be >= 0"));
            }
            let mean = scale.iter().sum::<f64>() / 24.0;
            if !(mean > 0.0) {
                return Err(Error::validation("arrivals.hourly_scale", "must not be all zero"));
            }
            if (mean - 1.0).abs() > 1e-12 {
                scale.iter_mut().for_each(|s| *s /= mean);
            }
        }
        self.validate_spatial()?;
        if self.hospitals.is_empty() {
            return Err(Error::validation("hospitals", "need at least one hospital"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, h) in self.hospitals.iter().enumerate() {
            let field = |f: &str| format!("hospitals[{i}].{f}");
            if !seen.insert(h.id) {
                return Err(Error::validation(field("id"), format!("duplicate id {}", h.id)));
            }
            if h.servers == 0 {
                return Err(Error::validation(field("servers"), "must be at least 1"));
            }
            match &h.service {
                ServiceModel::Exponential { rate } => {
                    if !(*rate > 0.0) || !rate.is_finite() {
                        return Err(Error::validation(field("service.rate"), "must be positive"));
                    }
                }
                ServiceModel::Kde { samples, bandwidth, .. } => {
                    if samples.len() < 2 {
                        return Err(Error::validation(
                            field("service.samples"),
                            "KDE service needs at least 2 samples",
                        ));
                    }
                    if samples.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                        return Err(Error::validation(
                            field("service.samples"),
                            "durations must be non-negative",
                        ));
                    }
                    KdeFit::fit(samples, *bandwidth).map_err(|e| Error::validation(field("service"), e.to_string()))?;
                }
            }
        }
        self.travel.validate(&self.hospitals, &self.arrivals.spatial)?;
        Ok(())
    }

    fn validate_spatial(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation("arrivals.spatial", m.to_string()));
        match &self.arrivals.spatial {
            SpatialSampler::Line { min, max } if !(min <= max) => bad("min must be <= max"),
            SpatialSampler::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } if !(x_min <= x_max && y_min <= y_max) => bad("min must be <= max"),
            SpatialSampler::Disc { radius, .. } if !(*radius >= 0.0) => bad("radius must be >= 0"),
            SpatialSampler::Empirical { points, nodes, .. } if points.is_empty() && nodes.is_empty() => {
                bad("empirical sampler has no locations")
            }
            _ => Ok(()),
        }
    }

    pub fn warmup(&self) -> f64 {
        self.warmup.unwrap_or(0.1 * self.horizon)
    }

    pub fn hospital_count(&self) -> usize {
        self.hospitals.len()
    }

    /// `rho = lambda / sum_j C_j mu_j`.
    pub fn stability_ratio(&self) -> f64 {
        let capacity: f64 = self
            .hospitals
            .iter()
            .map(|h| f64::from(h.servers) * h.service.rate())
            .sum();
        self.arrivals.rate / capacity
    }

    /// Copy with every exponential service rate replaced by `rate`.
    pub fn with_service_rate(&self, rate: f64) -> Self {
        let mut s = self.clone();
        for h in &mut s.hospitals {
            h.service = ServiceModel::Exponential { rate };
        }
        s
    }

    pub fn with_arrival_rate(&self, rate: f64) -> Self {
        let mut s = self.clone();
        s.arrivals.rate = rate;
        s
    }

    /// Draws a pickup location.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        match &self.arrivals.spatial {
            SpatialSampler::Line { min, max } => Position::Line(uniform(rng, *min, *max)),
            SpatialSampler::Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            } => Position::Plane(uniform(rng, *x_min, *x_max), uniform(rng, *y_min, *y_max)),
            SpatialSampler::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                Position::Plane(center[0] + r * theta.cos(), center[1] + r * theta.sin())
            }
            SpatialSampler::Empirical { points, nodes, .. } => {
                if !nodes.is_empty() {
                    let name = &nodes[rng.random_range(0..nodes.len())];
                    Position::Node(self.travel.origin_index(name).expect("validated"))
                } else {
                    let p = points[rng.random_range(0..points.len())];
                    self.travel.position_from_xy(p[0], p[1])
                }
            }
        }
    }

    /// Travel time in hours from `pos` to hospital index `j` for a request at time `t`.
    pub fn travel_hours(&self, pos: &Position, j: usize, t: f64) -> f64 {
        self.travel.hours(pos, &self.hospitals[j].location, j, t)
    }

    /// Hospital indices sorted by travel time (ties by index).
    pub fn hospitals_by_travel(&self, pos: &Position, t: f64) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = (0..self.hospitals.len())
            .map(|j| (j, self.travel_hours(pos, j, t)))
            .collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        v
    }

    /// Location of a recorded pickup under this scenario's travel model.
    pub fn record_position(&self, r: &PatientRecord) -> Result<Position> {
        match &r.node_id {
            Some(n) => self
                .travel
                .origin_index(n)
                .map(Position::Node)
                .ok_or_else(|| Error::validation("node_id", format!("unknown network node {n}"))),
            None => Ok(self.travel.position_from_xy(r.x, r.y)),
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws `count` patient records with timestamps in `[0, horizon)` whose
/// hour-of-day follows the arrival profile's scale factors.
pub fn generate_synthetic_patients(scenario: &Scenario, count: usize, seed: u64) -> Vec<PatientRecord> {
    let mut time_rng = stream_rng(seed, 0, None, Stream::Synthetic);
    let mut pos_rng = stream_rng(seed, 0, None, Stream::Locations);
    let max_scale = scenario.arrivals.max_scale();
    let mut times = Vec::with_capacity(count);
    while times.len() < count {
        let t = scenario.horizon * time_rng.random::<f64>();
        if time_rng.random::<f64>() * max_scale < scenario.arrivals.scale_at(t) {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .map(|t| {
            let pos = scenario.sample_position(&mut pos_rng);
            let nearest = scenario.hospitals_by_travel(&pos, t)[0].0;
            let (x, y, node_id) = scenario.travel.describe(&pos);
            PatientRecord {
                timestamp_hours: t,
                x,
                y,
                node_id,
                nearest_hospital: Some(scenario.hospitals[nearest].id),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
