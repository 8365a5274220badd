use std::path::Path;
use std::sync::Once;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::des::{run_simulation, StrategyProfile, TraceRow};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Door-to-balloon minutes mapped to mortality through a base curve and an
/// affine rescale, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MortalityModel {
    /// `(minutes, value)` knots with strictly increasing minutes.
    pub knots: Vec<(f64, f64)>,
    pub alpha: f64,
    pub beta: f64,
}

pub const DEFAULT_ALPHA: f64 = 3.0128;
pub const DEFAULT_BETA: f64 = -3.0560;

impl Default for MortalityModel {
    /// Relative mortality risk against door-to-balloon time, equal to 1 up
    /// to half an hour and rising steadily after; a qualitative stand-in for
    /// published registry curves.
    fn default() -> Self {
        let knots = vec![
            (0.0, 1.0),
            (30.0, 1.0),
            (60.0, 1.05),
            (90.0, 1.12),
            (120.0, 1.2),
            (180.0, 1.3),
            (240.0, 1.4),
            (360.0, 1.6),
        ];
        Self {
            knots,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
        }
    }
}

impl MortalityModel {
    pub fn new(knots: Vec<(f64, f64)>, alpha: f64, beta: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::validation("curve", "need at least two knots"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::validation("curve.minutes", "must be strictly increasing"));
        }
        if knots.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::validation("curve.probability", "must be non-decreasing"));
        }
        if !(alpha.is_finite() && alpha != 0.0 && beta.is_finite()) {
            return Err(Error::validation(
                "alpha",
                "coefficients must be finite with alpha != 0",
            ));
        }
        Ok(Self { knots, alpha, beta })
    }

    /// Base curve by linear interpolation. The flag is set when `minutes`
    /// fell outside the table and was clamped to the nearest knot.
    pub fn base(&self, minutes: f64) -> (f64, bool) {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if minutes <= first.0 {
            return (first.1, minutes < first.0);
        }
        if minutes >= last.0 {
            return (last.1, minutes > last.0);
        }
        let i = self.knots.partition_point(|k| k.0 <= minutes);
        let (x0, y0) = self.knots[i - 1];
        let (x1, y1) = self.knots[i];
        (y0 + (y1 - y0) * (minutes - x0) / (x1 - x0), false)
    }

    /// `clamp(alpha p + beta, 0, 1)`, evaluated as `alpha (p - root)` so
    /// that the root itself maps to exactly zero.
    pub fn rescale(&self, p: f64) -> f64 {
        let root = -self.beta / self.alpha;
        (self.alpha * (p - root)).clamp(0.0, 1.0)
    }

    pub fn probability(&self, minutes: f64) -> f64 {
        self.rescale(self.base(minutes).0)
    }
}

/// Reads `minutes, probability` knots with a header row.
pub fn read_mortality_curve(path: &Path, alpha: f64, beta: f64) -> Result<MortalityModel> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut knots = Vec::new();
    for row in r.deserialize() {
        let (m, p): (f64, f64) = row?;
        knots.push((m, p));
    }
    MortalityModel::new(knots, alpha, beta)
}

/// Mean mortality over each hospital's served patients, with door-to-balloon
/// time = queue + service. `None` for hospitals that served nobody.
pub fn mortality_from_trace(trace: &[TraceRow], hospitals: usize, model: &MortalityModel) -> Vec<Option<f64>> {
    let mut sum = vec![0.0; hospitals];
    let mut n = vec![0usize; hospitals];
    let mut clamped = 0usize;
    for t in trace {
        let minutes = 60.0 * (t.queue + t.service);
        let (p, c) = model.base(minutes);
        clamped += c as usize;
        sum[t.hospital_id] += model.rescale(p);
        n[t.hospital_id] += 1;
    }
    if clamped > 0 {
        // Sweeps call this thousands of times; warn once and keep counts for debug.
        static WARNED: Once = Once::new();
        WARNED.call_once(|| warn!("door-to-balloon times outside the mortality table are clamped to the nearest knot"));
        debug!("{clamped} door-to-balloon times clamped");
    }
    sum.iter()
        .zip(&n)
        .map(|(s, &c)| (c > 0).then(|| s / c as f64))
        .collect()
}

/// Per-hospital mortality averaged over one run per seed.
pub fn simulate_mortality(
    scenario: &Scenario,
    profile: &StrategyProfile,
    model: &MortalityModel,
    seeds: &[u64],
) -> Vec<Option<f64>> {
    let mut s = scenario.clone();
    s.options.trace = true;
    let k = s.hospital_count();
    let runs: Vec<Vec<Option<f64>>> = seeds
        .par_iter()
        .map(|&seed| {
            let r = run_simulation(&s, profile, seed);
            mortality_from_trace(r.trace.as_deref().unwrap_or(&[]), k, model)
        })
        .collect();
    (0..k)
        .map(|j| {
            let v: Vec<f64> = runs.iter().filter_map(|r| r[j]).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}
