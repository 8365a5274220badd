use serde::{Deserialize, Serialize};

use crate::scenario::GlobalTimeMode;

/// Post-warmup metrics of one hospital. Times are in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HospitalMetrics {
    pub id: usize,
    /// Patients requested after warmup whose service finished by the horizon.
    pub served: u64,
    /// Requests dispatched here after warmup.
    pub dispatched: u64,
    pub mean_travel: f64,
    pub mean_queue: f64,
    pub mean_service: f64,
    /// `T_total = T_travel + T_queue + T_service`.
    pub total_time: f64,
    /// `Score = served / T_total`; `None` when nothing was served.
    pub score: Option<f64>,
    /// Effective arrival rate, dispatched per hour of the metric window.
    pub arrival_rate: f64,
    /// Time-average number waiting for a server.
    pub mean_queue_length: f64,
    /// Time-average fraction of servers busy.
    pub utilization: f64,
    /// Time-average queue length in each quarter of the metric window.
    pub quarter_queue: [f64; 4],
    /// Rejections this hospital issued.
    pub rejections: u64,
    /// Forced assignments this hospital received.
    pub forced: u64,
}

/// One completed patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub patient_id: u64,
    pub request_time: f64,
    pub hospital_id: usize,
    pub n_rejections: u32,
    pub travel: f64,
    pub queue: f64,
    pub service: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub hospitals: Vec<HospitalMetrics>,
    /// Length of the metric window, `horizon - warmup`.
    pub window: f64,
    /// All requests over the whole run, warmup included.
    pub total_arrivals: u64,
    pub served_total: u64,
    pub in_system_at_end: u64,
    pub in_transit_at_end: u64,
    pub lost: u64,
    /// Patients refused at least once.
    pub redirected: u64,
    pub forced_assignments: u64,
    /// A hospital's queue kept growing through the run.
    pub overcrowded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

impl SimulationResult {
    /// Aggregate time indicator over hospitals that served patients.
    ///
    /// `Printed` is `sum(T_j lambda_j) / sum(T_j)`; `Weighted` divides by
    /// `sum(lambda_j)` instead, giving the arrival-weighted mean total time.
    pub fn global_time(&self, mode: GlobalTimeMode) -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for h in self.hospitals.iter().filter(|h| h.served > 0) {
            num += h.total_time * h.arrival_rate;
            den += match mode {
                GlobalTimeMode::Printed => h.total_time,
                GlobalTimeMode::Weighted => h.arrival_rate,
            };
        }
        (den > 0.0).then(|| num / den)
    }

    /// Served patients over the mean total time of all served patients.
    pub fn system_score(&self) -> Option<f64> {
        let n: u64 = self.hospitals.iter().map(|h| h.served).sum();
        if n == 0 {
            return None;
        }
        let t: f64 = self
            .hospitals
            .iter()
            .map(|h| h.total_time * h.served as f64)
            .sum::<f64>()
            / n as f64;
        (t > 0.0).then(|| n as f64 / t)
    }

    pub fn scores(&self) -> Vec<Option<f64>> {
        self.hospitals.iter().map(|h| h.score).collect()
    }
}
