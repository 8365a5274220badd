//! Discrete-event simulation of request, dispatch, travel, queueing,
//! service and discharge under a fixed hospital strategy profile.

mod dispatch;
mod engine;
mod metrics;
mod profile;
mod replicate;
mod trend;

pub use dispatch::{dispatch, DispatchDecision, HospitalLoad};
pub use engine::{run_simulation, Simulator};
pub use metrics::{HospitalMetrics, SimulationResult, TraceRow};
pub use profile::StrategyProfile;
pub use replicate::{derive_seed, replicate, MetricSummary, ReplicationSummary};
pub use trend::{queue_growth_detected, TREND_SIGNIFICANCE};
