//! Random streams, arrival and service distributions, kernel density
//! estimation and the one-sample Kolmogorov-Smirnov test.

mod dist;
mod kde;
mod ks;
mod rng;

pub use dist::{exp_interarrival_cdf, fit_exponential, poisson_pmf, read_duration_samples};
pub use kde::KdeFit;
pub use ks::{kolmogorov_survival, ks_test, KsResult};
pub use rng::{stream_rng, Stream, StreamRng};
