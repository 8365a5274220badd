//! City-scale analysis: which hospitals compete for the same patients, what
//! each pair's equilibrium suggests, and which strategy profile best explains
//! observed mortality.

mod mortality;
mod pairs;
mod pipeline;
mod shared;
mod sweep;
mod synthetic;

pub use mortality::{
    mortality_from_trace, read_mortality_curve, simulate_mortality, MortalityModel, DEFAULT_ALPHA, DEFAULT_BETA,
};
pub use pairs::{
    aggregate_strategies, pair_scenario, pairwise_equilibrium, weighted_strategy, PairOptions, PairOutcome,
    PairStrategy, WeightedStrategy,
};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineReport};
pub use shared::{filter_pairs, shared_matrix, SharedPatientMatrix};
pub use sweep::{
    admissible_profiles, correlation_p_value, pearson, profile_bits, rank_rows, read_observed_mortality,
    strategy_sweep, write_observed_mortality, write_sweep_csv, SweepConfig, SweepRow,
};
pub use synthetic::{synthetic_city, SyntheticCity, SyntheticCityOptions};
