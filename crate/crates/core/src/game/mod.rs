//! Normal-form games between hospitals: payoff tensors estimated by
//! simulation, weak pure Nash equilibria, and equilibrium-occurrence maps.

mod map;
mod nash;
mod tensor;

pub use map::{
    equilibrium_map, read_map_csv, write_map_csv, write_occurrence_csv, EquilibriumMap, MapCell, MapOptions, MapRow,
};
pub use nash::{find_pure_nash, is_weak_nash, NashOutcome};
pub use tensor::{build_payoff_tensor, optimal_profile, OptimalProfile, PayoffTensor, EQUIVALENCE_MARGIN};
