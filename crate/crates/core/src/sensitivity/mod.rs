//! Variance-based global sensitivity analysis: Saltelli designs on scrambled
//! Sobol points, first- and total-order indices with bootstrap intervals.

mod indices;
mod model;
mod sequence;
mod space;

pub use indices::{
    analyze, convergence_study, sobol_indices, write_indices_csv, ConvergenceRow, ConvergenceStudy, SobolIndices,
    SobolOptions,
};
pub use model::{DesModel, DesOutput, InvalidPolicy};
pub use sequence::{SobolSequence, MAX_DIMENSIONS};
pub use space::{saltelli_sample, Factor, FactorSpace, SaltelliDesign};
