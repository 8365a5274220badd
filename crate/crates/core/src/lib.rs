// Checks such as `!(x > 0.0)` are written that way on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod citywide;
pub mod des;
pub mod error;
pub mod game;
pub mod queueing;
pub mod scenario;
pub mod sensitivity;
pub mod stochastic;

pub use error::{Error, Result};
