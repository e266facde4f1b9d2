//! Dense matrices, seeded random generation and correlation statistics.

mod matrix;
mod rng;
mod stats;

pub use matrix::{mat_mul, Matrix};
pub use rng::{rng_uniform, Rng};
pub use stats::{mean, pearson, ranks, spearman, CONSTANT_VARIANCE};
