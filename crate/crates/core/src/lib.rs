//! Non-parametric k-nearest-neighbor estimators of differential entropy,
//! mutual information and directed information for continuous-amplitude
//! time series.
//!
//! Everything is computed in nats; use [`NATS_TO_BITS`] at the reporting
//! layer.

pub mod di;
pub mod embed;
pub mod entropy;
mod error;
pub mod generators;
pub mod knn;
pub mod mi;
pub mod order;
pub mod rng;
pub mod significance;
pub mod special;

pub use di::{
    di_gov, di_ksg, di_rate_linear_theory, estimate_di, DiEstimate, DiMethod, DiOptions, Direction,
};
pub use embed::{EmbeddedDataset, SeriesPair, Subspace};
pub use entropy::{entropy_kl, entropy_naive, EntropyEstimate};
pub use error::{Error, Result};
pub use knn::{knn_distance, lp_distance, range_count, Norm, PointSet, Strictness};
pub use mi::{mi_3kl, mi_gov, mi_ksg, MiEstimate, MiMethod};
pub use order::{estimate_order, knn_predict_next, OrderMethod, OrderOptions, OrderSelection};
pub use significance::{significance_test, SignificanceOptions, SignificanceReport, SurrogateKind};
pub use special::{digamma, unit_ball_volume};

/// `log2(e)`: multiply a value in nats by this to get bits.
pub const NATS_TO_BITS: f64 = std::f64::consts::LOG2_E;

/// Default neighbor count used throughout the benchmarks.
pub const DEFAULT_K: usize = 8;

/// Largest Markov order accepted by the DI estimators.
pub const MAX_ORDER: usize = 20;
