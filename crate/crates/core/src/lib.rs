//! Weighted private integrated queries.
//!
//! A query engine over weighted datasets in which stable transformations
//! rescale record weights, rather than scaling up noise, to bound each input
//! record's influence. Measurements are Laplace noisy counts; queries can be
//! evaluated incrementally, and graphs can be synthesized from noisy
//! measurements by Metropolis–Hastings over degree-preserving edge swaps.
//!
//! Module map:
//!
//! * [`record`], [`dataset`]: canonical records, weighted datasets, deltas and norms.
//! * [`transforms`]: the stable transformations as batch functions.
//! * [`privacy`]: Laplace noise, memoized measurements and the budget accountant.
//! * [`plan`], [`incremental`]: query plans, reference evaluation and delta propagation.
//! * [`graphlib`]: graph queries, degree-sequence regression and graph generators.
//! * [`inference`]: seed graphs, edge-swap MCMC and fit traces.

pub mod dataset;
pub mod error;
pub mod graphlib;
pub mod incremental;
pub mod inference;
pub mod parallel;
pub mod plan;
pub mod privacy;
pub mod record;
pub mod transforms;

pub use dataset::{difference_norm, DeltaBatch, WeightedDataset, WEIGHT_EPSILON};
pub use error::{Error, Result};
pub use record::Record;
