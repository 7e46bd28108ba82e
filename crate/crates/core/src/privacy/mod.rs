//! Laplace noise, memoized measurements and budget accounting.

pub mod budget;
pub mod measurement;
pub mod noise;

pub use budget::{BudgetAccount, Ledger, BUDGET_TOLERANCE};
pub use measurement::{noisy_count, Measurement};
pub use noise::{laplace_cdf, laplace_from_uniform, laplace_sample, NoiseSource};
