//! Synthesizing graphs that fit noisy measurements.
//!
//! [`seed`] realizes a fitted degree sequence as a random simple graph;
//! [`mcmc`] runs Metropolis–Hastings over degree-preserving edge swaps with
//! scores `exp(−pow · Σ εᵢ‖Qᵢ(A) − mᵢ‖₁)` kept in the log domain; [`trace`]
//! records how the fit evolves; [`workflow`] strings the phases together.

pub mod mcmc;
pub mod seed;
pub mod trace;
pub mod workflow;

pub use crate::graphlib::{assortativity, Assortativity};
pub use mcmc::{run_mcmc, McmcReport, Proposal, ScoreParams, StepOutcome, SyntheticState, DEFAULT_POW};
pub use seed::{is_graphical, repair_sequence, seed_graph};
pub use trace::{FitTrace, TraceRow, TRACE_HEADER};
pub use workflow::{
    fit_from_measurements, fit_seed_sequence, measure_graph, noisy_node_count, synthesize, synthesize_chains,
    synthesize_chains_sequential, Synthesis, SynthesisConfig, SEED_QUERIES,
};
