//! The two-phase synthesis workflow.
//!
//! Phase one measures the protected graph — the seed queries plus whatever
//! targets the analyst wants fitted — and charges the budget. Phase two uses
//! only those measurements: regression yields a degree sequence, a seed graph
//! realizes it, and the edge-swap walk fits the targets.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphlib::{
    default_cap, fit_degree_sequence, graph_plan, Graph, GraphQuery, RegressionGrid, Symmetrization, EDGES, NODES_TOKEN,
};
use crate::parallel;
use crate::privacy::{noisy_count, BudgetAccount, Measurement, NoiseSource};
use crate::record::Record;

use super::mcmc::{run_mcmc, McmcReport, ScoreParams, SyntheticState};
use super::seed::seed_graph;

/// Queries whose measurements feed the seed graph; together they cost 3ε.
pub const SEED_QUERIES: [GraphQuery; 3] = [GraphQuery::DegreeSequence, GraphQuery::Ccdf, GraphQuery::NodeCount];

/// Measures each query at `epsilon` against the protected graph.
///
/// The total cost is charged to the `edges` ledger of `account` before any
/// noise is drawn, all or nothing. Measurements are returned in query order.
pub fn measure_graph(
    graph: &Graph,
    queries: &[GraphQuery],
    policy: Symmetrization,
    epsilon: f64,
    account: &mut BudgetAccount,
    noise: &mut NoiseSource,
) -> Result<Vec<Measurement>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let plan = graph_plan(queries, policy)?;
    let mut uses = 0;
    for q in queries {
        uses += plan.uses(&q.id(), EDGES)?;
    }
    account.charge_uses(&[(EDGES, uses)], epsilon)?;
    let mut inputs = BTreeMap::new();
    inputs.insert(EDGES.to_string(), graph.to_dataset(policy));
    let outputs = plan.evaluate_outputs(&inputs)?;
    queries
        .iter()
        .map(|q| noisy_count(&q.id(), &outputs[&q.id()], epsilon, noise))
        .collect()
}

/// Noisy node count read off a `nodecount` measurement (the record weighs `n/2`).
pub fn noisy_node_count(nodecount: &Measurement) -> f64 {
    2.0 * nodecount.lookup(&Record::str(NODES_TOKEN))
}

/// Regression over the degree-sequence and CCDF measurements, zeros dropped.
pub fn fit_seed_sequence(degseq: &Measurement, ccdf: &Measurement, nodecount: &Measurement) -> Vec<u32> {
    let cap = default_cap(noisy_node_count(nodecount), nodecount.epsilon());
    let v = |x: usize| degseq.lookup(&Record::int(x as i64));
    let h = |y: usize| ccdf.lookup(&Record::int(y as i64));
    let mut fitted = fit_degree_sequence(&RegressionGrid {
        sequence: &v,
        ccdf: &h,
        cap,
    });
    fitted.retain(|&d| d > 0);
    fitted
}

/// Finds the seed measurements by query id and fits the degree sequence.
pub fn fit_from_measurements(measurements: &[Arc<Measurement>]) -> Result<Vec<u32>> {
    let find = |q: GraphQuery| {
        measurements
            .iter()
            .find(|m| m.query_id() == q.id())
            .ok_or_else(|| Error::MissingInput(format!("{q} measurement")))
    };
    Ok(fit_seed_sequence(
        find(GraphQuery::DegreeSequence)?,
        find(GraphQuery::Ccdf)?,
        find(GraphQuery::NodeCount)?,
    ))
}

/// Everything phase two needs besides the measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub policy: Symmetrization,
    pub params: ScoreParams,
    pub steps: u64,
    pub trace_interval: u64,
    pub graph_seed: u64,
    pub walk_seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            policy: Symmetrization::SymmetricDirected,
            params: ScoreParams::default(),
            steps: 0,
            trace_interval: 1000,
            graph_seed: 0,
            walk_seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub seed: Graph,
    pub graph: Graph,
    pub report: McmcReport,
}

/// Seed graph from `sequence`, then the walk fitting `targets`.
pub fn synthesize(sequence: &[u32], targets: &[Arc<Measurement>], config: &SynthesisConfig) -> Result<Synthesis> {
    let mut graph_rng = ChaCha8Rng::seed_from_u64(config.graph_seed);
    let seed = seed_graph(sequence, &mut graph_rng);
    let mut state = SyntheticState::new(seed.clone(), targets, config.policy, config.params)?;
    let mut walk_rng = ChaCha8Rng::seed_from_u64(config.walk_seed);
    let report = run_mcmc(&mut state, config.steps, config.trace_interval, &mut walk_rng)?;
    Ok(Synthesis {
        seed,
        graph: state.into_graph(),
        report,
    })
}

/// Independent chains, one per config, run on the thread pool when the
/// `parallel` feature is enabled. Results are in config order and do not
/// depend on scheduling.
pub fn synthesize_chains(
    sequence: &[u32],
    targets: &[Arc<Measurement>],
    configs: &[SynthesisConfig],
) -> Vec<Result<Synthesis>> {
    parallel::map(configs, |c| synthesize(sequence, targets, c))
}

/// [`synthesize_chains`] on the calling thread.
pub fn synthesize_chains_sequential(
    sequence: &[u32],
    targets: &[Arc<Measurement>],
    configs: &[SynthesisConfig],
) -> Vec<Result<Synthesis>> {
    parallel::map_sequential(configs, |c| synthesize(sequence, targets, c))
}
