//! Metropolis–Hastings over degree-preserving edge swaps.
//!
//! The walk only ever sees [`Measurement`]s and its own candidate graph; the
//! protected input is never reachable from here.

use std::sync::Arc;

use rand::Rng;

use crate::dataset::DeltaBatch;
use crate::error::{Error, Result};
use crate::graphlib::{edge_records, graph_plan, Graph, GraphQuery, Symmetrization, EDGES};
use crate::incremental::Evaluation;
use crate::privacy::Measurement;

use super::trace::FitTrace;

/// Sharpening exponent applied to every measurement's discrepancy.
pub const DEFAULT_POW: f64 = 10_000.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreParams {
    pow: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams { pow: DEFAULT_POW }
    }
}

impl ScoreParams {
    pub fn new(pow: f64) -> Result<Self> {
        if !(pow > 0.0 && pow.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pow must be positive and finite, got {pow}"
            )));
        }
        Ok(ScoreParams { pow })
    }

    pub fn pow(&self) -> f64 {
        self.pow
    }
}

/// Replace edges `(a, b)` and `(c, d)`, at positions `first` and `second`,
/// with `(a, d)` and `(c, b)`.
///
/// Edges are drawn uniformly and each is given a random orientation, so
/// every swap and its reverse are proposed with equal probability. Invalid
/// proposals are counted as rejected steps rather than resampled, which keeps
/// that symmetry intact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub first: usize,
    pub second: usize,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

/// What one MCMC step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// The proposal would have created a self-loop or a repeated edge.
    Invalid,
}

/// Candidate graph with live discrepancy trackers for each fitted measurement.
#[derive(Clone)]
pub struct SyntheticState {
    graph: Graph,
    policy: Symmetrization,
    params: ScoreParams,
    eval: Evaluation,
    epsilons: Vec<f64>,
}

impl SyntheticState {
    /// Installs `graph` and attaches every measurement, which must carry a
    /// graph query id (`tbi`, `jdd`, `tbd-k2`, ...).
    ///
    /// Each measurement is cloned so that lazily drawn noise is memoized per
    /// chain: independent chains never observe each other's lookups.
    pub fn new(
        graph: Graph,
        measurements: &[Arc<Measurement>],
        policy: Symmetrization,
        params: ScoreParams,
    ) -> Result<Self> {
        let mut queries: Vec<GraphQuery> = Vec::new();
        for m in measurements {
            let q: GraphQuery = m.query_id().parse()?;
            if queries.contains(&q) {
                return Err(Error::InvalidArgument(format!("measurement {q} supplied twice")));
            }
            queries.push(q);
        }
        let plan = Arc::new(graph_plan(&queries, policy)?);
        let mut inputs = std::collections::BTreeMap::new();
        inputs.insert(EDGES.to_string(), graph.to_dataset(policy));
        let mut eval = Evaluation::initialize(plan, &inputs)?;
        let mut epsilons = Vec::with_capacity(measurements.len());
        for m in measurements {
            eval.attach(m.query_id(), Arc::new(Measurement::clone(m)))?;
            epsilons.push(m.epsilon());
        }
        Ok(SyntheticState {
            graph,
            policy,
            params,
            eval,
            epsilons,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    pub fn policy(&self) -> Symmetrization {
        self.policy
    }

    pub fn params(&self) -> ScoreParams {
        self.params
    }

    /// `Σᵢ ‖Qᵢ(A) − mᵢ‖₁` over attached measurements.
    pub fn discrepancy(&self) -> f64 {
        (0..self.epsilons.len()).map(|i| self.eval.tracker(i).value()).sum()
    }

    /// `−pow · Σᵢ εᵢ‖Qᵢ(A) − mᵢ‖₁`.
    pub fn log_score(&self) -> f64 {
        -self.params.pow * self.weighted(|i| self.eval.tracker(i).value())
    }

    fn weighted(&self, value: impl Fn(usize) -> f64) -> f64 {
        self.epsilons.iter().enumerate().map(|(i, eps)| eps * value(i)).sum()
    }

    /// Draws two distinct edge positions and random orientations.
    ///
    /// Returns `None` when the graph has fewer than two edges.
    pub fn propose<R: Rng>(&self, rng: &mut R) -> Option<Proposal> {
        let m = self.graph.num_edges();
        if m < 2 {
            return None;
        }
        let first = rng.gen_range(0..m);
        let mut second = rng.gen_range(0..m - 1);
        if second >= first {
            second += 1;
        }
        let (mut a, mut b) = self.graph.edge(first);
        let (mut c, mut d) = self.graph.edge(second);
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut a, &mut b);
        }
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        Some(Proposal {
            first,
            second,
            a,
            b,
            c,
            d,
        })
    }

    /// False when the swap would create a self-loop or a repeated edge.
    pub fn is_valid(&self, p: &Proposal) -> bool {
        p.a != p.d && p.c != p.b && !self.graph.has_edge(p.a, p.d) && !self.graph.has_edge(p.c, p.b)
    }

    /// Input delta for `p`: the old edges at −1, the new ones at +1.
    pub fn delta(&self, p: &Proposal) -> DeltaBatch {
        let mut delta = DeltaBatch::new();
        for (x, y) in [(p.a, p.b), (p.c, p.d)] {
            for r in edge_records(x, y, self.policy) {
                delta.add(r, -1.0);
            }
        }
        for (x, y) in [(p.a, p.d), (p.c, p.b)] {
            for r in edge_records(x, y, self.policy) {
                delta.add(r, 1.0);
            }
        }
        delta
    }

    /// Pushes `delta` and returns the resulting change in log-score.
    fn push(&mut self, delta: &DeltaBatch) -> Result<f64> {
        let report = self.eval.propagate(EDGES, delta)?;
        let weighted: f64 = self.epsilons.iter().zip(&report.discrepancy).map(|(e, d)| e * d).sum();
        Ok(-self.params.pow * weighted)
    }

    /// `min(1, Score(next)/Score(current))` for a valid proposal, computed in
    /// the log domain. The state is left exactly as it was.
    pub fn score_ratio(&mut self, p: &Proposal) -> Result<f64> {
        let delta = self.delta(p);
        let log_ratio = self.push(&delta)?;
        self.push(&delta.negated())?;
        Ok(log_ratio.min(0.0).exp())
    }

    /// One proposal and accept/reject decision.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Result<StepOutcome> {
        let Some(p) = self.propose(rng) else {
            return Ok(StepOutcome::Invalid);
        };
        if !self.is_valid(&p) {
            return Ok(StepOutcome::Invalid);
        }
        let delta = self.delta(&p);
        let log_ratio = self.push(&delta)?;
        if log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp() {
            self.graph.replace_edge(p.first, p.a, p.d);
            self.graph.replace_edge(p.second, p.c, p.b);
            Ok(StepOutcome::Accepted)
        } else {
            self.push(&delta.negated())?;
            Ok(StepOutcome::Rejected)
        }
    }
}

/// Counts and trace from [`run_mcmc`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct McmcReport {
    pub steps: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub invalid: u64,
    pub trace: FitTrace,
}

impl McmcReport {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

/// Runs `steps` Metropolis–Hastings steps, sampling the trace at step 0, every
/// `trace_interval` steps (0 disables intermediate samples) and at the end.
pub fn run_mcmc<R: Rng>(
    state: &mut SyntheticState,
    steps: u64,
    trace_interval: u64,
    rng: &mut R,
) -> Result<McmcReport> {
    let mut report = McmcReport::default();
    report.trace.sample(0, state);
    for step in 1..=steps {
        match state.step(rng)? {
            StepOutcome::Accepted => report.accepted += 1,
            StepOutcome::Rejected => report.rejected += 1,
            StepOutcome::Invalid => report.invalid += 1,
        }
        report.steps = step;
        if step == steps || (trace_interval > 0 && step % trace_interval == 0) {
            report.trace.sample(step, state);
        }
    }
    Ok(report)
}
