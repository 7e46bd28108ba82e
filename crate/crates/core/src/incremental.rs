//! Incremental evaluation of query plans under weight deltas.
//!
//! An [`Evaluation`] holds, for every node of a plan, its current output and
//! whatever keyed state its operator needs to turn input deltas into output
//! deltas. Deltas are pushed through the plan in topological order; each
//! node drains all of its input changes before its consumers run.
//!
//! Stateful operators:
//!
//! * `join` keeps both inputs indexed by key, together with the denominator
//!   its current outputs were produced with. When a delta leaves
//!   `‖A_k‖ + ‖B_k‖` unchanged it emits only `a×Bᵀ + A×bᵀ + a×bᵀ` over that
//!   denominator; otherwise every output of the key is retracted and
//!   re-emitted at the new scale.
//! * `group_by` keeps each key's part and recomputes that key's prefix
//!   outputs, emitting the difference.
//! * `shave` keeps per-record weights; with a constant schedule only the
//!   indices at or above the smaller of the old and new weights change.
//! * `union` / `intersect` keep both input weights per record.
//!
//! Measurements attached to outputs get a [`DiscrepancyTracker`] maintaining
//! `‖Q(A) − m‖₁` as the output changes.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::dataset::{DeltaBatch, WeightedDataset, WEIGHT_EPSILON};
use crate::error::{Error, Result};
use crate::plan::{NodeId, Operator, QueryPlan};
use crate::privacy::Measurement;
use crate::record::Record;
use crate::transforms::{self, consolidate, Combiner, Mapper, Reducer, ShaveSchedule};

type Store = FxHashMap<Record, f64>;

/// Relative tolerance under which a join key's denominator counts as unchanged.
const DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// Adds `change` to `record`, pruning near-zero results; returns (old, new).
fn store_add(store: &mut Store, record: &Record, change: f64) -> (f64, f64) {
    match store.get_mut(record) {
        Some(w) => {
            let old = *w;
            let new = old + change;
            if new.abs() <= WEIGHT_EPSILON {
                store.remove(record);
                (old, 0.0)
            } else {
                *w = new;
                (old, new)
            }
        }
        None => {
            if change.abs() <= WEIGHT_EPSILON {
                (0.0, 0.0)
            } else {
                store.insert(record.clone(), change);
                (0.0, change)
            }
        }
    }
}

fn store_to_dataset(store: &Store) -> WeightedDataset {
    store.iter().map(|(r, w)| (r.clone(), *w)).collect()
}

/// Join state for one key.
#[derive(Clone, Debug, Default)]
pub struct JoinKeyState {
    left: Store,
    right: Store,
    left_norm: f64,
    right_norm: f64,
    /// Denominator of the outputs currently emitted for this key; zero when none are.
    denominator: f64,
}

impl JoinKeyState {
    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    fn cross(a: &Store, b: &Store, scale: f64, result: &Combiner, out: &mut Vec<(Record, f64)>) {
        for (x, wx) in a {
            for (y, wy) in b {
                out.push((result(x, y), wx * wy * scale));
            }
        }
    }

    fn cross_delta(
        a: &[(Record, f64)],
        b: &Store,
        scale: f64,
        result: &Combiner,
        out: &mut Vec<(Record, f64)>,
        flip: bool,
    ) {
        for (x, wx) in a {
            for (y, wy) in b {
                let r = if flip { result(y, x) } else { result(x, y) };
                out.push((r, wx * wy * scale));
            }
        }
    }

    fn apply(store: &mut Store, norm: &mut f64, delta: &[(Record, f64)]) {
        for (r, dw) in delta {
            let (old, new) = store_add(store, r, *dw);
            *norm += new.abs() - old.abs();
        }
        if store.is_empty() {
            *norm = 0.0;
        }
    }

    fn resync(&mut self) {
        self.left_norm = self.left.values().map(|w| w.abs()).sum();
        self.right_norm = self.right.values().map(|w| w.abs()).sum();
    }

    /// Applies deltas `a` (left) and `b` (right) for this key and appends the output delta.
    pub fn update(
        &mut self,
        a: &[(Record, f64)],
        b: &[(Record, f64)],
        result: &Combiner,
        out: &mut Vec<(Record, f64)>,
    ) {
        if a.is_empty() && b.is_empty() {
            return;
        }
        let old_den = self.denominator;
        let new_left: f64 = self.left_norm + norm_change(&self.left, a);
        let new_right: f64 = self.right_norm + norm_change(&self.right, b);
        let left_nonempty = survives(&self.left, a);
        let right_nonempty = survives(&self.right, b);
        let new_den = new_left + new_right;

        let unchanged = old_den > 0.0
            && left_nonempty
            && right_nonempty
            && (new_den - old_den).abs() <= DENOMINATOR_TOLERANCE * old_den;
        if unchanged {
            // A×bᵀ with the old left, then a×(B+b)ᵀ with the new right.
            let scale = 1.0 / old_den;
            Self::cross_delta(b, &self.left, scale, result, out, true);
            Self::apply(&mut self.right, &mut self.right_norm, b);
            Self::cross_delta(a, &self.right, scale, result, out, false);
            Self::apply(&mut self.left, &mut self.left_norm, a);
            return;
        }

        if old_den > 0.0 {
            Self::cross(&self.left, &self.right, -1.0 / old_den, result, out);
        }
        Self::apply(&mut self.left, &mut self.left_norm, a);
        Self::apply(&mut self.right, &mut self.right_norm, b);
        self.resync();
        if !self.left.is_empty() && !self.right.is_empty() {
            self.denominator = self.left_norm + self.right_norm;
            Self::cross(&self.left, &self.right, 1.0 / self.denominator, result, out);
        } else {
            self.denominator = 0.0;
        }
    }
}

fn norm_change(store: &Store, delta: &[(Record, f64)]) -> f64 {
    delta
        .iter()
        .map(|(r, dw)| {
            let old = store.get(r).copied().unwrap_or(0.0);
            let new = old + dw;
            let new = if new.abs() <= WEIGHT_EPSILON { 0.0 } else { new };
            new.abs() - old.abs()
        })
        .sum()
}

/// Whether the store stays nonempty after `delta` (which has no duplicate records).
fn survives(store: &Store, delta: &[(Record, f64)]) -> bool {
    let mut removed = 0;
    for (r, dw) in delta {
        let old = store.get(r).copied().unwrap_or(0.0);
        let new = old + dw;
        match (old != 0.0, new.abs() > WEIGHT_EPSILON) {
            (false, true) => return true,
            (true, false) => removed += 1,
            _ => {}
        }
    }
    store.len() > removed
}

#[derive(Clone)]
enum NodeState {
    Stateless,
    GroupBy {
        key: Mapper,
        reducer: Reducer,
        parts: FxHashMap<Record, Store>,
    },
    Shave {
        schedule: ShaveSchedule,
        weights: Store,
    },
    Join {
        key_left: Mapper,
        key_right: Mapper,
        result: Combiner,
        keys: FxHashMap<Record, JoinKeyState>,
    },
    Pointwise {
        left: Store,
        right: Store,
        take_max: bool,
    },
}

impl NodeState {
    fn for_operator(op: &Operator) -> NodeState {
        match op {
            Operator::GroupBy { key, reducer } => NodeState::GroupBy {
                key: key.clone(),
                reducer: reducer.clone(),
                parts: FxHashMap::default(),
            },
            Operator::Shave(schedule) => NodeState::Shave {
                schedule: schedule.clone(),
                weights: Store::default(),
            },
            Operator::Join {
                key_left,
                key_right,
                result,
            } => NodeState::Join {
                key_left: key_left.clone(),
                key_right: key_right.clone(),
                result: result.clone(),
                keys: FxHashMap::default(),
            },
            Operator::Union | Operator::Intersect => NodeState::Pointwise {
                left: Store::default(),
                right: Store::default(),
                take_max: matches!(op, Operator::Union),
            },
            _ => NodeState::Stateless,
        }
    }

    fn index_size(&self) -> usize {
        match self {
            NodeState::Stateless => 0,
            NodeState::GroupBy { parts, .. } => parts.values().map(Store::len).sum(),
            NodeState::Shave { weights, .. } => weights.len(),
            NodeState::Join { keys, .. } => keys.values().map(JoinKeyState::len).sum(),
            NodeState::Pointwise { left, right, .. } => left.len() + right.len(),
        }
    }
}

/// Running `‖Q(A) − m‖₁` for one measured output.
///
/// The sum ranges over every record with nonzero current weight or a
/// released noisy value. A record first looked up after attachment brings a
/// constant `|m(x)|` term with it; that term is added to the total but is not
/// part of the reported change, since it would have been present for every
/// candidate alike.
#[derive(Clone, Debug)]
pub struct DiscrepancyTracker {
    measurement: Arc<Measurement>,
    value: f64,
}

impl DiscrepancyTracker {
    /// Starts tracking `measurement` against the current output `current`.
    pub fn new(measurement: Arc<Measurement>, current: &WeightedDataset) -> Self {
        for (r, _) in current.iter() {
            measurement.lookup(r);
        }
        let value = Self::scratch(&measurement, current);
        DiscrepancyTracker { measurement, value }
    }

    /// From-scratch `‖Q(A) − m‖₁` over released records and the support of `output`.
    pub fn scratch(measurement: &Measurement, output: &WeightedDataset) -> f64 {
        let mut total = 0.0;
        for (r, m) in measurement.released() {
            total += (output.weight_of(&r) - m).abs();
        }
        for (r, q) in output.iter() {
            if measurement.peek(r).is_none() {
                total += q.abs();
            }
        }
        total
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn measurement(&self) -> &Arc<Measurement> {
        &self.measurement
    }

    pub fn epsilon(&self) -> f64 {
        self.measurement.epsilon()
    }

    /// Records a change of `record` from `old` to `new`; returns the score-relevant change.
    fn observe(&mut self, record: &Record, old: f64, new: f64) -> f64 {
        let (m, fresh) = self.measurement.lookup_tracked(record);
        if fresh {
            self.value += (old - m).abs();
        }
        let change = (new - m).abs() - (old - m).abs();
        self.value += change;
        change
    }
}

/// Result of one [`Evaluation::propagate`] call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Propagation {
    /// Change in each attached tracker, in attachment order.
    pub discrepancy: Vec<f64>,
    /// Output records changed per node, indexed by node id.
    pub touched: Vec<usize>,
}

impl Propagation {
    pub fn total_touched(&self) -> usize {
        self.touched.iter().sum()
    }
}

/// Live evaluation state of one plan.
#[derive(Clone)]
pub struct Evaluation {
    plan: Arc<QueryPlan>,
    outputs: Vec<Store>,
    states: Vec<NodeState>,
    trackers: Vec<(String, NodeId, DiscrepancyTracker)>,
}

impl Evaluation {
    /// Empty state: every input, and hence every node, is empty.
    pub fn new(plan: Arc<QueryPlan>) -> Self {
        let states = (0..plan.len())
            .map(|i| NodeState::for_operator(&plan.node(NodeId(i)).op))
            .collect();
        Evaluation {
            outputs: vec![Store::default(); plan.len()],
            states,
            trackers: Vec::new(),
            plan,
        }
    }

    /// Loads every declared input by propagating it as a single delta.
    pub fn initialize(
        plan: Arc<QueryPlan>,
        inputs: &std::collections::BTreeMap<String, WeightedDataset>,
    ) -> Result<Self> {
        let mut eval = Evaluation::new(plan.clone());
        for name in plan.declared_inputs() {
            let data = inputs.get(name).ok_or_else(|| Error::MissingInput(name.clone()))?;
            eval.propagate(name, &DeltaBatch::from(data))?;
        }
        Ok(eval)
    }

    pub fn plan(&self) -> &Arc<QueryPlan> {
        &self.plan
    }

    /// Attaches a measurement to the named output and returns the tracker's index.
    pub fn attach(&mut self, output: &str, measurement: Arc<Measurement>) -> Result<usize> {
        let node = self
            .plan
            .output_node(output)
            .ok_or_else(|| Error::InvalidPlan(format!("no output named {output}")))?;
        let tracker = DiscrepancyTracker::new(measurement, &self.node_output(node));
        self.trackers.push((output.to_string(), node, tracker));
        Ok(self.trackers.len() - 1)
    }

    pub fn trackers(&self) -> impl Iterator<Item = (&str, &DiscrepancyTracker)> + '_ {
        self.trackers.iter().map(|(name, _, t)| (name.as_str(), t))
    }

    pub fn tracker(&self, index: usize) -> &DiscrepancyTracker {
        &self.trackers[index].2
    }

    pub fn node_output(&self, node: NodeId) -> WeightedDataset {
        store_to_dataset(&self.outputs[node.0])
    }

    /// Current weight of `record` at `node`.
    pub fn weight_at(&self, node: NodeId, record: &Record) -> f64 {
        self.outputs[node.0].get(record).copied().unwrap_or(0.0)
    }

    pub fn output(&self, name: &str) -> Option<WeightedDataset> {
        self.plan.output_node(name).map(|id| self.node_output(id))
    }

    /// Per-node (label, indexed state entries, output entries).
    pub fn index_sizes(&self) -> Vec<(String, usize, usize)> {
        (0..self.plan.len())
            .map(|i| {
                (
                    self.plan.node(NodeId(i)).label.clone(),
                    self.states[i].index_size(),
                    self.outputs[i].len(),
                )
            })
            .collect()
    }

    /// Pushes `delta` on input `input` through the plan.
    pub fn propagate(&mut self, input: &str, delta: &DeltaBatch) -> Result<Propagation> {
        let plan = self.plan.clone();
        if !plan.declared_inputs().iter().any(|i| i == input) {
            return Err(Error::UnknownInput(input.to_string()));
        }
        let mut report = Propagation {
            discrepancy: vec![0.0; self.trackers.len()],
            touched: vec![0; plan.len()],
        };
        if delta.is_empty() {
            return Ok(report);
        }
        for (r, w) in delta.iter() {
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight {
                    record: r.encode(),
                    value: w,
                });
            }
        }
        let input_delta: Vec<(Record, f64)> = delta.iter().map(|(r, w)| (r.clone(), w)).collect();
        let mut deltas: Vec<Option<Vec<(Record, f64)>>> = vec![None; plan.len()];

        for &id in plan.topological_order() {
            let node = plan.node(id);
            let mut out = match &node.op {
                Operator::Input(name) => {
                    if name != input {
                        continue;
                    }
                    input_delta.clone()
                }
                op => {
                    let empty: &[(Record, f64)] = &[];
                    let args: Vec<&[(Record, f64)]> = node
                        .inputs
                        .iter()
                        .map(|src| deltas[src.0].as_deref().unwrap_or(empty))
                        .collect();
                    if args.iter().all(|a| a.is_empty()) {
                        continue;
                    }
                    Self::step(op, &mut self.states[id.0], &args)
                }
            };
            consolidate(&mut out);
            if out.is_empty() {
                continue;
            }
            let store = &mut self.outputs[id.0];
            let mut changed = Vec::with_capacity(out.len());
            for (r, dw) in &out {
                let (old, new) = store_add(store, r, *dw);
                changed.push((old, new));
            }
            report.touched[id.0] = out.len();
            for (t, (_, node_id, tracker)) in self.trackers.iter_mut().enumerate() {
                if *node_id == id {
                    for ((r, _), (old, new)) in out.iter().zip(&changed) {
                        report.discrepancy[t] += tracker.observe(r, *old, *new);
                    }
                }
            }
            deltas[id.0] = Some(out);
        }
        Ok(report)
    }

    fn step(op: &Operator, state: &mut NodeState, args: &[&[(Record, f64)]]) -> Vec<(Record, f64)> {
        match (op, state) {
            (Operator::Select(f), _) => args[0].iter().map(|(r, w)| (f(r), *w)).collect(),
            (Operator::Where(p), _) => args[0].iter().filter(|(r, _)| p(r)).cloned().collect(),
            (Operator::SelectMany(f), _) => {
                let mut out = Vec::new();
                for (r, w) in args[0] {
                    out.extend(
                        transforms::select_many_scaled(f(r))
                            .into_iter()
                            .map(|(x, v)| (x, v * w)),
                    );
                }
                out
            }
            (Operator::Concat, _) => args[0].iter().chain(args[1]).cloned().collect(),
            (Operator::Except, _) => args[0]
                .iter()
                .cloned()
                .chain(args[1].iter().map(|(r, w)| (r.clone(), -w)))
                .collect(),
            (_, NodeState::Pointwise { left, right, take_max }) => {
                let combine = |x: f64, y: f64| if *take_max { x.max(y) } else { x.min(y) };
                let mut touched: Vec<&Record> = args[0].iter().chain(args[1]).map(|(r, _)| r).collect();
                touched.sort();
                touched.dedup();
                let old: Vec<f64> = touched
                    .iter()
                    .map(|r| combine(weight(left, r), weight(right, r)))
                    .collect();
                for (r, dw) in args[0] {
                    store_add(left, r, *dw);
                }
                for (r, dw) in args[1] {
                    store_add(right, r, *dw);
                }
                touched
                    .into_iter()
                    .zip(old)
                    .map(|(r, o)| (r.clone(), combine(weight(left, r), weight(right, r)) - o))
                    .collect()
            }
            (_, NodeState::Shave { schedule, weights }) => {
                let mut out = Vec::new();
                for (r, dw) in args[0] {
                    let (old, new) = store_add(weights, r, *dw);
                    let start = match schedule {
                        ShaveSchedule::Constant(c) => ((old.min(new) / *c).floor() as u64).saturating_sub(1),
                        ShaveSchedule::PerRecord(_) => 0,
                    };
                    for (x, w) in transforms::shave_outputs_from(r, old, schedule, start) {
                        out.push((x, -w));
                    }
                    out.extend(transforms::shave_outputs_from(r, new, schedule, start));
                }
                out
            }
            (_, NodeState::GroupBy { key, reducer, parts }) => {
                let mut by_key: std::collections::BTreeMap<Record, Vec<&(Record, f64)>> = Default::default();
                for item in args[0] {
                    by_key.entry(key(&item.0)).or_default().push(item);
                }
                let mut out = Vec::new();
                for (k, items) in by_key {
                    let part = parts.entry(k.clone()).or_default();
                    let before: Vec<(Record, f64)> = part.iter().map(|(r, w)| (r.clone(), *w)).collect();
                    for (r, dw) in items {
                        store_add(part, r, *dw);
                    }
                    let after: Vec<(Record, f64)> = part.iter().map(|(r, w)| (r.clone(), *w)).collect();
                    if part.is_empty() {
                        parts.remove(&k);
                    }
                    for (x, w) in transforms::group_outputs(&k, &before, |g| reducer(g)) {
                        out.push((x, -w));
                    }
                    out.extend(transforms::group_outputs(&k, &after, |g| reducer(g)));
                }
                out
            }
            (
                _,
                NodeState::Join {
                    key_left,
                    key_right,
                    result,
                    keys,
                },
            ) => {
                let mut by_key: std::collections::BTreeMap<Record, (transforms::Part, transforms::Part)> =
                    Default::default();
                for (r, w) in args[0] {
                    by_key.entry(key_left(r)).or_default().0.push((r.clone(), *w));
                }
                for (r, w) in args[1] {
                    by_key.entry(key_right(r)).or_default().1.push((r.clone(), *w));
                }
                let mut out = Vec::new();
                for (k, (a, b)) in by_key {
                    let state = keys.entry(k.clone()).or_default();
                    state.update(&a, &b, result, &mut out);
                    if state.is_empty() {
                        keys.remove(&k);
                    }
                }
                out
            }
            (op, _) => unreachable!("operator {op:?} has no matching state"),
        }
    }
}

fn weight(store: &Store, record: &Record) -> f64 {
    store.get(record).copied().unwrap_or(0.0)
}
