//! Query plans: acyclic operator graphs rooted at named inputs.
//!
//! A [`PlanDescription`] is a plain list of operator nodes that reference
//! their producers by index; [`QueryPlan::build`] validates it (arity,
//! dangling references, undeclared inputs, cycles, unreachable outputs). Most
//! callers use [`PlanBuilder`], whose methods append nodes and return ids.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::record::Record;
use crate::transforms::{self, Combiner, Expander, Mapper, Predicate, Reducer, ShaveSchedule};

/// Index of a node within its plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone)]
pub enum Operator {
    Input(String),
    Select(Mapper),
    Where(Predicate),
    SelectMany(Expander),
    GroupBy {
        key: Mapper,
        reducer: Reducer,
    },
    Shave(ShaveSchedule),
    Join {
        key_left: Mapper,
        key_right: Mapper,
        result: Combiner,
    },
    Union,
    Intersect,
    Concat,
    Except,
}

impl Operator {
    pub fn arity(&self) -> usize {
        match self {
            Operator::Input(_) => 0,
            Operator::Select(_)
            | Operator::Where(_)
            | Operator::SelectMany(_)
            | Operator::GroupBy { .. }
            | Operator::Shave(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Operator::Input(_) => "input",
            Operator::Select(_) => "select",
            Operator::Where(_) => "where",
            Operator::SelectMany(_) => "select_many",
            Operator::GroupBy { .. } => "group_by",
            Operator::Shave(_) => "shave",
            Operator::Join { .. } => "join",
            Operator::Union => "union",
            Operator::Intersect => "intersect",
            Operator::Concat => "concat",
            Operator::Except => "except",
        }
    }

    /// Batch semantics of this operator applied to already-evaluated producers.
    pub fn apply(&self, args: &[&WeightedDataset]) -> WeightedDataset {
        match self {
            Operator::Input(_) => unreachable!("input nodes are bound, not applied"),
            Operator::Select(f) => transforms::select(args[0], |r| f(r)),
            Operator::Where(p) => transforms::filter(args[0], |r| p(r)),
            Operator::SelectMany(f) => transforms::select_many(args[0], |r| f(r)),
            Operator::GroupBy { key, reducer } => transforms::group_by(args[0], |r| key(r), |g| reducer(g)),
            Operator::Shave(schedule) => transforms::shave(args[0], schedule),
            Operator::Join {
                key_left,
                key_right,
                result,
            } => transforms::join(args[0], args[1], |r| key_left(r), |r| key_right(r), |x, y| result(x, y)),
            Operator::Union => transforms::union(args[0], args[1]),
            Operator::Intersect => transforms::intersect(args[0], args[1]),
            Operator::Concat => transforms::concat(args[0], args[1]),
            Operator::Except => transforms::except(args[0], args[1]),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Input(name) => write!(f, "input({name})"),
            Operator::Shave(s) => write!(f, "shave({s:?})"),
            other => f.write_str(other.kind()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub label: String,
    pub op: Operator,
    pub inputs: Vec<NodeId>,
}

/// Unvalidated plan: declared input names, nodes, and named aggregation outputs.
#[derive(Clone, Debug, Default)]
pub struct PlanDescription {
    pub inputs: Vec<String>,
    pub nodes: Vec<NodeSpec>,
    pub outputs: Vec<(String, NodeId)>,
}

/// Appends nodes to a [`PlanDescription`].
#[derive(Clone, Debug, Default)]
pub struct PlanBuilder {
    desc: PlanDescription,
}

impl PlanBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, label: &str, op: Operator, inputs: Vec<NodeId>) -> NodeId {
        self.desc.nodes.push(NodeSpec {
            label: label.to_string(),
            op,
            inputs,
        });
        NodeId(self.desc.nodes.len() - 1)
    }

    /// Declares `name` as a protected input and returns its node.
    pub fn input(&mut self, name: &str) -> NodeId {
        if !self.desc.inputs.iter().any(|n| n == name) {
            self.desc.inputs.push(name.to_string());
        }
        self.push(name, Operator::Input(name.to_string()), vec![])
    }

    pub fn select<F>(&mut self, label: &str, src: NodeId, f: F) -> NodeId
    where
        F: Fn(&Record) -> Record + Send + Sync + 'static,
    {
        self.push(label, Operator::Select(Arc::new(f)), vec![src])
    }

    pub fn filter<P>(&mut self, label: &str, src: NodeId, p: P) -> NodeId
    where
        P: Fn(&Record) -> bool + Send + Sync + 'static,
    {
        self.push(label, Operator::Where(Arc::new(p)), vec![src])
    }

    pub fn select_many<F>(&mut self, label: &str, src: NodeId, f: F) -> NodeId
    where
        F: Fn(&Record) -> Vec<(Record, f64)> + Send + Sync + 'static,
    {
        self.push(label, Operator::SelectMany(Arc::new(f)), vec![src])
    }

    pub fn group_by<K, R>(&mut self, label: &str, src: NodeId, key: K, reducer: R) -> NodeId
    where
        K: Fn(&Record) -> Record + Send + Sync + 'static,
        R: Fn(&[Record]) -> Record + Send + Sync + 'static,
    {
        let op = Operator::GroupBy {
            key: Arc::new(key),
            reducer: Arc::new(reducer),
        };
        self.push(label, op, vec![src])
    }

    pub fn shave(&mut self, label: &str, src: NodeId, schedule: ShaveSchedule) -> NodeId {
        self.push(label, Operator::Shave(schedule), vec![src])
    }

    pub fn join<KL, KR, C>(
        &mut self,
        label: &str,
        left: NodeId,
        right: NodeId,
        key_left: KL,
        key_right: KR,
        result: C,
    ) -> NodeId
    where
        KL: Fn(&Record) -> Record + Send + Sync + 'static,
        KR: Fn(&Record) -> Record + Send + Sync + 'static,
        C: Fn(&Record, &Record) -> Record + Send + Sync + 'static,
    {
        let op = Operator::Join {
            key_left: Arc::new(key_left),
            key_right: Arc::new(key_right),
            result: Arc::new(result),
        };
        self.push(label, op, vec![left, right])
    }

    pub fn union(&mut self, label: &str, a: NodeId, b: NodeId) -> NodeId {
        self.push(label, Operator::Union, vec![a, b])
    }

    pub fn intersect(&mut self, label: &str, a: NodeId, b: NodeId) -> NodeId {
        self.push(label, Operator::Intersect, vec![a, b])
    }

    pub fn concat(&mut self, label: &str, a: NodeId, b: NodeId) -> NodeId {
        self.push(label, Operator::Concat, vec![a, b])
    }

    pub fn except(&mut self, label: &str, a: NodeId, b: NodeId) -> NodeId {
        self.push(label, Operator::Except, vec![a, b])
    }

    /// Marks `node` as an aggregation point measured under `name`.
    pub fn output(&mut self, name: &str, node: NodeId) {
        self.desc.outputs.push((name.to_string(), node));
    }

    pub fn description(&self) -> &PlanDescription {
        &self.desc
    }

    pub fn into_description(self) -> PlanDescription {
        self.desc
    }

    pub fn build(self) -> Result<QueryPlan> {
        QueryPlan::build(self.desc)
    }
}

/// A validated, acyclic plan.
#[derive(Clone, Debug)]
pub struct QueryPlan {
    nodes: Vec<NodeSpec>,
    order: Vec<NodeId>,
    consumers: Vec<Vec<NodeId>>,
    outputs: Vec<(String, NodeId)>,
    inputs: Vec<String>,
}

impl QueryPlan {
    pub fn build(desc: PlanDescription) -> Result<QueryPlan> {
        let n = desc.nodes.len();
        let declared: BTreeSet<&str> = desc.inputs.iter().map(String::as_str).collect();
        let mut consumers = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (i, node) in desc.nodes.iter().enumerate() {
            if node.inputs.len() != node.op.arity() {
                return Err(Error::InvalidPlan(format!(
                    "node {i} ({}) expects {} inputs, has {}",
                    node.op.kind(),
                    node.op.arity(),
                    node.inputs.len()
                )));
            }
            if let Operator::Input(name) = &node.op {
                if !declared.contains(name.as_str()) {
                    return Err(Error::InvalidPlan(format!("node {i} reads undeclared input {name}")));
                }
            }
            for src in &node.inputs {
                if src.0 >= n {
                    return Err(Error::InvalidPlan(format!(
                        "node {i} references missing node {}",
                        src.0
                    )));
                }
                consumers[src.0].push(NodeId(i));
                indegree[i] += 1;
            }
        }

        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(NodeId(i));
            for c in &consumers[i] {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    queue.push_back(c.0);
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidPlan("operator graph contains a cycle".into()));
        }

        let plan = QueryPlan {
            nodes: desc.nodes,
            order,
            consumers,
            outputs: desc.outputs,
            inputs: desc.inputs,
        };
        let mut names = BTreeSet::new();
        for (name, node) in &plan.outputs {
            if node.0 >= n {
                return Err(Error::InvalidPlan(format!(
                    "output {name} references missing node {}",
                    node.0
                )));
            }
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidPlan(format!("duplicate output name {name}")));
            }
            let reachable: u64 = plan.inputs.iter().map(|i| plan.paths_to_input(*node, i)).sum();
            if reachable == 0 {
                return Err(Error::InvalidPlan(format!(
                    "output {name} is not reachable from any input"
                )));
            }
        }
        Ok(plan)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &NodeSpec {
        &self.nodes[id.0]
    }

    /// Nodes in a topological order (producers before consumers).
    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn consumers(&self, id: NodeId) -> &[NodeId] {
        &self.consumers[id.0]
    }

    pub fn outputs(&self) -> &[(String, NodeId)] {
        &self.outputs
    }

    pub fn output_node(&self, name: &str) -> Option<NodeId> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, id)| *id)
    }

    pub fn declared_inputs(&self) -> &[String] {
        &self.inputs
    }

    /// Input nodes bound to `name`.
    pub fn input_nodes(&self, name: &str) -> Vec<NodeId> {
        self.order
            .iter()
            .copied()
            .filter(|id| matches!(&self.nodes[id.0].op, Operator::Input(n) if n == name))
            .collect()
    }

    /// Number of distinct producer paths from `from` back to input `name`.
    fn paths_to_input(&self, from: NodeId, name: &str) -> u64 {
        let mut counts = vec![0u64; self.nodes.len()];
        for id in &self.order {
            let node = &self.nodes[id.0];
            counts[id.0] = match &node.op {
                Operator::Input(n) => u64::from(n == name),
                _ => node.inputs.iter().map(|src| counts[src.0]).sum(),
            };
        }
        counts[from.0]
    }

    /// How many times the measurement `output` uses input `input`.
    ///
    /// This is the number of paths from the aggregation node to references of
    /// the input; a self-join counts both sides.
    pub fn uses(&self, output: &str, input: &str) -> Result<u64> {
        if !self.inputs.iter().any(|i| i == input) {
            return Err(Error::UnknownInput(input.to_string()));
        }
        let node = self
            .output_node(output)
            .ok_or_else(|| Error::InvalidPlan(format!("no output named {output}")))?;
        Ok(self.paths_to_input(node, input))
    }

    /// Uses of `input` summed over every output of the plan.
    pub fn count_uses(&self, input: &str) -> Result<u64> {
        let mut total = 0;
        for (name, _) in &self.outputs {
            total += self.uses(name, input)?;
        }
        Ok(total)
    }

    /// Reference batch evaluation of every node.
    pub fn evaluate(&self, inputs: &BTreeMap<String, WeightedDataset>) -> Result<Vec<WeightedDataset>> {
        let mut values: Vec<Option<WeightedDataset>> = vec![None; self.nodes.len()];
        for id in &self.order {
            let node = &self.nodes[id.0];
            let value = match &node.op {
                Operator::Input(name) => inputs
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::MissingInput(name.clone()))?,
                op => {
                    let args: Vec<&WeightedDataset> =
                        node.inputs.iter().map(|src| values[src.0].as_ref().unwrap()).collect();
                    op.apply(&args)
                }
            };
            values[id.0] = Some(value);
        }
        Ok(values.into_iter().map(Option::unwrap).collect())
    }

    /// Reference evaluation of the named outputs only.
    pub fn evaluate_outputs(
        &self,
        inputs: &BTreeMap<String, WeightedDataset>,
    ) -> Result<BTreeMap<String, WeightedDataset>> {
        let values = self.evaluate(inputs)?;
        Ok(self
            .outputs
            .iter()
            .map(|(name, id)| (name.clone(), values[id.0].clone()))
            .collect())
    }
}

impl fmt::Display for QueryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for id in &self.order {
            let node = &self.nodes[id.0];
            write!(f, "{id} {:?} \"{}\"", node.op, node.label)?;
            if !node.inputs.is_empty() {
                let srcs: Vec<String> = node.inputs.iter().map(|s| s.to_string()).collect();
                write!(f, " <- {}", srcs.join(", "))?;
            }
            writeln!(f)?;
        }
        for (name, id) in &self.outputs {
            writeln!(f, "output {name} = {id}")?;
        }
        Ok(())
    }
}
