//! Simple undirected graphs and their edge-record encodings.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::record::Record;

/// How an undirected graph is presented as the protected `edges` input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Symmetrization {
    /// Each undirected edge appears once; plans symmetrize with `Concat` of the transpose,
    /// which doubles every use of the input.
    RawUndirected,
    /// Both orientations are registered as the protected input.
    #[default]
    SymmetricDirected,
}

impl Symmetrization {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetrization::RawUndirected => "raw-undirected",
            Symmetrization::SymmetricDirected => "symmetric-directed",
        }
    }
}

impl fmt::Display for Symmetrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw-undirected" => Ok(Symmetrization::RawUndirected),
            "symmetric-directed" => Ok(Symmetrization::SymmetricDirected),
            other => Err(Error::InvalidArgument(format!("unknown symmetrization policy {other}"))),
        }
    }
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Undirected simple graph over nodes `0..num_nodes`.
///
/// Edges are stored once as `(min, max)` in insertion order, with an index
/// for constant-time membership tests, removal and uniform sampling.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(u32, u32)>,
    index: FxHashMap<(u32, u32), usize>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes && self.edge_set() == other.edge_set()
    }
}

impl Graph {
    pub fn new(num_nodes: usize) -> Self {
        Graph {
            num_nodes,
            ..Default::default()
        }
    }

    /// Builds a graph, silently dropping self-loops and repeated edges.
    pub fn from_edges<I: IntoIterator<Item = (u32, u32)>>(edges: I) -> Self {
        let mut g = Graph::new(0);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> (u32, u32) {
        self.edges[i]
    }

    /// Sorted edge list, independent of insertion order.
    pub fn edge_set(&self) -> Vec<(u32, u32)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.index.contains_key(&ordered(a, b))
    }

    /// Inserts `{a, b}`; returns false for self-loops and edges already present.
    pub fn add_edge(&mut self, a: u32, b: u32) -> bool {
        if a == b {
            return false;
        }
        let e = ordered(a, b);
        if self.index.contains_key(&e) {
            return false;
        }
        self.num_nodes = self.num_nodes.max(e.1 as usize + 1);
        self.index.insert(e, self.edges.len());
        self.edges.push(e);
        true
    }

    pub fn remove_edge(&mut self, a: u32, b: u32) -> bool {
        let Some(i) = self.index.remove(&ordered(a, b)) else {
            return false;
        };
        self.edges.swap_remove(i);
        if i < self.edges.len() {
            self.index.insert(self.edges[i], i);
        }
        true
    }

    /// Replaces the edge at position `i` with `{a, b}` in place.
    pub fn replace_edge(&mut self, i: usize, a: u32, b: u32) {
        let old = self.edges[i];
        self.index.remove(&old);
        let e = ordered(a, b);
        debug_assert!(a != b && !self.index.contains_key(&e));
        self.num_nodes = self.num_nodes.max(e.1 as usize + 1);
        self.edges[i] = e;
        self.index.insert(e, i);
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.num_nodes];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    /// Degree multiset, sorted non-increasing, zeros dropped.
    pub fn degree_sequence(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.degrees().into_iter().filter(|&x| x > 0).collect();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// Edge records carrying unit weight under `policy`.
    pub fn to_dataset(&self, policy: Symmetrization) -> WeightedDataset {
        let mut ds = WeightedDataset::new();
        for &(a, b) in &self.edges {
            for r in edge_records(a, b, policy) {
                ds.add(r, 1.0);
            }
        }
        ds
    }

    /// Reads `src dst` pairs, one per line; `#` starts a comment.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
        let mut g = Graph::new(0);
        let mut dropped = 0usize;
        for (number, line) in input.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let mut id = || -> Result<u32> {
                let text = fields
                    .next()
                    .ok_or_else(|| Error::Parse(format!("edge list line {}: expected two node ids", number + 1)))?;
                text.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("edge list line {}: bad node id {text:?}", number + 1)))
            };
            let a = id()?;
            let b = id()?;
            if !g.add_edge(a, b) {
                dropped += 1;
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} self-loops or repeated edges while reading edge list");
        }
        Ok(g)
    }

    /// Writes one `a b` line per undirected edge, sorted.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (a, b) in self.edge_set() {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }
}

/// The directed records that represent undirected edge `{a, b}` under `policy`.
pub fn edge_records(a: u32, b: u32, policy: Symmetrization) -> Vec<Record> {
    let (a, b) = ordered(a, b);
    match policy {
        Symmetrization::RawUndirected => vec![Record::edge(a, b)],
        Symmetrization::SymmetricDirected => vec![Record::edge(a, b), Record::edge(b, a)],
    }
}
