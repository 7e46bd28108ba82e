//! Graph analyses as query plans over the protected `edges` input.
//!
//! Record shapes used throughout:
//!
//! * edges: `Edge(a, b)`, unit weight, both orientations present once symmetrized;
//! * degrees: `(Node v, Int d)` at weight ½;
//! * length-two paths: `(Node a, Node b, Node c)` with `a ≠ c`, weight `1/(2d_b)`;
//! * degree tuples: sorted `Int` tuples.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::plan::{NodeId, PlanBuilder, QueryPlan};
use crate::record::Record;
use crate::transforms::ShaveSchedule;

use super::graph::Symmetrization;

/// Name of the protected input every graph plan reads.
pub const EDGES: &str = "edges";

/// Record measured by the triangles-by-intersect query.
pub const TRIANGLE_TOKEN: &str = "triangle!";
/// Record measured by the node-count query.
pub const NODES_TOKEN: &str = "nodes";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphQuery {
    /// Degree CCDF: record `i` weighs `|{v : d_v > i}|`.
    Ccdf,
    /// Non-increasing degree sequence: record `j` weighs the `j`-th largest degree.
    DegreeSequence,
    /// One record per node, weight ½.
    Nodes,
    /// Single `"nodes"` record weighing half the node count.
    NodeCount,
    /// Joint degree distribution.
    Jdd,
    /// Triangles by degree with degrees bucketed by `⌊d/k⌋`.
    Tbd { bucket: u32 },
    /// Squares by degree.
    Sbd,
    /// Triangles by intersect.
    Tbi,
}

impl GraphQuery {
    /// Stable identifier, used as the plan output name and measurement id.
    pub fn id(&self) -> String {
        match self {
            GraphQuery::Ccdf => "ccdf".into(),
            GraphQuery::DegreeSequence => "degseq".into(),
            GraphQuery::Nodes => "nodes".into(),
            GraphQuery::NodeCount => "nodecount".into(),
            GraphQuery::Jdd => "jdd".into(),
            GraphQuery::Tbd { bucket: 1 } => "tbd".into(),
            GraphQuery::Tbd { bucket } => format!("tbd-k{bucket}"),
            GraphQuery::Sbd => "sbd".into(),
            GraphQuery::Tbi => "tbi".into(),
        }
    }

    /// Appends this query's operators reading `edges` and returns its result node.
    pub fn add_to(&self, b: &mut PlanBuilder, edges: NodeId) -> NodeId {
        match *self {
            GraphQuery::Ccdf => ccdf(b, edges),
            GraphQuery::DegreeSequence => {
                let c = ccdf(b, edges);
                let shaved = b.shave("degseq.shave", c, ShaveSchedule::Constant(1.0));
                b.select("degseq", shaved, index_of)
            }
            GraphQuery::Nodes => nodes(b, edges),
            GraphQuery::NodeCount => {
                let n = nodes(b, edges);
                b.select("nodecount", n, |_| Record::str(NODES_TOKEN))
            }
            GraphQuery::Jdd => jdd(b, edges),
            GraphQuery::Tbd { bucket } => tbd(b, edges, bucket),
            GraphQuery::Sbd => sbd(b, edges),
            GraphQuery::Tbi => tbi(b, edges),
        }
    }
}

impl fmt::Display for GraphQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for GraphQuery {
    type Err = Error;

    /// Accepts the ids produced by [`GraphQuery::id`]; `tbd` alone means `k = 1`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ccdf" => GraphQuery::Ccdf,
            "degseq" => GraphQuery::DegreeSequence,
            "nodes" => GraphQuery::Nodes,
            "nodecount" => GraphQuery::NodeCount,
            "jdd" => GraphQuery::Jdd,
            "tbd" => GraphQuery::Tbd { bucket: 1 },
            "sbd" => GraphQuery::Sbd,
            "tbi" => GraphQuery::Tbi,
            other => {
                let k = other
                    .strip_prefix("tbd-k")
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown graph query {other}")))?;
                GraphQuery::Tbd { bucket: k }
            }
        })
    }
}

/// The input node, symmetrized in-plan under [`Symmetrization::RawUndirected`].
pub fn edges_node(b: &mut PlanBuilder, policy: Symmetrization) -> NodeId {
    let input = b.input(EDGES);
    match policy {
        Symmetrization::SymmetricDirected => input,
        Symmetrization::RawUndirected => {
            let transpose = b.select("edges.transpose", input, |r| {
                let (a, c) = r.as_edge().expect("edge record");
                Record::edge(c, a)
            });
            b.concat("edges.symmetric", transpose, input)
        }
    }
}

/// One plan measuring each query in `queries`, outputs named by [`GraphQuery::id`].
pub fn graph_plan(queries: &[GraphQuery], policy: Symmetrization) -> Result<QueryPlan> {
    let mut b = PlanBuilder::new();
    let edges = edges_node(&mut b, policy);
    for q in queries {
        let out = q.add_to(&mut b, edges);
        b.output(&q.id(), out);
    }
    b.build()
}

pub fn degree_ccdf_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::Ccdf], policy).expect("well-formed plan")
}

pub fn degree_sequence_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::DegreeSequence], policy).expect("well-formed plan")
}

pub fn nodes_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::Nodes], policy).expect("well-formed plan")
}

pub fn node_count_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::NodeCount], policy).expect("well-formed plan")
}

pub fn jdd_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::Jdd], policy).expect("well-formed plan")
}

pub fn tbd_plan(bucket: u32, policy: Symmetrization) -> QueryPlan {
    assert!(bucket >= 1, "bucket width must be positive");
    graph_plan(&[GraphQuery::Tbd { bucket }], policy).expect("well-formed plan")
}

pub fn sbd_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::Sbd], policy).expect("well-formed plan")
}

pub fn tbi_plan(policy: Symmetrization) -> QueryPlan {
    graph_plan(&[GraphQuery::Tbi], policy).expect("well-formed plan")
}

fn src_node(r: &Record) -> Record {
    Record::node(r.as_edge().expect("edge record").0)
}

fn index_of(r: &Record) -> Record {
    Record::int(r.as_indexed().expect("indexed record").1 as i64)
}

fn rotate(path: &Record) -> Record {
    let p = path.as_tuple().expect("path tuple");
    let mut items: Vec<Record> = p[1..].to_vec();
    items.push(p[0].clone());
    Record::tuple(items)
}

fn sorted_ints(items: &[&Record]) -> Record {
    let mut v: Vec<Record> = items.iter().map(|r| (*r).clone()).collect();
    v.sort();
    Record::tuple(v)
}

fn ccdf(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let src = b.select("ccdf.src", edges, src_node);
    let shaved = b.shave("ccdf.shave", src, ShaveSchedule::Constant(1.0));
    b.select("ccdf", shaved, index_of)
}

fn nodes(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let ends = b.select_many("nodes.endpoints", edges, |r| {
        let (a, c) = r.as_edge().expect("edge record");
        vec![(Record::node(a), 1.0), (Record::node(c), 1.0)]
    });
    let shaved = b.shave("nodes.shave", ends, ShaveSchedule::Constant(0.5));
    let first = b.filter("nodes.first", shaved, |r| {
        r.as_indexed().expect("indexed record").1 == 0
    });
    b.select("nodes", first, |r| r.as_indexed().expect("indexed record").0.clone())
}

/// `(Node v, Int ⌊d_v / k⌋)` at weight ½.
fn degrees(b: &mut PlanBuilder, edges: NodeId, bucket: u32) -> NodeId {
    b.group_by("degs", edges, src_node, move |group| {
        Record::int((group.len() as u32 / bucket) as i64)
    })
}

/// Length-two paths `(a, b, c)`, `a ≠ c`.
fn paths(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let joined = b.join(
        "paths.join",
        edges,
        edges,
        |x| Record::node(x.as_edge().expect("edge record").1),
        src_node,
        |x, y| {
            let (a, m) = x.as_edge().expect("edge record");
            let (_, c) = y.as_edge().expect("edge record");
            Record::tuple([Record::node(a), Record::node(m), Record::node(c)])
        },
    );
    b.filter("paths", joined, |p| p.field(0) != p.field(2))
}

/// `((a, b, c), d_b)` at weight `1/(2d_b²)`.
fn paths_with_middle_degree(b: &mut PlanBuilder, edges: NodeId, bucket: u32) -> NodeId {
    let p = paths(b, edges);
    let d = degrees(b, edges, bucket);
    b.join(
        "abc",
        p,
        d,
        |path| path.field(1).clone(),
        |deg| deg.field(0).clone(),
        |path, deg| Record::pair(path.clone(), deg.field(1).clone()),
    )
}

fn rotate_path_record(r: &Record) -> Record {
    Record::pair(rotate(r.field(0)), r.field(1).clone())
}

fn tbd(b: &mut PlanBuilder, edges: NodeId, bucket: u32) -> NodeId {
    let abc = paths_with_middle_degree(b, edges, bucket);
    let bca = b.select("bca", abc, rotate_path_record);
    let cab = b.select("cab", bca, rotate_path_record);
    let first = b.join(
        "tbd.pair",
        abc,
        bca,
        |x| x.field(0).clone(),
        |y| y.field(0).clone(),
        |x, y| Record::pair(x.field(0).clone(), Record::pair(x.field(1).clone(), y.field(1).clone())),
    );
    let tris = b.join(
        "tris",
        first,
        cab,
        |x| x.field(0).clone(),
        |y| y.field(0).clone(),
        |x, y| {
            let d = x.field(1);
            Record::tuple([d.field(0).clone(), d.field(1).clone(), y.field(1).clone()])
        },
    );
    b.select("tbd", tris, |t| {
        let items = t.as_tuple().expect("degree triple");
        sorted_ints(&items.iter().collect::<Vec<_>>())
    })
}

/// `((a, b, c, d), (d_b, d_c))` at weight `1/(2(d_b²(d_c−1) + d_c²(d_b−1)))`, `a ≠ d`.
fn length_three_paths(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let abc = paths_with_middle_degree(b, edges, 1);
    let joined = b.join(
        "abcd.join",
        abc,
        abc,
        |x| {
            let p = x.field(0);
            Record::pair(p.field(1).clone(), p.field(2).clone())
        },
        |y| {
            let p = y.field(0);
            Record::pair(p.field(0).clone(), p.field(1).clone())
        },
        |x, y| {
            let p = x.field(0);
            let q = y.field(0);
            let path = Record::tuple([
                p.field(0).clone(),
                p.field(1).clone(),
                p.field(2).clone(),
                q.field(2).clone(),
            ]);
            Record::pair(path, Record::pair(x.field(1).clone(), y.field(1).clone()))
        },
    );
    b.filter("abcd", joined, |r| {
        let p = r.field(0);
        p.field(0) != p.field(3)
    })
}

fn sbd(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let abcd = length_three_paths(b, edges);
    let cdab = b.select("cdab", abcd, |r| {
        Record::pair(rotate(&rotate(r.field(0))), r.field(1).clone())
    });
    let squares = b.join(
        "squares",
        abcd,
        cdab,
        |x| x.field(0).clone(),
        |y| y.field(0).clone(),
        |x, y| {
            let inner = x.field(1);
            let outer = y.field(1);
            Record::tuple([
                outer.field(1).clone(),
                inner.field(0).clone(),
                inner.field(1).clone(),
                outer.field(0).clone(),
            ])
        },
    );
    b.select("sbd", squares, |t| {
        let items = t.as_tuple().expect("degree quadruple");
        sorted_ints(&items.iter().collect::<Vec<_>>())
    })
}

fn tbi(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let p = paths(b, edges);
    let rotated = b.select("tbi.rotate", p, rotate);
    let tris = b.intersect("tbi.triangles", rotated, p);
    b.select("tbi", tris, |_| Record::str(TRIANGLE_TOKEN))
}

fn jdd(b: &mut PlanBuilder, edges: NodeId) -> NodeId {
    let d = degrees(b, edges, 1);
    let temp = b.join(
        "jdd.temp",
        d,
        edges,
        |deg| deg.field(0).clone(),
        src_node,
        |deg, e| Record::pair(e.clone(), deg.field(1).clone()),
    );
    b.join(
        "jdd",
        temp,
        temp,
        |x| x.field(0).clone(),
        |y| {
            let (a, c) = y.field(0).as_edge().expect("edge record");
            Record::edge(c, a)
        },
        |x, y| Record::pair(x.field(1).clone(), y.field(1).clone()),
    )
}
