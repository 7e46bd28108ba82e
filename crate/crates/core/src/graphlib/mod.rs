//! Graph analyses over a protected edge set.
//!
//! [`queries`] expresses degree distributions, joint degree distribution,
//! triangles and squares as query plans; [`regression`] turns noisy degree
//! measurements into a consistent degree sequence; [`stats`] and
//! [`generators`] provide exact statistics and benchmark graphs.

pub mod baseline;
pub mod generators;
pub mod graph;
pub mod queries;
pub mod regression;
pub mod stats;

pub use baseline::{exact_jdd, jdd_sala_baseline, sala_noise_scale};
pub use graph::{edge_records, Graph, Symmetrization};
pub use queries::{
    degree_ccdf_plan, degree_sequence_plan, edges_node, graph_plan, jdd_plan, node_count_plan, nodes_plan, sbd_plan,
    tbd_plan, tbi_plan, GraphQuery, EDGES, NODES_TOKEN, TRIANGLE_TOKEN,
};
pub use regression::{default_cap, fit_degree_sequence, fit_from_slices, RegressionGrid};
pub use stats::{assortativity, kstars_from_sequence, unscale_tbd, Assortativity};
