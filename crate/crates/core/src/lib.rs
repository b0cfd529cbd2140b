//! Exact-arithmetic clustering functions and executable checks of the
//! axiomatic properties they satisfy or violate.
//!
//! Distances are exact rationals ([`Weight`]); points are numbered from 1;
//! every ordering of edges uses the universal `(weight, i, j)` order.

pub mod certificate;
pub mod checkers;
pub mod clusterers;
pub mod counterexamples;
pub mod distance;
pub mod error;
pub mod graph;
pub mod io;
pub mod partition;
pub mod plugin;
pub mod sampling;
pub mod transforms;
pub mod weight;

pub use certificate::{build_chain, classify_edges, inner_prefix, verify_chain, ChainCertificate};
pub use checkers::{
    build_taxonomy_table, check_consistency, check_k_richness, check_mst_coherence,
    check_order_consistency, check_path_distance_coherence, check_property, check_scale_invariance,
    CheckBudget, Evidence, Property, Status, TaxonomyReport, Verdict,
};
pub use clusterers::{
    constant_partition, min_sum_exact, min_sum_objective, mstc, single_linkage,
    single_linkage_via_mst, ClusteringFunction, ClusteringFunctionHandle, FunctionSpec, MstcConfig,
};
pub use counterexamples::{
    min_sum_violation, mstc_consistency_counterexample, two_halves_instance, ViolationReport,
};
pub use distance::{canonical_richness_witness, edge_order, DistanceFunction, Edge};
pub use error::{Error, Result};
pub use graph::{kruskal_mst, mst_equal, path_distance, path_distance_bruteforce, SpanningTree};
pub use partition::{enumerate_partitions, Partitioning};
pub use plugin::{PluginEndpoint, PluginHandle};
pub use transforms::TransformSpec;
pub use weight::Weight;
