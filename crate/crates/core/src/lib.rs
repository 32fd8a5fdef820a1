//! Sublinear estimators for graph averages over a metered query-oracle
//! model, with the synthetic instance families and exact ground-truth
//! oracles needed to benchmark them.
//!
//! The crate is organized around one flow: build a [`graph::Graph`] (by hand,
//! from an edge-list file, or from a [`family::GraphFamilySpec`]), open a
//! seeded [`oracle::OracleSession`] under an [`oracle::AccessPolicy`], and run
//! estimators from [`known_n`] / [`unknown_n`] that only ever touch the graph
//! through that session. [`instances`] builds the hard benchmark families and
//! [`smallgraph`] enumerates small graphs for brute-force verification.

pub mod family;
pub mod graph;
pub mod instances;
pub mod known_n;
pub mod oracle;
pub mod primitives;
pub mod smallgraph;
pub mod unknown_n;

pub use graph::{Graph, GraphError, GroundTruth, VertexId};
pub use oracle::{AccessPolicy, OracleError, OracleKind, OracleSession, QueryMeter};
pub use primitives::{Estimate, EstimateStatus, EstimatorConfig, EstimatorError};
