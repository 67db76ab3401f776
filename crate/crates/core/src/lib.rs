//! Decompositions of graphs into vertex-disjoint subgraphs of large treewidth.
//!
//! The building blocks are exact and heuristic cut solvers, well-linked and
//! conductance decompositions, expander construction by a cut-matching game,
//! and treewidth certificates that can be replayed independently.

pub mod conductance;
pub mod applications;
pub mod cuts;
pub mod decompose;
pub mod error;
pub mod expander;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod io;
pub mod partition;
pub mod report;
pub mod routing;
pub mod spectral;
pub mod treewidth;
pub mod well_linked;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId, VertexSet};
