pub mod cli;
pub mod decomp;
pub mod digraph;
pub mod fixtures;
pub mod game;
pub mod iso;
pub mod minors;
pub mod obstructions;
pub mod repro;

pub use digraph::{Digraph, GraphError, GraphJson, SccPartition, VertexSet, Walk};
