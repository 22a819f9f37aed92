//! Primal graphs, tree decompositions and their nice normal form.

mod graph;
mod nice;
mod ordering;
mod pace;
mod td;

use thiserror::Error;

pub use graph::PrimalGraph;
pub use nice::{make_nice, NiceNode, NiceTreeDecomposition, NodeId, NodeKind};
pub use ordering::{elimination_ordering, induced_width, Heuristic};
pub use pace::{read_td, write_td, TdFormatError};
pub use td::{TreeDecomposition, ValidationReport, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("node {node} breaks the nice decomposition rules: {reason}")]
    NotNice { node: NodeId, reason: String },
}

/// Heuristic decomposition of `g`, already in nice form.
pub fn decompose(
    g: &PrimalGraph,
    heuristic: Heuristic,
    seed: Option<u64>,
    num_vertices: u32,
) -> NiceTreeDecomposition {
    let order = elimination_ordering(g, heuristic, seed);
    let td = TreeDecomposition::from_ordering(g, &order, num_vertices);
    make_nice(&td).expect("elimination always yields a tree")
}
