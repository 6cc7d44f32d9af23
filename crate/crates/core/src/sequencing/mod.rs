//! Target graph, transformed single-tour encoding, exact and external
//! sequencing backends, and K-best joint sequence enumeration.

mod assign;
mod joint;
mod kbest;
mod solver;
mod target_graph;
mod transform;
mod tsplib;

pub use joint::{is_complete, sequence_cost, JointSequence};
pub use kbest::KBest;
pub use solver::{ArcSet, ExactSolver, SequencingBackend, Tour};
pub use target_graph::{compute_target_graph, TargetGraph};
pub use transform::{encode_sequence, transform, Cluster, ClusterKind, TfNode, TransformedGraph};
pub use tsplib::{
    encoded_matrix, parse_atsp, parse_tour, rotate_to_first, solve_matrix, write_atsp, write_tour, ExternalSolver,
};
