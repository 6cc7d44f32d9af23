//! Conflict-based search over K-best joint sequences.

mod conflict;
mod search;
mod solution;

pub use conflict::{count_conflicts, detect_conflict, generate_constraints, Branching, Conflict, ConflictKind};
pub use search::{solve_cbss_d, solve_cbss_d_observed, Backend, Outcome, SearchEvent, Solution, SolverConfig, Stats};
pub use solution::SolutionFile;
