//! Constraints, safe intervals and the single-agent planner.

mod constraint;
mod intervals;
mod path;
mod sipp;

pub use constraint::{Constraint, ConstraintSet};
pub use intervals::{Interval, SafeIntervalTable};
pub use path::{Path, TaskWindow};
pub use sipp::{plan_agent_path, Distances};
