//! Grids, MovingAI ingestion, problem instances and scene generation.

mod grid;
mod instance;
mod movingai;
mod scene;

pub use grid::{Graph, Grid, UNREACHABLE};
pub use instance::{toy4x4, validate_instance, Instance, InstanceFile, TaskTable, Violation};
pub use movingai::{parse_map, parse_scen, write_map};
pub use scene::{build_instance, SceneConfig, SceneKind, TauSpec};
