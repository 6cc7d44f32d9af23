//! Solvers for multi-agent combinatorial path finding with heterogeneous
//! task durations (MCPF-D).
//!
//! Agents start at given cells of a 4-connected grid, must collectively
//! execute a task at every target (each target only by agents eligible for
//! it, taking an agent-specific number of ticks) and end at distinct goals.
//! The objective is the sum of arrival times.
//!
//! Two planners are provided:
//!
//! * [`cbss::solve_cbss_d`] interleaves K-best target sequencing with
//!   conflict-based search and is optimal.
//! * [`tpg::solve_cbss_tpg`] plans without durations, then injects them
//!   through a temporal plan graph. Fast, not optimal.
//!
//! [`exec_sim`] replays plans under delays and [`bench`] runs experiments.

pub mod bench;
pub mod cbss;
pub mod error;
pub mod exec_sim;
pub mod lowlevel;
pub mod rng;
pub mod sequencing;
pub mod tpg;
pub mod verify;
pub mod workspace;

pub use error::{Error, Result};

/// Row-major grid cell index.
pub type VertexId = usize;
/// Agent index, counted from 0.
pub type AgentId = usize;
/// Discrete time step.
pub type Tick = u32;
/// Task execution time in ticks.
pub type Duration = u32;
