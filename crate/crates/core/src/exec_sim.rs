//! Discrete-time execution of a temporal plan graph under disturbances.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowlevel::TaskWindow;
use crate::rng::SplitMix64;
use crate::tpg::{run, Dwell, TemporalPlanGraph};
use crate::verify::{check, Report};
use crate::workspace::Instance;
use crate::{AgentId, Duration, VertexId};

/// Disturbances applied during execution.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayModel {
    /// Chance that an agent ready to move is held back this tick.
    pub move_delay_prob: f64,
    /// Inclusive range of the hold length in ticks.
    pub delay_range: (u32, u32),
    /// Actual task durations that differ from the plan.
    pub durations: BTreeMap<(AgentId, VertexId), Duration>,
    pub seed: u64,
}

impl DelayModel {
    /// No delays and planned durations.
    pub fn exact(seed: u64) -> Self {
        Self { move_delay_prob: 0.0, delay_range: (0, 0), durations: BTreeMap::new(), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.move_delay_prob) {
            return Err(Error::Config(format!("delay probability {} outside [0,1]", self.move_delay_prob)));
        }
        if self.delay_range.0 > self.delay_range.1 {
            return Err(Error::Config("empty delay range".into()));
        }
        Ok(())
    }

    /// Draws an actual duration for every task of the graph, uniformly
    /// within `±frac` of the planned one, rounded to the nearest tick.
    pub fn with_duration_noise(mut self, tpg: &TemporalPlanGraph, frac: f64) -> Self {
        let mut rng = SplitMix64::new(self.seed ^ 0x5EED_D0D0);
        for e in tpg.events() {
            if let Some(tau) = e.task {
                let factor = 1.0 + frac * (2.0 * rng.unit() - 1.0);
                let actual = (tau as f64 * factor).round().max(0.0) as Duration;
                self.durations.insert((e.agent, e.location), actual);
            }
        }
        self
    }
}

/// What happened during one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    /// Location per tick of each agent, until it finishes at its goal.
    pub paths: Vec<Vec<VertexId>>,
    /// Actual task windows per agent.
    pub tasks: Vec<Vec<TaskWindow>>,
    /// Actual durations of the executed tasks.
    pub durations: Vec<(AgentId, VertexId, Duration)>,
    pub ticks: u64,
}

impl ExecutionTrace {
    /// Joint locations at tick `t`, finished agents resting at their goals.
    pub fn locations(&self, t: usize) -> Vec<VertexId> {
        self.paths.iter().map(|p| p[t.min(p.len() - 1)]).collect()
    }

    /// One JSON object per tick: `{"t": .., "locations": [..]}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in 0..=self.ticks as usize {
            let locations: Vec<String> = self.locations(t).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{{\"t\":{t},\"locations\":[{}]}}", locations.join(","));
        }
        out
    }
}

/// Runs the graph tick by tick. An agent whose next event is admissible
/// is held back with probability `move_delay_prob` for a drawn number of
/// ticks; tasks take their actual duration.
pub fn simulate_execution(tpg: &TemporalPlanGraph, dm: &DelayModel) -> Result<ExecutionTrace> {
    dm.validate()?;
    let events = tpg.events();
    let planned: u64 = (0..tpg.num_agents())
        .map(|a| tpg.route(a).iter().map(|&e| events[e].d as u64 + 1).sum::<u64>())
        .max()
        .unwrap_or(0);
    let mut rng = SplitMix64::new(dm.seed);
    let mut used = Vec::new();
    let mut dwell = |e: usize| {
        let ev = &events[e];
        match ev.task {
            Some(tau) => {
                let actual = dm.durations.get(&(ev.agent, ev.location)).copied().unwrap_or(tau);
                used.push((ev.agent, ev.location, actual));
                Dwell { d: ev.wait + actual, task: Some((0, actual)) }
            }
            None => Dwell { d: ev.wait, task: None },
        }
    };
    let (p, (lo, hi)) = (dm.move_delay_prob, dm.delay_range);
    let mut stall = |_a: AgentId| if p > 0.0 && rng.chance(p) { rng.range(lo as u64, hi as u64) as u32 } else { 0 };
    let out = run(tpg, 10 * (planned + 1), &mut dwell, &mut stall)
        .map_err(|e| Error::Execution(format!("livelock guard: {e}")))?;
    let ticks = out.paths.iter().map(|p| p.vertices.len() as u64 - 1).max().unwrap_or(0);
    Ok(ExecutionTrace {
        paths: out.paths.iter().map(|p| p.vertices.clone()).collect(),
        tasks: out.paths.into_iter().map(|p| p.tasks).collect(),
        durations: used,
        ticks,
    })
}

/// Re-checks a trace: legal moves, no collisions, every task executed by
/// an eligible agent for its actual duration, agents at distinct goals.
pub fn verify_trace(trace: &ExecutionTrace, inst: &Instance) -> Report {
    let actual: BTreeMap<(AgentId, VertexId), Duration> =
        trace.durations.iter().map(|&(a, v, d)| ((a, v), d)).collect();
    let duration = |a: AgentId, v: VertexId| {
        inst.duration(a, v)?;
        Some(actual.get(&(a, v)).copied().unwrap_or_else(|| inst.duration(a, v).unwrap()))
    };
    check(inst, &trace.paths, Some(&trace.tasks), &duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbss::{solve_cbss_d, SolverConfig};
    use crate::tpg::build_tpg;
    use crate::verify::Violation;
    use crate::workspace::toy4x4;

    fn toy_graph() -> (Instance, TemporalPlanGraph, Vec<Vec<VertexId>>) {
        let inst = toy4x4();
        let sol = solve_cbss_d(&inst, &SolverConfig::default()).unwrap().solution().unwrap().clone();
        let tpg = build_tpg(&inst, &sol.paths).unwrap();
        (inst, tpg, sol.paths.into_iter().map(|p| p.vertices).collect())
    }

    #[test]
    fn no_disturbance_replays_plan() {
        let (inst, tpg, plan) = toy_graph();
        let trace = simulate_execution(&tpg, &DelayModel::exact(0)).unwrap();
        assert_eq!(trace.paths, plan);
        assert!(verify_trace(&trace, &inst).is_ok());
    }

    #[test]
    fn delays_stay_collision_free() {
        let (inst, tpg, _) = toy_graph();
        for seed in 0..100 {
            let dm = DelayModel { move_delay_prob: 0.2, delay_range: (1, 3), ..DelayModel::exact(seed) };
            let trace = simulate_execution(&tpg, &dm).unwrap();
            let r = verify_trace(&trace, &inst);
            assert!(r.is_ok(), "seed {seed}: {:?}", r.violations);
        }
    }

    #[test]
    fn longer_task_delays_successors() {
        let (inst, tpg, plan) = toy_graph();
        let mut dm = DelayModel::exact(0);
        dm.durations.insert((0, 9), 2 + 5);
        let trace = simulate_execution(&tpg, &dm).unwrap();
        assert!(verify_trace(&trace, &inst).is_ok());
        // Agent 1 enters 9 after agent 0, so it arrives later than planned.
        let arrive = |p: &[VertexId]| p.iter().position(|&v| v == 13).unwrap();
        assert!(arrive(&trace.paths[1]) > arrive(&plan[1]));
    }

    #[test]
    fn corrupted_trace_is_caught() {
        let (inst, tpg, _) = toy_graph();
        let mut trace = simulate_execution(&tpg, &DelayModel::exact(0)).unwrap();
        trace.paths[1][1] = trace.paths[0][1];
        let r = verify_trace(&trace, &inst);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::VertexConflict { .. })));
    }

    #[test]
    fn missing_window_is_caught() {
        let (inst, tpg, _) = toy_graph();
        let mut trace = simulate_execution(&tpg, &DelayModel::exact(0)).unwrap();
        trace.tasks[2].retain(|w| w.vertex != 6);
        let r = verify_trace(&trace, &inst);
        assert!(r.violations.contains(&Violation::TaskNotExecuted { vertex: 6 }));
    }

    #[test]
    fn jsonl_has_one_line_per_tick() {
        let (_, tpg, _) = toy_graph();
        let trace = simulate_execution(&tpg, &DelayModel::exact(0)).unwrap();
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count() as u64, trace.ticks + 1);
        assert!(text.starts_with("{\"t\":0,\"locations\":[8,1,2]}\n"));
    }
}
