//! Temporal plan graphs, duration injection and the two-stage planner.

mod engine;
mod graph;

pub use engine::{run, Dwell, RunOutput, TpgState};
pub use graph::{build_tpg, route_of, same_visiting_order, EdgeType, Event, TemporalPlanGraph};

use std::time::Instant;

use crate::cbss::{solve_cbss_d, Outcome, Solution, SolverConfig};
use crate::error::Result;
use crate::lowlevel::Path;
use crate::workspace::Instance;

/// Replays the graph with each event dwelling for its D value, tasks first.
/// Returns the duration-aware joint path.
pub fn tpg_d_postprocess(tpg: &TemporalPlanGraph) -> Result<RunOutput> {
    let events = tpg.events();
    let total: u64 = events.iter().map(|e| e.d as u64 + 1).sum();
    let limit = total + events.len() as u64 + 1;
    run(tpg, limit, &mut |e| Dwell { d: events[e].d, task: events[e].task.map(|tau| (0, tau)) }, &mut |_| 0)
}

/// Plans with all durations set to zero, then injects them through the
/// temporal plan graph. Not optimal.
pub fn solve_cbss_tpg(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    let started = Instant::now();
    let out = solve_cbss_d(&inst.without_durations(), cfg)?;
    let Outcome::Solved(plan) = out else { return Ok(out) };
    let tpg = build_tpg(inst, &plan.paths)?;
    let replay = tpg_d_postprocess(&tpg)?;
    let mut stats = plan.stats;
    stats.wall_ms = started.elapsed().as_millis() as u64;
    let cost = replay.paths.iter().map(Path::cost).sum();
    Ok(Outcome::Solved(Solution { cost, paths: replay.paths, stats }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowlevel::TaskWindow;
    use crate::verify::verify_solution;
    use crate::workspace::toy4x4;

    fn plain(vertices: Vec<usize>, tasks: &[(usize, u32)]) -> Path {
        Path { vertices, tasks: tasks.iter().map(|&(v, t)| TaskWindow { vertex: v, start: t, end: t }).collect() }
    }

    fn toy_plan() -> Vec<Path> {
        vec![
            plain(vec![8, 9, 10, 11], &[(9, 1), (10, 2), (11, 3)]),
            plain(vec![1, 5, 9, 13], &[(13, 3)]),
            plain(vec![2, 6, 6, 10, 14], &[(6, 1), (14, 4)]),
        ]
    }

    #[test]
    fn toy_graph_shape() {
        let tpg = build_tpg(&toy4x4(), &toy_plan()).unwrap();
        assert!(tpg.is_acyclic());
        let ev = tpg.events();
        let prec: Vec<(usize, usize, usize)> = tpg
            .edges()
            .iter()
            .filter(|e| e.2 == EdgeType::Precedence)
            .map(|&(a, b, _)| (ev[a].location, ev[a].agent, ev[b].agent))
            .collect();
        assert_eq!(prec, vec![(9, 0, 1), (10, 0, 2)]);
        let d: Vec<u32> = tpg.route(2).iter().map(|&e| ev[e].d).collect();
        assert_eq!(d, vec![0, 5, 0, 0]);
    }

    #[test]
    fn toy_initial_deletability() {
        let tpg = build_tpg(&toy4x4(), &toy_plan()).unwrap();
        let st = TpgState::new(&tpg);
        assert!(st.check_delete(1));
        let at9 = tpg.route(1)[2];
        assert!(!tpg.in_edges(at9).is_empty());
    }

    #[test]
    fn toy_postprocess_matches_published_paths() {
        let inst = toy4x4();
        let tpg = build_tpg(&inst, &toy_plan()).unwrap();
        let out = tpg_d_postprocess(&tpg).unwrap();
        let v: Vec<Vec<usize>> = out.paths.iter().map(|p| p.vertices.clone()).collect();
        assert_eq!(v[0], vec![8, 9, 9, 9, 10, 10, 11]);
        assert_eq!(v[1], vec![1, 5, 5, 5, 9, 13]);
        assert_eq!(v[2], vec![2, 6, 6, 6, 6, 6, 6, 10, 14]);
        let makespan = v.iter().map(|p| p.len() as u64 - 1).max().unwrap();
        assert_eq!(out.iterations, makespan + 1);
        let windows: Vec<_> = out.paths.iter().map(|p| p.tasks.clone()).collect();
        assert!(verify_solution(&inst, &v, Some(&windows)).is_ok());
        let before: Vec<Vec<usize>> = toy_plan().into_iter().map(|p| p.vertices).collect();
        assert!(same_visiting_order(&before, &v));
    }

    #[test]
    fn toy_pipeline_cost_19() {
        let out = solve_cbss_tpg(&toy4x4(), &SolverConfig::default()).unwrap();
        assert_eq!(out.solution().unwrap().cost, 19);
    }

    #[test]
    fn zero_durations_are_a_fixpoint() {
        let inst = toy4x4().without_durations();
        let plan = toy_plan();
        let tpg = build_tpg(&inst, &plan).unwrap();
        let out = tpg_d_postprocess(&tpg).unwrap();
        for (a, b) in out.paths.iter().zip(&plan) {
            assert_eq!(a.vertices, b.vertices);
        }
    }

    #[test]
    fn disjoint_routes_have_no_precedence_edges() {
        let inst = toy4x4().without_durations();
        let plan = vec![plain(vec![8, 12], &[]), plain(vec![1, 0], &[]), plain(vec![2, 3], &[])];
        let tpg = build_tpg(&inst, &plan).unwrap();
        assert!(tpg.edges().iter().all(|e| e.2 == EdgeType::Route));
        assert!(tpg.to_dot().contains("digraph"));
    }

    #[test]
    fn conflicting_plan_is_rejected() {
        let plan = vec![plain(vec![8, 9], &[]), plain(vec![10, 9], &[]), plain(vec![2], &[])];
        assert!(build_tpg(&toy4x4(), &plan).is_err());
    }
}
