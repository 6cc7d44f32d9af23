use crate::error::{Error, Result};
use crate::lowlevel::{Path, TaskWindow};
use crate::tpg::TemporalPlanGraph;
use crate::{AgentId, Tick};

/// How long an agent stays at an event, decided when it arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dwell {
    /// Extra ticks after the arrival tick before the agent may leave.
    pub d: u32,
    /// Offset from arrival and length of the task window, if any.
    pub task: Option<(u32, u32)>,
}

/// Runtime state of a graph being consumed tick by tick.
#[derive(Debug, Clone)]
pub struct TpgState<'a> {
    tpg: &'a TemporalPlanGraph,
    cur: Vec<usize>,
    remaining: Vec<u32>,
    finished: Vec<bool>,
    deleted: Vec<bool>,
}

impl<'a> TpgState<'a> {
    pub fn new(tpg: &'a TemporalPlanGraph) -> Self {
        let n = tpg.num_agents();
        let remaining = (0..n).map(|a| tpg.events()[tpg.route(a)[0]].d).collect();
        Self { tpg, cur: vec![0; n], remaining, finished: vec![false; n], deleted: vec![false; tpg.events().len()] }
    }

    /// Current event of an unfinished agent.
    pub fn current(&self, agent: AgentId) -> Option<usize> {
        (!self.finished[agent]).then(|| self.tpg.route(agent)[self.cur[agent]])
    }

    pub fn location(&self, agent: AgentId) -> usize {
        self.tpg.events()[self.tpg.route(agent)[self.cur[agent]]].location
    }

    pub fn remaining(&self, agent: AgentId) -> u32 {
        self.remaining[agent]
    }

    pub fn is_finished(&self, agent: AgentId) -> bool {
        self.finished[agent]
    }

    fn next(&self, agent: AgentId) -> Option<usize> {
        self.tpg.route(agent).get(self.cur[agent] + 1).copied()
    }

    /// Whether the agent's current event can be deleted with every other
    /// agent standing still: no undeleted predecessor of the next event
    /// besides the current one, no remaining dwell, and a free next
    /// location. A final event only needs zero dwell.
    pub fn check_delete(&self, agent: AgentId) -> bool {
        self.movable(agent, &[])
    }

    fn movable(&self, agent: AgentId, leaving: &[bool]) -> bool {
        let Some(cur) = self.current(agent) else { return false };
        if self.remaining[agent] > 0 {
            return false;
        }
        let Some(next) = self.next(agent) else { return true };
        let leaves = |k: AgentId| leaving.get(k).copied().unwrap_or(false);
        let preds_ok = self.tpg.in_edges(next).iter().all(|&p| {
            p == cur || self.deleted[p] || {
                let k = self.tpg.events()[p].agent;
                leaves(k) && self.current(k) == Some(p)
            }
        });
        let loc = self.tpg.events()[next].location;
        let free = (0..self.cur.len())
            .filter(|&k| k != agent && self.location(k) == loc)
            .all(|k| !self.finished[k] && leaves(k));
        preds_ok && free
    }
}

/// Result of consuming a temporal plan graph.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub paths: Vec<Path>,
    pub iterations: u64,
}

/// Consumes the graph one tick per iteration.
///
/// Each iteration: agents with zero remaining dwell may be stalled by
/// `stall`; among the rest, the largest set whose moves are jointly
/// admissible is advanced (an agent may enter a location its occupant
/// leaves in the same tick, and finished agents hold their goals);
/// staying agents count their dwell down; unfinished agents append their
/// location. `dwell` prices each newly entered event.
pub fn run(
    tpg: &TemporalPlanGraph,
    max_iterations: u64,
    dwell: &mut dyn FnMut(usize) -> Dwell,
    stall: &mut dyn FnMut(AgentId) -> u32,
) -> Result<RunOutput> {
    let n = tpg.num_agents();
    let mut st = TpgState::new(tpg);
    let mut paths: Vec<Path> = Vec::with_capacity(n);
    for a in 0..n {
        let e = tpg.route(a)[0];
        let dw = dwell(e);
        st.remaining[a] = dw.d;
        let mut p = Path { vertices: vec![tpg.events()[e].location], tasks: vec![] };
        if let Some((off, len)) = dw.task {
            p.tasks.push(TaskWindow { vertex: tpg.events()[e].location, start: off, end: off + len });
        }
        paths.push(p);
    }
    let mut iterations = 0u64;
    let mut tick: Tick = 0;
    while st.finished.iter().any(|f| !f) {
        if iterations >= max_iterations {
            return Err(Error::Tpg(format!("no completion after {iterations} iterations")));
        }
        iterations += 1;
        tick += 1;

        let mut stalled = vec![false; n];
        let mut leaving = vec![false; n];
        for a in 0..n {
            if st.finished[a] || st.remaining[a] > 0 {
                continue;
            }
            if st.next(a).is_some() {
                let s = stall(a);
                if s > 0 {
                    st.remaining[a] = s;
                    stalled[a] = true;
                    continue;
                }
            }
            leaving[a] = true;
        }
        loop {
            let drop: Vec<AgentId> = (0..n).filter(|&a| leaving[a] && !st.movable(a, &leaving)).collect();
            if drop.is_empty() {
                break;
            }
            for a in drop {
                leaving[a] = false;
            }
        }

        let mut progressed = false;
        for a in 0..n {
            if leaving[a] {
                progressed = true;
                let cur = tpg.route(a)[st.cur[a]];
                st.deleted[cur] = true;
                match st.next(a) {
                    None => st.finished[a] = true,
                    Some(next) => {
                        st.cur[a] += 1;
                        let dw = dwell(next);
                        st.remaining[a] = dw.d;
                        if let Some((off, len)) = dw.task {
                            let start = tick + off;
                            paths[a].tasks.push(TaskWindow {
                                vertex: tpg.events()[next].location,
                                start,
                                end: start + len,
                            });
                        }
                    }
                }
            } else if !st.finished[a] && st.remaining[a] > 0 {
                progressed = true;
                st.remaining[a] -= 1;
            }
            progressed |= stalled[a];
        }
        if !progressed {
            return Err(Error::Tpg(format!("deadlock at tick {tick}")));
        }
        for a in 0..n {
            if !st.finished[a] {
                let loc = st.location(a);
                paths[a].vertices.push(loc);
            }
        }
    }
    Ok(RunOutput { paths, iterations })
}
