//! Benchmark instance generation from MovingAI scenarios.
//!
//! The first `N` scenario pairs give starts and goals. Targets are drawn
//! from the goals of the remaining pairs: the candidates are those goals in
//! file order, de-duplicated and with starts/goals removed, and `M` of them
//! are picked by [`SplitMix64::sample`]. Afterwards, for each target in draw
//! order, Scenes 2 and 3 pick two eligible agents (`below(N)`, then
//! `below(N - 1)` over the remaining agents) and Scene 3 draws one duration
//! per eligible agent in ascending agent order. Goals always carry duration
//! zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::workspace::{Grid, Instance, TaskTable};
use crate::{Duration, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SceneKind {
    /// Every agent may do every task with the same duration.
    Scene1,
    /// Exclusive goals; two eligible agents per target; shared duration.
    Scene2,
    /// As Scene2 with per-agent durations drawn from a range.
    Scene3,
}

impl SceneKind {
    pub fn number(self) -> u8 {
        match self {
            SceneKind::Scene1 => 1,
            SceneKind::Scene2 => 2,
            SceneKind::Scene3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(SceneKind::Scene1),
            2 => Ok(SceneKind::Scene2),
            3 => Ok(SceneKind::Scene3),
            _ => Err(Error::Config(format!("unknown scene {n}"))),
        }
    }
}

/// Task duration parameter: a single value or an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauSpec {
    Fixed(Duration),
    Range(Duration, Duration),
}

impl fmt::Display for TauSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauSpec::Fixed(t) => write!(f, "{t}"),
            TauSpec::Range(lo, hi) => write!(f, "{lo}-{hi}"),
        }
    }
}

impl FromStr for TauSpec {
    type Err = Error;

    /// `"5"` or `"2-10"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad duration spec `{s}`"));
        match s.split_once('-') {
            Some((lo, hi)) => {
                let lo: Duration = lo.trim().parse().map_err(|_| bad())?;
                let hi: Duration = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                Ok(TauSpec::Range(lo, hi))
            }
            None => Ok(TauSpec::Fixed(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub kind: SceneKind,
    pub tau: TauSpec,
    pub seed: u64,
}

pub fn build_instance(
    grid: &Grid,
    pairs: &[(VertexId, VertexId)],
    num_agents: usize,
    num_targets: usize,
    cfg: &SceneConfig,
) -> Result<Instance> {
    match (cfg.kind, cfg.tau) {
        (SceneKind::Scene3, TauSpec::Fixed(_)) => return Err(Error::Config("scene 3 needs a duration range".into())),
        (SceneKind::Scene1 | SceneKind::Scene2, TauSpec::Range(..)) => {
            return Err(Error::Config(format!("scene {} needs a single duration", cfg.kind.number())))
        }
        _ => {}
    }
    if num_agents == 0 {
        return Err(Error::Config("at least one agent is required".into()));
    }
    if cfg.kind != SceneKind::Scene1 && num_agents < 2 {
        return Err(Error::Config(format!("scene {} needs at least two agents", cfg.kind.number())));
    }
    if pairs.len() < num_agents {
        return Err(Error::Instance(format!("scenario has {} pairs, {num_agents} agents requested", pairs.len())));
    }
    let starts: Vec<VertexId> = pairs[..num_agents].iter().map(|p| p.0).collect();
    let goals: Vec<VertexId> = pairs[..num_agents].iter().map(|p| p.1).collect();
    let mut used: BTreeSet<VertexId> = starts.iter().chain(&goals).copied().collect();
    if used.len() != 2 * num_agents {
        return Err(Error::Instance("insufficient distinct locations: first pairs overlap".into()));
    }
    let mut candidates = Vec::new();
    for &(_, g) in &pairs[num_agents..] {
        if used.insert(g) {
            candidates.push(g);
        }
    }
    if candidates.len() < num_targets {
        return Err(Error::Instance(format!(
            "insufficient distinct locations: {} candidate targets for {num_targets}",
            candidates.len()
        )));
    }

    let mut rng = SplitMix64::new(cfg.seed);
    let targets = rng.sample(&candidates, num_targets);
    let mut tasks: BTreeMap<VertexId, TaskTable> = BTreeMap::new();
    match cfg.kind {
        SceneKind::Scene1 => {
            let TauSpec::Fixed(tau) = cfg.tau else { unreachable!() };
            for &t in &targets {
                tasks.insert(t, (0..num_agents).map(|a| (a, tau)).collect());
            }
            for &g in &goals {
                tasks.insert(g, (0..num_agents).map(|a| (a, 0)).collect());
            }
        }
        SceneKind::Scene2 | SceneKind::Scene3 => {
            for &t in &targets {
                let first = rng.below(num_agents as u64) as usize;
                let mut second = rng.below(num_agents as u64 - 1) as usize;
                if second >= first {
                    second += 1;
                }
                let mut pair = [first, second];
                pair.sort_unstable();
                let mut table = TaskTable::new();
                for a in pair {
                    let d = match cfg.tau {
                        TauSpec::Fixed(tau) => tau,
                        TauSpec::Range(lo, hi) => rng.range(lo as u64, hi as u64) as Duration,
                    };
                    table.insert(a, d);
                }
                tasks.insert(t, table);
            }
            for (a, &g) in goals.iter().enumerate() {
                tasks.insert(g, TaskTable::from([(a, 0)]));
            }
        }
    }
    Ok(Instance::new(grid.clone(), starts, goals, targets, tasks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs() -> Vec<(VertexId, VertexId)> {
        // 5x5 open grid; distinct cells everywhere.
        vec![(0, 24), (4, 20), (12, 2), (6, 18), (7, 16), (8, 11), (13, 3)]
    }

    #[test]
    fn scene1_is_anonymous() {
        let cfg = SceneConfig { kind: SceneKind::Scene1, tau: TauSpec::Fixed(2), seed: 1 };
        let inst = build_instance(&Grid::open(5, 5), &pairs(), 2, 1, &cfg).unwrap();
        assert_eq!(inst.targets.len(), 1);
        let t = inst.targets[0];
        assert_eq!(inst.tasks[&t], TaskTable::from([(0, 2), (1, 2)]));
        for v in inst.task_vertices() {
            assert_eq!(inst.eligible(v).collect::<Vec<_>>(), vec![0, 1]);
        }
        assert!(inst.is_anonymous());
    }

    #[test]
    fn scene3_durations_in_range() {
        let cfg = SceneConfig { kind: SceneKind::Scene3, tau: TauSpec::Range(2, 10), seed: 99 };
        let inst = build_instance(&Grid::open(5, 5), &pairs(), 3, 4, &cfg).unwrap();
        for &t in &inst.targets {
            let table = &inst.tasks[&t];
            assert_eq!(table.len(), 2);
            assert!(table.values().all(|&d| (2..=10).contains(&d)));
        }
        for (a, &g) in inst.goals.iter().enumerate() {
            assert_eq!(inst.tasks[&g], TaskTable::from([(a, 0)]));
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SceneConfig { kind: SceneKind::Scene2, tau: TauSpec::Fixed(5), seed: 42 };
        let a = build_instance(&Grid::open(5, 5), &pairs(), 3, 3, &cfg).unwrap();
        let b = build_instance(&Grid::open(5, 5), &pairs(), 3, 3, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(crate::workspace::validate_instance(&a), vec![]);
    }

    #[test]
    fn errors() {
        let scene2 = SceneConfig { kind: SceneKind::Scene2, tau: TauSpec::Fixed(5), seed: 0 };
        let grid = Grid::open(5, 5);
        assert!(build_instance(&grid, &pairs(), 1, 1, &scene2).is_err());
        assert!(build_instance(&grid, &pairs(), 2, 6, &scene2).is_err());
        let bad = SceneConfig { tau: TauSpec::Range(1, 2), ..scene2 };
        assert!(build_instance(&grid, &pairs(), 2, 1, &bad).is_err());
    }

    #[test]
    fn tau_spec_parsing() {
        assert_eq!("5".parse::<TauSpec>().unwrap(), TauSpec::Fixed(5));
        assert_eq!("2-10".parse::<TauSpec>().unwrap(), TauSpec::Range(2, 10));
        assert!("10-2".parse::<TauSpec>().is_err());
        assert!("x".parse::<TauSpec>().is_err());
    }
}
