use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bench::Algorithm;
use crate::cbss::Branching;
use crate::error::{Error, Result};

/// One (instance, algorithm, branching rule) run. Column order is the CSV
/// column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub map: String,
    pub scene: String,
    pub agents: usize,
    pub targets: usize,
    pub tau: String,
    pub seed: String,
    pub algorithm: Algorithm,
    pub branching: Branching,
    /// solved, timeout, infeasible, invalid or error.
    pub status: String,
    pub cost: Option<u64>,
    pub wall_ms: u64,
    pub conflicts_resolved: u64,
    pub roots: u64,
    pub nodes: u64,
}

impl Row {
    pub fn solved(&self) -> bool {
        self.status == "solved" && self.cost.is_some()
    }

    fn instance_key(&self) -> (String, String, usize, usize, String, String) {
        (self.map.clone(), self.scene.clone(), self.agents, self.targets, self.tau.clone(), self.seed.clone())
    }
}

/// Relative saving of CBSS-D over CBSS-TPG, in percent.
pub fn cost_ratio(cost_d: u64, cost_tpg: u64) -> f64 {
    if cost_tpg == 0 {
        return 0.0;
    }
    (cost_tpg as f64 - cost_d as f64) / cost_tpg as f64 * 100.0
}

/// Relative reduction of resolved conflicts by the new rule, in percent.
pub fn conflict_ratio(old: u64, new: u64) -> f64 {
    if old == 0 {
        return 0.0;
    }
    (old as f64 - new as f64) / old as f64 * 100.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<Row>,
}

/// Key of an aggregate: (targets, tau).
pub type GroupKey = (usize, String);

impl BenchReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let rows =
            rd.deserialize().collect::<std::result::Result<Vec<Row>, _>>().map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { rows })
    }

    /// Fraction of solved runs per algorithm and (targets, tau).
    pub fn success_rates(&self) -> BTreeMap<(Algorithm, GroupKey), f64> {
        let mut acc: BTreeMap<(Algorithm, GroupKey), (usize, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry((r.algorithm, (r.targets, r.tau.clone()))).or_default();
            e.0 += r.solved() as usize;
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, n))| (k, s as f64 / n as f64)).collect()
    }

    /// Pairs of (CBSS-D cost, CBSS-TPG cost) on instances both solved,
    /// with the same branching rule.
    pub fn cost_pairs(&self) -> Vec<(GroupKey, u64, u64)> {
        let mut tpg = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.algorithm == Algorithm::CbssTpg && r.solved()) {
            tpg.insert((r.instance_key(), r.branching), r.cost.unwrap());
        }
        self.rows
            .iter()
            .filter(|r| r.algorithm == Algorithm::CbssD && r.solved())
            .filter_map(|r| {
                let c = tpg.get(&(r.instance_key(), r.branching))?;
                Some(((r.targets, r.tau.clone()), r.cost.unwrap(), *c))
            })
            .collect()
    }

    /// Mean cost ratio per (targets, tau) over instances both solved.
    pub fn cost_ratios(&self) -> BTreeMap<GroupKey, f64> {
        let mut acc: BTreeMap<GroupKey, (f64, usize)> = BTreeMap::new();
        for (k, d, t) in self.cost_pairs() {
            let e = acc.entry(k).or_default();
            e.0 += cost_ratio(d, t);
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    /// Paired CBSS-D runs under both rules, both solved:
    /// (agents, conflicts with old rule, conflicts with new rule).
    pub fn conflict_pairs(&self) -> Vec<(usize, u64, u64)> {
        let mut old = BTreeMap::new();
        for r in
            self.rows.iter().filter(|r| r.algorithm == Algorithm::CbssD && r.branching == Branching::Old && r.solved())
        {
            old.insert(r.instance_key(), r.conflicts_resolved);
        }
        self.rows
            .iter()
            .filter(|r| r.algorithm == Algorithm::CbssD && r.branching == Branching::New && r.solved())
            .filter_map(|r| Some((r.agents, *old.get(&r.instance_key())?, r.conflicts_resolved)))
            .collect()
    }

    /// Conflict ratio per number of agents, from summed counts.
    pub fn conflict_ratios(&self) -> BTreeMap<usize, f64> {
        let mut acc: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
        for (n, o, w) in self.conflict_pairs() {
            let e = acc.entry(n).or_default();
            e.0 += o;
            e.1 += w;
        }
        acc.into_iter().map(|(k, (o, w))| (k, conflict_ratio(o, w))).collect()
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str("success rate (algorithm, targets, tau):\n");
        for ((a, (m, tau)), s) in self.success_rates() {
            out.push_str(&format!("  {a} M={m} tau={tau}: {:.1}%\n", s * 100.0));
        }
        out.push_str("mean cost ratio (targets, tau):\n");
        for ((m, tau), r) in self.cost_ratios() {
            out.push_str(&format!("  M={m} tau={tau}: {r:.2}%\n"));
        }
        out.push_str("conflict ratio (agents):\n");
        for (n, r) in self.conflict_ratios() {
            out.push_str(&format!("  N={n}: {r:.2}%\n"));
        }
        out
    }
}
