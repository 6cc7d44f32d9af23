//! Benchmark grid runner, report rows and aggregate metrics.

mod config;
mod report;

pub use config::{Algorithm, BenchConfig};
pub use report::{conflict_ratio, cost_ratio, BenchReport, GroupKey, Row};

use std::path::Path as FsPath;
use std::time::Duration;

use rayon::prelude::*;

use crate::cbss::{solve_cbss_d, Branching, Outcome, SolverConfig};
use crate::error::{Error, Result};
use crate::tpg::solve_cbss_tpg;
use crate::verify::verify_solution;
use crate::workspace::{build_instance, parse_map, parse_scen, Instance, SceneConfig, SceneKind, TauSpec};

/// A generated or loaded instance with its report labels.
#[derive(Debug, Clone)]
pub struct Cell {
    pub map: String,
    pub scene: String,
    pub tau: String,
    pub seed: String,
    pub instance: Instance,
}

/// Runs one algorithm on one instance and turns the outcome into a row.
/// A solution that fails verification is recorded as `invalid`.
pub fn run_cell(cell: &Cell, alg: Algorithm, branching: Branching, time_limit: f64, eps: f64) -> Row {
    let cfg =
        SolverConfig { eps, time_limit: Some(Duration::from_secs_f64(time_limit)), branching, ..Default::default() };
    let result = match alg {
        Algorithm::CbssD => solve_cbss_d(&cell.instance, &cfg),
        Algorithm::CbssTpg => solve_cbss_tpg(&cell.instance, &cfg),
    };
    let mut row = Row {
        map: cell.map.clone(),
        scene: cell.scene.clone(),
        agents: cell.instance.num_agents(),
        targets: cell.instance.targets.len(),
        tau: cell.tau.clone(),
        seed: cell.seed.clone(),
        algorithm: alg,
        branching,
        status: "error".into(),
        cost: None,
        wall_ms: 0,
        conflicts_resolved: 0,
        roots: 0,
        nodes: 0,
    };
    let Ok(out) = result else { return row };
    let stats = *out.stats();
    row.wall_ms = stats.wall_ms;
    row.conflicts_resolved = stats.conflicts_resolved;
    row.roots = stats.roots;
    row.nodes = stats.nodes;
    row.status = out.status().into();
    if let Outcome::Solved(sol) = &out {
        let vertices: Vec<_> = sol.paths.iter().map(|p| p.vertices.clone()).collect();
        let windows: Vec<_> = sol.paths.iter().map(|p| p.tasks.clone()).collect();
        let report = verify_solution(&cell.instance, &vertices, Some(&windows));
        if report.is_ok() && report.cost == sol.cost {
            row.cost = Some(sol.cost);
        } else {
            row.status = "invalid".into();
        }
    }
    row
}

/// Expands the configured grid into instances. Combinations a scene does
/// not admit (range durations outside scene 3, too few agents or
/// locations) are skipped.
pub fn generate_cells(cfg: &BenchConfig, base: &FsPath) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for (map_file, scen_file) in cfg.maps.iter().zip(&cfg.scens) {
        let grid = parse_map(&std::fs::read_to_string(base.join(map_file))?)?;
        let pairs = parse_scen(&std::fs::read_to_string(base.join(scen_file))?, &grid)?;
        let label = FsPath::new(map_file).file_name().map_or(map_file.clone(), |s| s.to_string_lossy().into_owned());
        for &scene in &cfg.scenes {
            let kind = SceneKind::from_number(scene)?;
            for &n in &cfg.agents {
                for &m in &cfg.targets {
                    for tau_text in &cfg.taus {
                        let tau: TauSpec = tau_text.parse()?;
                        for &seed in &cfg.seeds {
                            let sc = SceneConfig { kind, tau, seed };
                            match build_instance(&grid, &pairs, n, m, &sc) {
                                Ok(instance) => cells.push(Cell {
                                    map: label.clone(),
                                    scene: scene.to_string(),
                                    tau: tau_text.clone(),
                                    seed: seed.to_string(),
                                    instance,
                                }),
                                Err(Error::Config(_) | Error::Instance(_)) => {}
                                Err(e) => return Err(e),
                            }
                        }
                    }
                }
            }
        }
    }
    for file in &cfg.instances {
        let instance = Instance::from_json(&std::fs::read_to_string(base.join(file))?)?;
        let label = FsPath::new(file).file_name().map_or(file.clone(), |s| s.to_string_lossy().into_owned());
        cells.push(Cell { map: label, scene: "-".into(), tau: "-".into(), seed: "-".into(), instance });
    }
    Ok(cells)
}

/// Runs every cell with every algorithm and branching rule on a worker
/// pool. Rows come back in grid order.
pub fn run_benchmark(cfg: &BenchConfig, base: &FsPath) -> Result<BenchReport> {
    cfg.validate()?;
    let cells = generate_cells(cfg, base)?;
    let mut jobs = Vec::new();
    for cell in &cells {
        for &alg in &cfg.algorithms {
            for &br in &cfg.branching {
                jobs.push((cell, alg, br));
            }
        }
    }
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| Error::Config(e.to_string()))?;
    let rows = pool
        .install(|| jobs.par_iter().map(|&(cell, alg, br)| run_cell(cell, alg, br, cfg.time_limit, cfg.eps)).collect());
    Ok(BenchReport { rows })
}
