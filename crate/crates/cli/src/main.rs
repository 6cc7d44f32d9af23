use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mcpfd::bench::{run_benchmark, Algorithm, BenchConfig};
use mcpfd::cbss::{solve_cbss_d, Backend, Branching, SolutionFile, SolverConfig};
use mcpfd::exec_sim::{simulate_execution, verify_trace, DelayModel};
use mcpfd::sequencing::{
    compute_target_graph, parse_atsp, solve_matrix, transform, write_atsp, write_tour, ArcSet, ExternalSolver,
};
use mcpfd::tpg::{build_tpg, solve_cbss_tpg};
use mcpfd::verify::verify_solution;
use mcpfd::workspace::{build_instance, parse_map, parse_scen, Instance, SceneConfig, SceneKind, TauSpec};

#[derive(Parser)]
#[command(name = "mcpfd", version, about = "Multi-agent path finding with targets and task durations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the solution as JSON.
    Solve {
        /// Map the instance was generated from; checked against the instance grid.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "cbss-d")]
        algo: Algorithm,
        #[arg(long, default_value = "new")]
        branching: Branching,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// ATSP solver run as `PROGRAM <problem.atsp> <out.tour>`.
        #[arg(long)]
        external_solver: Option<PathBuf>,
        /// Argument passed to the external solver before the file names.
        #[arg(long = "external-arg", allow_hyphen_values = true)]
        external_args: Vec<String>,
        /// Always build per-agent task copies.
        #[arg(long)]
        no_simplify: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an instance from a MovingAI map and scenario.
    GenInstance {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scen: PathBuf,
        #[arg(long)]
        scene: u8,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        targets: usize,
        /// A duration (`5`) or an inclusive range (`2-10`, scene 3).
        #[arg(long)]
        tau: TauSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark grid and write the report as CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a solution file against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Write the unconstrained sequencing problem as a TSPLIB ATSP file.
    ExportTsplib {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        no_simplify: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a solution under random delays and write a JSON-lines trace.
    Simulate {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        delay_prob: f64,
        #[arg(long, default_value_t = 1)]
        delay_min: u32,
        #[arg(long, default_value_t = 3)]
        delay_max: u32,
        /// Relative spread of actual task durations, e.g. 0.5 for ±50%.
        #[arg(long, default_value_t = 0.0)]
        duration_noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact solver for small ATSP files, usable as an external solver.
    #[command(hide = true)]
    TspSolve { problem: PathBuf, tour: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            map,
            instance,
            algo,
            branching,
            eps,
            time_limit,
            external_solver,
            external_args,
            no_simplify,
            out,
        } => {
            let inst = load_instance(&instance)?;
            if let Some(map) = map {
                let grid = parse_map(&read(&map)?)?;
                if &grid != inst.grid() {
                    bail!("instance grid does not match {}", map.display());
                }
            }
            let cfg = SolverConfig {
                eps,
                time_limit: time_limit.map(Duration::from_secs_f64),
                branching,
                backend: match external_solver {
                    Some(program) => Backend::External(ExternalSolver { program, args: external_args }),
                    None => Backend::Exact,
                },
                simplify: !no_simplify,
            };
            let outcome = match algo {
                Algorithm::CbssD => solve_cbss_d(&inst, &cfg)?,
                Algorithm::CbssTpg => solve_cbss_tpg(&inst, &cfg)?,
            };
            let file = SolutionFile::from_outcome(&outcome);
            write(&out, &file.to_json()?)?;
            match file.cost {
                Some(c) => println!("{}: cost {c} ({} ms)", file.status, file.stats.wall_ms),
                None => println!("{} ({} ms)", file.status, file.stats.wall_ms),
            }
            Ok(if file.cost.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::GenInstance { map, scen, scene, agents, targets, tau, seed, out } => {
            let grid = parse_map(&read(&map)?)?;
            let pairs = parse_scen(&read(&scen)?, &grid)?;
            let cfg = SceneConfig { kind: SceneKind::from_number(scene)?, tau, seed };
            let inst = build_instance(&grid, &pairs, agents, targets, &cfg)?;
            write(&out, &inst.to_json()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { config, out } => {
            let cfg = BenchConfig::from_toml(&read(&config)?)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let report = run_benchmark(&cfg, base)?;
            let file = fs::File::create(&out).with_context(|| format!("writing {}", out.display()))?;
            report.write_csv(file)?;
            print!("{}", report.summary());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { instance, solution } => {
            let inst = load_instance(&instance)?;
            let sol = SolutionFile::from_json(&read(&solution)?)?;
            if sol.cost.is_none() {
                bail!("solution file has status {} and no paths", sol.status);
            }
            let windows = (!sol.tasks.is_empty()).then_some(sol.tasks.as_slice());
            let report = verify_solution(&inst, &sol.paths, windows);
            for v in &report.violations {
                println!("{v}");
            }
            if sol.cost != Some(report.cost) {
                println!("reported cost {:?} differs from recomputed {}", sol.cost, report.cost);
                return Ok(ExitCode::from(1));
            }
            if report.is_ok() {
                println!("ok: cost {}", report.cost);
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::ExportTsplib { instance, no_simplify, out } => {
            let inst = load_instance(&instance)?;
            let tg = compute_target_graph(&inst)?;
            let g = transform(&inst, &tg, !no_simplify)?;
            let name = instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            write(&out, &write_atsp(&g, &ArcSet::default(), &name))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { solution, instance, delay_prob, delay_min, delay_max, duration_noise, seed, out } => {
            let inst = load_instance(&instance)?;
            let sol = SolutionFile::from_json(&read(&solution)?)?;
            if sol.cost.is_none() {
                bail!("solution file has status {} and no paths", sol.status);
            }
            let tpg = build_tpg(&inst, &sol.paths())?;
            let dm = DelayModel {
                move_delay_prob: delay_prob,
                delay_range: (delay_min, delay_max),
                ..DelayModel::exact(seed)
            }
            .with_duration_noise(&tpg, duration_noise);
            let trace = simulate_execution(&tpg, &dm)?;
            write(&out, &trace.to_jsonl())?;
            let report = verify_trace(&trace, &inst);
            for v in &report.violations {
                println!("{v}");
            }
            println!("{} ticks, {}", trace.ticks, if report.is_ok() { "collision-free" } else { "violations found" });
            Ok(if report.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::TspSolve { problem, tour } => {
            let w = parse_atsp(&read(&problem)?)?;
            write(&tour, &write_tour(&solve_matrix(&w), "tour"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
