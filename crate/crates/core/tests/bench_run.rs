use std::path::Path;

use mcpfd::bench::{run_benchmark, Algorithm, BenchConfig, BenchReport};
use mcpfd::cbss::Branching;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

#[test]
fn toy_config_reproduces_both_costs() {
    let text = std::fs::read_to_string(fixtures().join("toy_bench.toml")).unwrap();
    let cfg = BenchConfig::from_toml(&text).unwrap();
    let report = run_benchmark(&cfg, fixtures()).unwrap();
    let cost = |alg| report.rows.iter().find(|r| r.algorithm == alg).and_then(|r| r.cost);
    assert_eq!(cost(Algorithm::CbssD), Some(18));
    assert_eq!(cost(Algorithm::CbssTpg), Some(19));
    let ratios: Vec<f64> = report.cost_ratios().into_values().collect();
    assert_eq!(ratios.len(), 1);
    assert!((ratios[0] - 100.0 / 19.0).abs() < 1e-9);

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let back = BenchReport::read_csv(csv.as_slice()).unwrap();
    assert_eq!(back.rows, report.rows);
}

#[test]
fn generated_grid_runs_both_rules() {
    let text = r#"
        maps = ["random-32-32-20.map"]
        scens = ["random-32-32-20-random-1.scen"]
        scenes = [2]
        agents = [3]
        targets = [4]
        taus = ["5"]
        seeds = [0, 1]
        algorithms = ["cbss-d"]
        branching = ["new", "old"]
        time_limit = 30
        workers = 2
    "#;
    let cfg = BenchConfig::from_toml(text).unwrap();
    let report = run_benchmark(&cfg, fixtures()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows.iter().all(|r| r.status == "solved"), "{:?}", report.rows);
    assert_eq!(report.conflict_pairs().len(), 2);
    let cost = |seed: &str, rule| report.rows.iter().find(|r| r.seed == seed && r.branching == rule).unwrap().cost;
    for seed in ["0", "1"] {
        assert_eq!(cost(seed, Branching::New), cost(seed, Branching::Old), "seed {seed}");
    }
}
