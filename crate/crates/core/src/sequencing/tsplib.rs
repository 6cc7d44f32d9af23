use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::sequencing::{ArcSet, SequencingBackend, Tour, TransformedGraph};

/// Weight shift that makes forced and forbidden arcs dominate any tour:
/// every cluster-contiguous tour costs less than this.
fn penalty(g: &TransformedGraph) -> i64 {
    (g.offset() + g.big_m()) as i64
}

/// Weight matrix of the external encoding. Forced arcs are lowered by the
/// penalty, forbidden and absent arcs raised by a multiple of it.
pub fn encoded_matrix(g: &TransformedGraph, arcs: &ArcSet) -> Vec<Vec<i64>> {
    let n = g.num_nodes();
    let p = penalty(g);
    let high = p * (arcs.include.len() as i64 + 2);
    let mut w = vec![vec![0i64; n]; n];
    for (u, row) in w.iter_mut().enumerate() {
        for (v, cell) in row.iter_mut().enumerate() {
            *cell = match g.arc(u, v) {
                _ if u == v => high,
                Some(c) => c as i64,
                None => high,
            };
        }
    }
    for &(u, v) in &arcs.exclude {
        w[u][v] = high + w[u][v].min(p);
    }
    for &(u, v) in &arcs.include {
        w[u][v] -= p;
    }
    w
}

/// TSPLIB ATSP problem in explicit full-matrix form.
pub fn write_atsp(g: &TransformedGraph, arcs: &ArcSet, name: &str) -> String {
    let w = encoded_matrix(g, arcs);
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {name}");
    let _ = writeln!(out, "TYPE: ATSP");
    let _ = writeln!(out, "DIMENSION: {}", w.len());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
    let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: FULL_MATRIX");
    let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
    for row in &w {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out.push_str("EOF\n");
    out
}

/// Reads an explicit full-matrix ATSP problem.
pub fn parse_atsp(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut dim = None;
    let mut lines = text.lines().enumerate();
    for (no, line) in lines.by_ref() {
        let line = line.trim();
        if let Some((key, value)) = line.split_once(':') {
            let (key, value) = (key.trim(), value.trim());
            match key {
                "DIMENSION" => {
                    dim = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Parse { line: no + 1, msg: "bad DIMENSION".into() })?,
                    )
                }
                "EDGE_WEIGHT_FORMAT" if value != "FULL_MATRIX" => {
                    return Err(Error::Parse { line: no + 1, msg: format!("unsupported format {value}") })
                }
                _ => {}
            }
        } else if line == "EDGE_WEIGHT_SECTION" {
            break;
        }
    }
    let n = dim.ok_or(Error::Parse { line: 0, msg: "missing DIMENSION".into() })?;
    let mut values = Vec::with_capacity(n * n);
    for (no, line) in lines {
        if line.trim() == "EOF" || values.len() == n * n {
            break;
        }
        for tok in line.split_whitespace() {
            values
                .push(tok.parse::<i64>().map_err(|_| Error::Parse { line: no + 1, msg: format!("bad weight {tok}") })?);
        }
    }
    if values.len() != n * n {
        return Err(Error::Parse { line: 0, msg: format!("expected {} weights, got {}", n * n, values.len()) });
    }
    Ok(values.chunks(n).map(|r| r.to_vec()).collect())
}

/// TSPLIB tour file with 1-based node ids.
pub fn write_tour(nodes: &[usize], name: &str) -> String {
    let mut out = format!("NAME: {name}\nTYPE: TOUR\nDIMENSION: {}\nTOUR_SECTION\n", nodes.len());
    for &u in nodes {
        let _ = writeln!(out, "{}", u + 1);
    }
    out.push_str("-1\nEOF\n");
    out
}

/// Reads the node order of a TSPLIB tour file (0-based).
pub fn parse_tour(text: &str) -> Result<Vec<usize>> {
    let mut in_section = false;
    let mut nodes = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if !in_section {
            in_section = line == "TOUR_SECTION";
            continue;
        }
        for tok in line.split_whitespace() {
            let id: i64 = tok.parse().map_err(|_| Error::Parse { line: no + 1, msg: format!("bad node {tok}") })?;
            if id == -1 {
                return Ok(nodes);
            }
            if id < 1 {
                return Err(Error::Parse { line: no + 1, msg: format!("bad node {id}") });
            }
            nodes.push(id as usize - 1);
        }
    }
    if in_section {
        Ok(nodes)
    } else {
        Err(Error::Parse { line: 0, msg: "missing TOUR_SECTION".into() })
    }
}

/// Rotates a tour to start at node 0.
pub fn rotate_to_first(mut nodes: Vec<usize>) -> Vec<usize> {
    if let Some(p) = nodes.iter().position(|&u| u == 0) {
        nodes.rotate_left(p);
    }
    nodes
}

/// Runs an external ATSP solver as `program args… <problem> <tour>`.
///
/// The tour read back is checked against the constraints and priced on
/// the original weights. A tour that breaks a constraint or a cluster is
/// reported as "no tour".
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl SequencingBackend for ExternalSolver {
    fn solve(&self, g: &TransformedGraph, arcs: &ArcSet, deadline: Option<Instant>) -> Result<Option<Tour>> {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::Timeout);
        }
        let dir = tempfile::tempdir()?;
        let problem = dir.path().join("problem.atsp");
        let tour_path = dir.path().join("problem.tour");
        std::fs::write(&problem, write_atsp(g, arcs, "mcpfd"))?;
        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(&problem)
            .arg(&tour_path)
            .status()
            .map_err(|e| Error::ExternalSolver(format!("{}: {e}", self.program.display())))?;
        if !status.success() {
            return Err(Error::ExternalSolver(format!("{} exited with {status}", self.program.display())));
        }
        let nodes = rotate_to_first(parse_tour(&std::fs::read_to_string(&tour_path)?)?);
        let mut seen = vec![false; g.num_nodes()];
        if nodes.len() != g.num_nodes()
            || nodes.iter().any(|&u| u >= seen.len() || std::mem::replace(&mut seen[u], true))
        {
            return Err(Error::ExternalSolver("tour is not a permutation".into()));
        }
        let used: Vec<(usize, usize)> = (0..nodes.len()).map(|k| (nodes[k], nodes[(k + 1) % nodes.len()])).collect();
        let ok = arcs.include.iter().all(|e| used.contains(e)) && !arcs.exclude.iter().any(|e| used.contains(e));
        match g.tour_cost(&nodes) {
            Some(cost) if ok && cost < g.offset() + g.big_m() => Ok(Some(Tour { cost, nodes })),
            _ => Ok(None),
        }
    }
}

/// Exact solver for a small explicit ATSP matrix; returns a minimum tour
/// from node 0. Used by the bundled stand-in external solver.
pub fn solve_matrix(w: &[Vec<i64>]) -> Vec<usize> {
    let n = w.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let min_out: Vec<i64> =
        w.iter().enumerate().map(|(u, r)| (0..n).filter(|&v| v != u).map(|v| r[v]).min().unwrap()).collect();
    let mut best = i64::MAX;
    let mut best_tour = Vec::new();
    let mut path = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        w: &[Vec<i64>],
        min_out: &[i64],
        path: &mut Vec<usize>,
        used: &mut [bool],
        g: i64,
        best: &mut i64,
        best_tour: &mut Vec<usize>,
    ) {
        let n = w.len();
        let cur = *path.last().unwrap();
        if path.len() == n {
            let total = g + w[cur][0];
            if total < *best {
                *best = total;
                *best_tour = path.clone();
            }
            return;
        }
        let lb: i64 = min_out[cur] + (0..n).filter(|&v| !used[v]).map(|v| min_out[v]).sum::<i64>();
        if g + lb >= *best {
            return;
        }
        let mut order: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
        order.sort_by_key(|&v| w[cur][v]);
        for v in order {
            used[v] = true;
            path.push(v);
            rec(w, min_out, path, used, g + w[cur][v], best, best_tour);
            path.pop();
            used[v] = false;
        }
    }
    rec(w, &min_out, &mut path, &mut used, 0, &mut best, &mut best_tour);
    best_tour
}
