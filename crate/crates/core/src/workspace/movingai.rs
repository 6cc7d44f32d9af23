//! MovingAI `.map` and `.scen` (version 1) formats.
//!
//! Scenario coordinates follow the MovingAI convention: `x` is the column
//! and `y` the row, so a cell maps to vertex `width * y + x`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::workspace::Grid;
use crate::VertexId;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn header_value(line_no: usize, line: Option<&str>, key: &str) -> Result<usize> {
    let line = line.ok_or_else(|| parse_err(line_no, format!("missing `{key}` header")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(parse_err(line_no, format!("expected `{key} <n>`, got `{line}`")));
    }
    let value = parts.next().ok_or_else(|| parse_err(line_no, format!("`{key}` has no value")))?;
    value.parse().map_err(|_| parse_err(line_no, format!("bad `{key}` value `{value}`")))
}

/// Parses a MovingAI map. `.` and `G` are passable; `@`, `O`, `T` and `W`
/// are blocked. Errors carry 1-based line numbers.
pub fn parse_map(text: &str) -> Result<Grid> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| parse_err(1, "empty map"))?;
    if first.split_whitespace().next() != Some("type") {
        return Err(parse_err(1, format!("expected `type`, got `{first}`")));
    }
    let height = header_value(2, lines.next(), "height")?;
    let width = header_value(3, lines.next(), "width")?;
    match lines.next() {
        Some(l) if l.trim() == "map" => {}
        Some(l) => return Err(parse_err(4, format!("expected `map`, got `{l}`"))),
        None => return Err(parse_err(4, "missing `map` line")),
    }
    if width == 0 || height == 0 {
        return Err(parse_err(2, "dimensions must be positive"));
    }
    let mut passable = Vec::with_capacity(width * height);
    for row in 0..height {
        let line_no = 5 + row;
        let line = lines.next().ok_or_else(|| parse_err(line_no, format!("expected {height} rows, found {row}")))?;
        let line = line.trim_end_matches('\r');
        let glyphs: Vec<char> = line.chars().collect();
        if glyphs.len() != width {
            return Err(parse_err(line_no, format!("row has {} cells, expected {width}", glyphs.len())));
        }
        for g in glyphs {
            passable.push(match g {
                '.' | 'G' => true,
                '@' | 'O' | 'T' | 'W' => false,
                other => return Err(parse_err(line_no, format!("unknown glyph `{other}`"))),
            });
        }
    }
    if let Some((i, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(5 + height + i, format!("unexpected trailing row `{extra}`")));
    }
    Grid::new(width, height, passable).map_err(|e| parse_err(5, e.to_string()))
}

pub fn write_map(grid: &Grid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "type octile");
    let _ = writeln!(out, "height {}", grid.height());
    let _ = writeln!(out, "width {}", grid.width());
    let _ = writeln!(out, "map");
    for row in 0..grid.height() {
        for col in 0..grid.width() {
            out.push(if grid.is_passable(grid.vertex(row, col)) { '.' } else { '@' });
        }
        out.push('\n');
    }
    out
}

/// Parses a version-1 scenario into `(start, goal)` vertex pairs in file
/// order. Entry indices in errors are 0-based.
pub fn parse_scen(text: &str, grid: &Grid) -> Result<Vec<(VertexId, VertexId)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.split_whitespace().collect::<Vec<_>>() == ["version", "1"] => {}
        Some((_, l)) if l.trim().starts_with("version") => {
            return Err(parse_err(1, format!("unsupported scenario `{}`", l.trim())))
        }
        _ => return Err(parse_err(1, "missing `version 1` header")),
    }
    let mut pairs = Vec::new();
    for (line_idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let entry = pairs.len();
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 9 {
            return Err(parse_err(line_idx + 1, format!("entry {entry} has {} fields, expected 9", fields.len())));
        }
        let num = |i: usize| -> Result<usize> {
            fields[i].trim().parse().map_err(|_| Error::Scenario {
                entry,
                msg: format!("field {} is not a coordinate: `{}`", i + 1, fields[i]),
            })
        };
        let (sx, sy, gx, gy) = (num(4)?, num(5)?, num(6)?, num(7)?);
        let cell = |x: usize, y: usize| -> Result<VertexId> {
            if x >= grid.width() || y >= grid.height() {
                return Err(Error::Scenario {
                    entry,
                    msg: format!("({x}, {y}) outside {}x{}", grid.width(), grid.height()),
                });
            }
            let v = grid.vertex(y, x);
            if !grid.is_passable(v) {
                return Err(Error::Scenario { entry, msg: format!("({x}, {y}) is blocked") });
            }
            Ok(v)
        };
        pairs.push((cell(sx, sy)?, cell(gx, gy)?));
    }
    Ok(pairs)
}
