//! Problem-file parsing.
//!
//! Problem files are plain text: `[section]` headers followed by
//! `key = value` lines, `#` comments, and blank lines. The full schema is
//! documented in the README; the short version:
//!
//! ```text
//! [problem]    dimension = 2        name = ex_5_8 (optional)
//! [objectives] f1 = …  f2 = …       (expressions over x1..xn)
//! [cells]      cell = x1 >= -1, x2 >= 0   (one line per cell of the union)
//!              periodic = axis 1 period 6.283…  (optional replication)
//! [anchor]     x0 = -1, 2           index_set = 1 (optional, 1-based CSV)
//! [probe L]    x1 = t  x2 = t + 0.5  schedule = dyadic 21
//!              — or —  kind = explicit  point = -1, 1  point = -0.5, 2 …
//! [grid]       window = -1.5, 0.5, 0, 4   resolution = 33, 33
//! [tolerances] tol = 1e-7
//! ```

use pareto_tame_core::asymptotics::{default_schedule, ProbePath};
use pareto_tame_core::dsl::{parse, parse_param};
use pareto_tame_core::feasible::Periodic;
use pareto_tame_core::sections::GridSpec;
use pareto_tame_core::{Cell, Expression, FeasibleSet, VectorObjective};

/// A parse or validation failure, pointing at the offending line.
#[derive(Debug, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct ProblemError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

/// One probe path with its label from the section header.
#[derive(Debug, Clone)]
pub struct NamedProbe {
    pub label: String,
    pub path: ProbePath,
}

/// A fully assembled problem: objective, region, anchor, and optional
/// probes, grid window, and tolerance override.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub dim: usize,
    pub objectives: VectorObjective,
    pub region: FeasibleSet,
    pub x0: Vec<f64>,
    /// 0-based selected components; defaults to all of them.
    pub index_set: Vec<usize>,
    pub probes: Vec<NamedProbe>,
    pub grid: Option<GridSpec>,
    pub tol: Option<f64>,
}

impl Problem {
    /// The grid from the file, or a default window of ±8 around the anchor
    /// at 33 nodes per axis.
    pub fn grid_or_default(&self) -> GridSpec {
        match &self.grid {
            Some(g) => g.clone(),
            None => GridSpec::uniform(
                self.x0.iter().map(|&c| (c - 8.0, c + 8.0)).collect(),
                33,
            ),
        }
    }

    /// The probe paths in file order.
    pub fn paths(&self) -> Vec<ProbePath> {
        self.probes.iter().map(|p| p.path.clone()).collect()
    }

    /// Probes filtered to the given labels (all when `labels` is empty).
    pub fn selected_paths(&self, labels: &[String]) -> Result<Vec<ProbePath>, String> {
        if labels.is_empty() {
            return Ok(self.paths());
        }
        let mut out = Vec::new();
        for l in labels {
            match self.probes.iter().find(|p| &p.label == l) {
                Some(p) => out.push(p.path.clone()),
                None => {
                    let known: Vec<&str> =
                        self.probes.iter().map(|p| p.label.as_str()).collect();
                    return Err(format!(
                        "no probe labeled `{l}`; the file defines {known:?}"
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Raw key-value line, kept with its line number for error reporting.
struct Entry {
    line: usize,
    key: String,
    value: String,
}

/// A `[section]` block as it appeared in the file.
struct Section {
    line: usize,
    header: String,
    entries: Vec<Entry>,
}

/// Parses problem text (already read from `file`, which is only used in
/// error messages) into a validated [`Problem`].
pub fn parse_problem(file: &str, text: &str) -> Result<Problem, ProblemError> {
    let fail = |line: usize, message: String| ProblemError {
        file: file.to_string(),
        line,
        message,
    };

    // Pass 1: split into sections of key-value entries.
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| fail(line, "unterminated section header".to_string()))?
                .trim()
                .to_string();
            if header.is_empty() {
                return Err(fail(line, "empty section header".to_string()));
            }
            sections.push(Section {
                line,
                header,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(fail(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        // Guard against reading a constraint's `<=`/`>=` as the key split.
        let eq = if eq > 0 && matches!(content.as_bytes()[eq - 1], b'<' | b'>') {
            return Err(fail(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        } else {
            eq
        };
        let key = content[..eq].trim().to_string();
        let value = content[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(fail(line, "missing key before `=`".to_string()));
        }
        match sections.last_mut() {
            Some(s) => s.entries.push(Entry { line, key, value }),
            None => {
                return Err(fail(
                    line,
                    "entries must appear inside a [section]".to_string(),
                ))
            }
        }
    }

    // Pass 2: assemble.
    let mut name: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut objectives: Vec<(usize, Expression)> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut periodic: Option<Periodic> = None;
    let mut cell_lines: Vec<(usize, String)> = Vec::new();
    let mut x0: Option<Vec<f64>> = None;
    let mut index_set_raw: Option<(usize, Vec<f64>)> = None;
    let mut probes: Vec<NamedProbe> = Vec::new();
    let mut grid_window: Option<(usize, Vec<f64>)> = None;
    let mut grid_res: Option<(usize, Vec<f64>)> = None;
    let mut tol: Option<f64> = None;

    for s in &sections {
        let header = s.header.as_str();
        if header == "problem" {
            for e in &s.entries {
                match e.key.as_str() {
                    "dimension" => {
                        dim = Some(e.value.parse::<usize>().map_err(|_| {
                            fail(e.line, format!("dimension must be a positive integer, got `{}`", e.value))
                        })?);
                    }
                    "name" => name = Some(e.value.clone()),
                    other => {
                        return Err(fail(
                            e.line,
                            format!("unknown key `{other}` in [problem]"),
                        ))
                    }
                }
            }
        } else if header == "objectives" {
            for e in &s.entries {
                let idx = component_key(&e.key).ok_or_else(|| {
                    fail(e.line, format!("objective keys are f1, f2, …, got `{}`", e.key))
                })?;
                let expr = parse(&e.value)
                    .map_err(|err| fail(e.line, format!("{}: {err}", e.key)))?;
                objectives.push((idx, expr));
            }
        } else if header == "cells" {
            for e in &s.entries {
                match e.key.as_str() {
                    "cell" => cell_lines.push((e.line, e.value.clone())),
                    "periodic" => {
                        periodic = Some(parse_periodic(&e.value).map_err(|m| fail(e.line, m))?);
                    }
                    other => {
                        return Err(fail(e.line, format!("unknown key `{other}` in [cells]")))
                    }
                }
            }
        } else if header == "anchor" {
            for e in &s.entries {
                match e.key.as_str() {
                    "x0" => {
                        x0 = Some(parse_floats(&e.value).map_err(|m| fail(e.line, m))?);
                    }
                    "index_set" => {
                        index_set_raw = Some((
                            e.line,
                            parse_floats(&e.value).map_err(|m| fail(e.line, m))?,
                        ));
                    }
                    other => {
                        return Err(fail(e.line, format!("unknown key `{other}` in [anchor]")))
                    }
                }
            }
        } else if let Some(label) = header.strip_prefix("probe ") {
            let label = label.trim().to_string();
            if label.is_empty() {
                return Err(fail(s.line, "probe sections need a label: [probe name]".to_string()));
            }
            if probes.iter().any(|p| p.label == label) {
                return Err(fail(s.line, format!("duplicate probe label `{label}`")));
            }
            let path = parse_probe(s, dim, &fail)?;
            probes.push(NamedProbe { label, path });
        } else if header == "grid" {
            for e in &s.entries {
                match e.key.as_str() {
                    "window" => {
                        grid_window = Some((
                            e.line,
                            parse_floats(&e.value).map_err(|m| fail(e.line, m))?,
                        ));
                    }
                    "resolution" => {
                        grid_res = Some((
                            e.line,
                            parse_floats(&e.value).map_err(|m| fail(e.line, m))?,
                        ));
                    }
                    other => {
                        return Err(fail(e.line, format!("unknown key `{other}` in [grid]")))
                    }
                }
            }
        } else if header == "tolerances" {
            for e in &s.entries {
                match e.key.as_str() {
                    "tol" => {
                        tol = Some(e.value.parse::<f64>().map_err(|_| {
                            fail(e.line, format!("tol must be a number, got `{}`", e.value))
                        })?);
                    }
                    other => {
                        return Err(fail(e.line, format!("unknown key `{other}` in [tolerances]")))
                    }
                }
            }
        } else {
            return Err(fail(s.line, format!("unknown section [{header}]")));
        }
    }

    let dim = dim.ok_or_else(|| fail(1, "missing [problem] dimension".to_string()))?;
    if dim == 0 {
        return Err(fail(1, "dimension must be at least 1".to_string()));
    }

    // Objectives must be f1..fs without gaps.
    objectives.sort_by_key(|(i, _)| *i);
    if objectives.is_empty() {
        return Err(fail(1, "missing [objectives] section".to_string()));
    }
    for (pos, (idx, _)) in objectives.iter().enumerate() {
        if *idx != pos {
            return Err(fail(
                1,
                format!("objectives must be named f1..f{} without gaps", objectives.len()),
            ));
        }
    }
    let exprs: Vec<Expression> = objectives.into_iter().map(|(_, e)| e).collect();
    let objectives = VectorObjective::new(dim, exprs)
        .map_err(|e| fail(1, format!("objectives: {e}")))?;

    // Cells.
    for (line, text) in &cell_lines {
        cells.push(parse_cell(text, dim).map_err(|m| fail(*line, m))?);
    }
    if cells.is_empty() {
        return Err(fail(1, "missing [cells] section (use `cell = free` for R^n)".to_string()));
    }
    let region = match periodic {
        Some(p) => FeasibleSet::with_periodic(dim, cells, p),
        None => FeasibleSet::new(dim, cells),
    }
    .map_err(|e| fail(1, format!("cells: {e}")))?;

    // Anchor.
    let x0 = x0.ok_or_else(|| fail(1, "missing [anchor] x0".to_string()))?;
    if x0.len() != dim {
        return Err(fail(
            1,
            format!("x0 has {} coordinates for dimension {dim}", x0.len()),
        ));
    }

    // Index set: 1-based in the file, 0-based internally.
    let index_set = match index_set_raw {
        None => (0..objectives.len()).collect(),
        Some((line, vals)) => {
            let mut out = Vec::new();
            for v in vals {
                if v.fract() != 0.0 || v < 1.0 || v > objectives.len() as f64 {
                    return Err(fail(
                        line,
                        format!(
                            "index_set entries are 1-based component numbers 1..{}, got {v}",
                            objectives.len()
                        ),
                    ));
                }
                out.push(v as usize - 1);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    };

    // Grid.
    let grid = match (grid_window, grid_res) {
        (None, None) => None,
        (Some((line, flat)), res) => {
            if flat.len() != 2 * dim {
                return Err(fail(
                    line,
                    format!(
                        "window needs {} numbers (lo, hi per axis), got {}",
                        2 * dim,
                        flat.len()
                    ),
                ));
            }
            let mut window = Vec::new();
            for axis in 0..dim {
                let (lo, hi) = (flat[2 * axis], flat[2 * axis + 1]);
                if !(lo < hi) {
                    return Err(fail(
                        line,
                        format!("window for x{} is not ordered: {lo} .. {hi}", axis + 1),
                    ));
                }
                window.push((lo, hi));
            }
            let resolution = match res {
                None => vec![33; dim],
                Some((rline, vals)) => parse_resolution(&vals, dim).map_err(|m| fail(rline, m))?,
            };
            Some(GridSpec { window, resolution })
        }
        (None, Some((line, _))) => {
            return Err(fail(line, "resolution given without a window".to_string()));
        }
    };

    let name = name.unwrap_or_else(|| {
        std::path::Path::new(file)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "problem".to_string())
    });

    Ok(Problem {
        name,
        dim,
        objectives,
        region,
        x0,
        index_set,
        probes,
        grid,
        tol,
    })
}

/// `f3` → 2.
fn component_key(key: &str) -> Option<usize> {
    let n: usize = key.strip_prefix('f')?.parse().ok()?;
    (n >= 1).then(|| n - 1)
}

/// Comma-separated float list.
pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            match p {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => p
                    .parse::<f64>()
                    .map_err(|_| format!("`{p}` is not a number")),
            }
        })
        .collect()
}

/// Resolution list: positive integers, broadcast from one entry.
pub fn parse_resolution(vals: &[f64], dim: usize) -> Result<Vec<usize>, String> {
    let ints: Vec<usize> = vals
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 2.0 && v <= 100_000.0 {
                Ok(v as usize)
            } else {
                Err(format!("resolution entries must be integers ≥ 2, got {v}"))
            }
        })
        .collect::<Result<_, _>>()?;
    match ints.len() {
        1 => Ok(vec![ints[0]; dim]),
        n if n == dim => Ok(ints),
        n => Err(format!("resolution has {n} entries for dimension {dim}")),
    }
}

/// `axis 1 period 6.28…` (axis is 1-based in the file).
fn parse_periodic(s: &str) -> Result<Periodic, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "axis" || parts[2] != "period" {
        return Err(format!(
            "periodic syntax is `axis <k> period <step>`, got `{s}`"
        ));
    }
    let axis: usize = parts[1]
        .parse()
        .map_err(|_| format!("`{}` is not an axis number", parts[1]))?;
    if axis == 0 {
        return Err("axes are numbered from 1".to_string());
    }
    let period: f64 = parts[3]
        .parse()
        .map_err(|_| format!("`{}` is not a number", parts[3]))?;
    Ok(Periodic {
        axis: axis - 1,
        period,
    })
}

/// One `cell = …` value: `free`, or comma-separated `lhs <= rhs` /
/// `lhs >= rhs` constraints classified into box, affine, and smooth parts.
fn parse_cell(text: &str, dim: usize) -> Result<Cell, String> {
    if text.trim() == "free" {
        return Ok(Cell::free(dim));
    }
    let mut cell = Cell::free(dim);
    for atom in split_atoms(text) {
        let atom = atom.trim();
        if atom.is_empty() {
            return Err("empty constraint in cell".to_string());
        }
        let (lhs, rhs, flip) = if let Some(p) = atom.find("<=") {
            (&atom[..p], &atom[p + 2..], false)
        } else if let Some(p) = atom.find(">=") {
            (&atom[..p], &atom[p + 2..], true)
        } else {
            return Err(format!("constraint `{atom}` needs `<=` or `>=`"));
        };
        let l = parse(lhs.trim()).map_err(|e| format!("in `{atom}`: {e}"))?;
        let r = parse(rhs.trim()).map_err(|e| format!("in `{atom}`: {e}"))?;
        // Normalize to g ≤ 0.
        let g = if flip {
            Expression::Sub(Box::new(r), Box::new(l))
        } else {
            Expression::Sub(Box::new(l), Box::new(r))
        };
        if let Some(i) = g.max_var() {
            if i >= dim {
                return Err(format!("constraint `{atom}` uses x{}", i + 1));
            }
        }
        match linear_profile(&g, dim) {
            Some((a, b)) => {
                let nonzero: Vec<usize> =
                    (0..dim).filter(|&i| a[i] != 0.0).collect();
                match nonzero.len() {
                    0 => {
                        if b > 0.0 {
                            return Err(format!("constraint `{atom}` is never satisfied"));
                        }
                        // Constantly true: nothing to record.
                    }
                    1 => {
                        // c·xi + b ≤ 0: a one-sided box bound.
                        let i = nonzero[0];
                        let c = a[i];
                        let bound = -b / c;
                        if c > 0.0 {
                            cell.upper[i] = cell.upper[i].min(bound);
                        } else {
                            cell.lower[i] = cell.lower[i].max(bound);
                        }
                    }
                    _ => cell.affine.push((a, -b)),
                }
            }
            None => {
                if !g.is_smooth_tree() {
                    return Err(format!(
                        "constraint `{atom}` contains abs/max/min; model that shape \
                         as a union of cells instead"
                    ));
                }
                cell.smooth.push(g);
            }
        }
    }
    Ok(cell)
}

/// Splits a cell line on commas that are not inside parentheses (so
/// `max(x1, x2) <= 1` stays one atom).
fn split_atoms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

/// Structural affine extraction: `Some((a, b))` when the expression is
/// exactly `a·x + b`, `None` otherwise. Evaluation-free, so a nonlinear
/// expression can never masquerade as affine.
fn linear_profile(e: &Expression, dim: usize) -> Option<(Vec<f64>, f64)> {
    use Expression as E;
    match e {
        E::Const(c) => Some((vec![0.0; dim], *c)),
        E::Var(i) => {
            let mut a = vec![0.0; dim];
            a[*i] = 1.0;
            Some((a, 0.0))
        }
        E::Add(l, r) => {
            let (la, lb) = linear_profile(l, dim)?;
            let (ra, rb) = linear_profile(r, dim)?;
            Some((
                la.iter().zip(&ra).map(|(x, y)| x + y).collect(),
                lb + rb,
            ))
        }
        E::Sub(l, r) => {
            let (la, lb) = linear_profile(l, dim)?;
            let (ra, rb) = linear_profile(r, dim)?;
            Some((
                la.iter().zip(&ra).map(|(x, y)| x - y).collect(),
                lb - rb,
            ))
        }
        E::Neg(a) => {
            let (aa, ab) = linear_profile(a, dim)?;
            Some((aa.iter().map(|x| -x).collect(), -ab))
        }
        E::Mul(l, r) => {
            // One side must be a pure constant.
            if let Some(c) = const_value(l) {
                let (ra, rb) = linear_profile(r, dim)?;
                Some((ra.iter().map(|x| c * x).collect(), c * rb))
            } else if let Some(c) = const_value(r) {
                let (la, lb) = linear_profile(l, dim)?;
                Some((la.iter().map(|x| c * x).collect(), c * lb))
            } else {
                None
            }
        }
        E::Pow(a, 1) => linear_profile(a, dim),
        _ => None,
    }
}

/// The value of a variable-free expression.
fn const_value(e: &Expression) -> Option<f64> {
    if e.max_var().is_none() {
        Some(e.eval(&[]))
    } else {
        None
    }
}

/// Parses one `[probe L]` section body.
fn parse_probe(
    s: &Section,
    dim: Option<usize>,
    fail: &impl Fn(usize, String) -> ProblemError,
) -> Result<ProbePath, ProblemError> {
    let dim = dim.ok_or_else(|| {
        fail(s.line, "[problem] dimension must come before probe sections".to_string())
    })?;
    let mut kind_explicit = false;
    let mut coords: Vec<Option<(usize, Expression)>> = vec![None; dim];
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut schedule: Option<Vec<f64>> = None;

    for e in &s.entries {
        match e.key.as_str() {
            "kind" => match e.value.as_str() {
                "explicit" => kind_explicit = true,
                "parametric" => {}
                other => {
                    return Err(fail(
                        e.line,
                        format!("probe kind is `parametric` or `explicit`, got `{other}`"),
                    ))
                }
            },
            "point" => {
                let p = parse_floats(&e.value).map_err(|m| fail(e.line, m))?;
                if p.len() != dim {
                    return Err(fail(
                        e.line,
                        format!("point has {} coordinates for dimension {dim}", p.len()),
                    ));
                }
                points.push(p);
            }
            "schedule" => {
                schedule = Some(parse_schedule(&e.value).map_err(|m| fail(e.line, m))?);
            }
            key => match coordinate_key(key, dim) {
                Some(axis) => {
                    let expr = parse_param(&e.value)
                        .map_err(|err| fail(e.line, format!("{key}: {err}")))?;
                    coords[axis] = Some((e.line, expr));
                }
                None => {
                    return Err(fail(
                        e.line,
                        format!("unknown probe key `{key}` (x1..x{dim}, point, schedule, kind)"),
                    ))
                }
            },
        }
    }

    if kind_explicit || !points.is_empty() {
        if coords.iter().any(Option::is_some) {
            return Err(fail(
                s.line,
                "a probe is either explicit (point lines) or parametric (x1.. lines), not both"
                    .to_string(),
            ));
        }
        if schedule.is_some() {
            return Err(fail(
                s.line,
                "explicit probes carry their points; schedule applies to parametric probes"
                    .to_string(),
            ));
        }
        if points.is_empty() {
            return Err(fail(s.line, "explicit probe has no point lines".to_string()));
        }
        return Ok(ProbePath::Explicit { points });
    }

    let mut exprs = Vec::new();
    for (axis, slot) in coords.iter().enumerate() {
        match slot {
            Some((_, e)) => exprs.push(e.clone()),
            None => {
                return Err(fail(
                    s.line,
                    format!("parametric probe is missing x{}", axis + 1),
                ))
            }
        }
    }
    Ok(ProbePath::Parametric {
        exprs,
        schedule: schedule.unwrap_or_else(default_schedule),
    })
}

/// `x2` → axis 1, if within the dimension.
fn coordinate_key(key: &str, dim: usize) -> Option<usize> {
    let n: usize = key.strip_prefix('x')?.parse().ok()?;
    (n >= 1 && n <= dim).then(|| n - 1)
}

/// `linear <from> <to> <count>` or `dyadic <count>` (2^0 … 2^(count−1)).
fn parse_schedule(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.as_slice() {
        ["linear", from, to, count] => {
            let a: f64 = from.parse().map_err(|_| format!("`{from}` is not a number"))?;
            let b: f64 = to.parse().map_err(|_| format!("`{to}` is not a number"))?;
            let n: usize = count.parse().map_err(|_| format!("`{count}` is not a count"))?;
            if n < 2 {
                return Err("linear schedules need at least 2 points".to_string());
            }
            if !(a < b) {
                return Err(format!("linear schedule is not increasing: {a} .. {b}"));
            }
            let step = (b - a) / (n - 1) as f64;
            Ok((0..n).map(|i| a + step * i as f64).collect())
        }
        ["dyadic", count] => {
            let n: usize = count.parse().map_err(|_| format!("`{count}` is not a count"))?;
            if n < 2 {
                return Err("dyadic schedules need at least 2 points".to_string());
            }
            if n > 64 {
                return Err("dyadic schedules cap at 64 doublings".to_string());
            }
            Ok((0..n).map(|k| (2f64).powi(k as i32)).collect())
        }
        _ => Err(format!(
            "schedule syntax is `linear <from> <to> <count>` or `dyadic <count>`, got `{s}`"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pareto_tame_core::Region;

    const MINIMAL: &str = "\
[problem]
dimension = 2
name = demo

[objectives]
f1 = x1^2 + x2^2
f2 = abs(x1)

[cells]
cell = x1 >= 0, x2 >= 0

[anchor]
x0 = 1, 1
";

    #[test]
    fn minimal_file_parses() {
        let p = parse_problem("demo.prob", MINIMAL).unwrap();
        assert_eq!(p.name, "demo");
        assert_eq!(p.dim, 2);
        assert_eq!(p.objectives.len(), 2);
        assert_eq!(p.index_set, vec![0, 1]);
        assert!(p.grid.is_none());
        assert!(p.region.contains(&[2.0, 3.0], 1e-9));
        assert!(!p.region.contains(&[-1.0, 3.0], 1e-9));
    }

    #[test]
    fn constraints_classify_into_box_affine_smooth() {
        let text = "\
[problem]
dimension = 2

[objectives]
f1 = x1

[cells]
cell = x1 >= -1, 2*x1 - 6 <= 0, x1 + x2 <= 3, x1^2 + x2^2 <= 4

[anchor]
x0 = 0, 0
";
        let p = parse_problem("t.prob", text).unwrap();
        let cell = &p.region.cells()[0];
        assert_eq!(cell.lower[0], -1.0);
        assert_eq!(cell.upper[0], 3.0); // 2*x1 ≤ 6 folded into the box
        assert_eq!(cell.affine.len(), 1);
        assert_eq!(cell.smooth.len(), 1);
    }

    #[test]
    fn kinked_cell_constraints_are_refused() {
        let text = "\
[problem]
dimension = 1

[objectives]
f1 = x1

[cells]
cell = abs(x1) <= 1

[anchor]
x0 = 0
";
        let err = parse_problem("t.prob", text).unwrap_err();
        assert!(err.message.contains("abs"), "{err}");
    }

    #[test]
    fn probes_parse_both_kinds() {
        let text = "\
[problem]
dimension = 2

[objectives]
f1 = x1

[cells]
cell = free

[anchor]
x0 = 0, 0

[probe walk]
x1 = t
x2 = t + 0.5
schedule = linear 0 4 5

[probe steps]
kind = explicit
point = 1, 2
point = 3, 4
";
        let p = parse_problem("t.prob", text).unwrap();
        assert_eq!(p.probes.len(), 2);
        match &p.probes[0].path {
            ProbePath::Parametric { exprs, schedule } => {
                assert_eq!(exprs.len(), 2);
                assert_eq!(schedule, &vec![0.0, 1.0, 2.0, 3.0, 4.0]);
            }
            other => panic!("expected parametric, got {other:?}"),
        }
        match &p.probes[1].path {
            ProbePath::Explicit { points } => assert_eq!(points.len(), 2),
            other => panic!("expected explicit, got {other:?}"),
        }
        assert!(p.selected_paths(&["walk".to_string()]).unwrap().len() == 1);
        assert!(p.selected_paths(&["nope".to_string()]).is_err());
    }

    #[test]
    fn one_based_index_sets_convert() {
        let text = "\
[problem]
dimension = 1

[objectives]
f1 = x1
f2 = x1^2

[cells]
cell = free

[anchor]
x0 = 0
index_set = 2
";
        let p = parse_problem("t.prob", text).unwrap();
        assert_eq!(p.index_set, vec![1]);
    }

    #[test]
    fn errors_carry_the_line_number() {
        let text = "[problem]\ndimension = 2\n\n[objectives]\nf1 = x1 +\n";
        let err = parse_problem("bad.prob", text).unwrap_err();
        assert_eq!(err.line, 5);
        assert!(err.to_string().contains("bad.prob:5"));
    }

    #[test]
    fn periodic_and_grid_round_trip() {
        let text = "\
[problem]
dimension = 1

[objectives]
f1 = sin(x1)

[cells]
cell = x1 >= 0, x1 <= 1
periodic = axis 1 period 2

[anchor]
x0 = 0.5

[grid]
window = -4, 130
resolution = 537
";
        let p = parse_problem("t.prob", text).unwrap();
        assert!(p.region.periodic().is_some());
        assert!(p.region.contains(&[6.5], 1e-9));
        let g = p.grid.unwrap();
        assert_eq!(g.window, vec![(-4.0, 130.0)]);
        assert_eq!(g.resolution, vec![537]);
    }
}
