//! Deterministic rendering of analysis results: fixed-precision text for
//! stdout and round-trip CSV files for `--out`.
//!
//! Reals in text go through [`fmt12`] (12 significant digits, scientific);
//! reals in CSV go through Rust's shortest round-trip `Display`. Everything
//! here is a pure function of its inputs, so two runs over the same problem
//! file produce byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use pareto_tame_core::asymptotics::{
    ConditionReport, ConditionVerdict, LimitEstimate, LimitMode, LimitWitness, PathStatus,
    StationaryValues,
};
use pareto_tame_core::existence::{
    Conclusion, EquivalenceReport, ExistenceReport, InclusionReport, InclusionVerdict,
    SufficiencyReport,
};
use pareto_tame_core::sections::{
    BoundedVerdict, DescentOutcome, DescentTrace, FrontReport, IndexSetReport, SectionReport,
};
use pareto_tame_core::stationarity::{NuValue, StationarityError, TangencyCertificate};

/// 12 significant digits, scientific notation, with zero normalized (no
/// `-0`). Used for every real in text reports.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{v:.11e}")
}

/// `(a, b, c)` with [`fmt12`] entries.
pub fn fmt_point(p: &[f64]) -> String {
    let mut s = String::from("(");
    for (i, v) in p.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&fmt12(*v));
    }
    s.push(')');
    s
}

/// Round-trip text for CSV cells: shortest representation that parses back
/// to the same bits.
pub fn csv_num(v: f64) -> String {
    format!("{v}")
}

/// A labeled `key = value` line at two-space indent.
pub fn line(buf: &mut String, key: &str, value: impl AsRef<str>) {
    let _ = writeln!(buf, "  {key} = {}", value.as_ref());
}

pub fn heading(buf: &mut String, text: &str) {
    let _ = writeln!(buf, "[{text}]");
}

// ---------------------------------------------------------------------------
// Stationarity residuals

pub fn render_nu(buf: &mut String, x: &[f64], v: &NuValue) {
    line(buf, "point", fmt_point(x));
    line(buf, "nu", fmt12(v.value));
    line(buf, "lower_bound", fmt12(v.lower_bound));
    line(buf, "exact", v.exact.to_string());
    line(buf, "converged", v.converged.to_string());
    line(buf, "marginal", v.marginal.to_string());
    line(buf, "alpha", fmt_point(&v.alpha));
    line(buf, "witness", fmt_point(&v.witness));
    line(buf, "cone", v.cone_index.to_string());
}

pub fn render_tangency(buf: &mut String, x: &[f64], c: &TangencyCertificate) {
    line(buf, "point", fmt_point(x));
    line(buf, "residual", fmt12(c.residual));
    line(buf, "lower_bound", fmt12(c.lower_bound));
    line(buf, "member", c.member.to_string());
    line(buf, "exact", c.exact.to_string());
    line(buf, "marginal", c.marginal.to_string());
    line(buf, "alpha", fmt_point(&c.alpha));
    line(buf, "mu", fmt12(c.mu));
    line(
        buf,
        "branch",
        if c.branch_positive { "mu >= 0" } else { "mu <= 0" },
    );
}

/// Sweep summary: how many grid members were evaluated, the minimum, and
/// how many residuals vanished.
pub fn render_nu_sweep(
    buf: &mut String,
    points: &[Vec<f64>],
    results: &[Result<NuValue, StationarityError>],
    tol: f64,
) {
    let evaluated = results.iter().filter(|r| r.is_ok()).count();
    line(buf, "grid_members", points.len().to_string());
    line(buf, "evaluated", evaluated.to_string());
    line(buf, "skipped", (points.len() - evaluated).to_string());
    let best = results
        .iter()
        .zip(points)
        .filter_map(|(r, p)| r.as_ref().ok().map(|v| (v, p)))
        .min_by(|a, b| a.0.value.total_cmp(&b.0.value));
    match best {
        Some((v, p)) => {
            line(buf, "min_nu", fmt12(v.value));
            line(buf, "argmin", fmt_point(p));
            line(buf, "argmin_exact", v.exact.to_string());
            let zeros = results
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .filter(|v| v.value <= tol)
                .count();
            let exact_zeros = results
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .filter(|v| v.value <= tol && v.exact)
                .count();
            line(buf, "zeros", zeros.to_string());
            line(buf, "exact_zeros", exact_zeros.to_string());
        }
        None => line(buf, "min_nu", "none (no grid member evaluated)"),
    }
}

pub fn render_tangency_sweep(
    buf: &mut String,
    points: &[Vec<f64>],
    results: &[Result<TangencyCertificate, StationarityError>],
) {
    let evaluated = results.iter().filter(|r| r.is_ok()).count();
    line(buf, "grid_members", points.len().to_string());
    line(buf, "evaluated", evaluated.to_string());
    line(buf, "skipped", (points.len() - evaluated).to_string());
    let best = results
        .iter()
        .zip(points)
        .filter_map(|(r, p)| r.as_ref().ok().map(|c| (c, p)))
        .min_by(|a, b| a.0.residual.total_cmp(&b.0.residual));
    match best {
        Some((c, p)) => {
            line(buf, "min_residual", fmt12(c.residual));
            line(buf, "argmin", fmt_point(p));
            let members = results
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .filter(|c| c.member)
                .count();
            line(buf, "members", members.to_string());
        }
        None => line(buf, "min_residual", "none (no grid member evaluated)"),
    }
}

// ---------------------------------------------------------------------------
// Sections, index sets, descent, fronts

fn verdict_text(v: &BoundedVerdict) -> String {
    match v {
        BoundedVerdict::SetBounded { radius } => {
            format!("set-bounded (no sublevel member beyond radius {})", fmt12(*radius))
        }
        BoundedVerdict::ValuesBounded { box_min, radius } => format!(
            "values-bounded (componentwise min {} stable at radius {})",
            fmt_point(box_min),
            fmt12(*radius)
        ),
        BoundedVerdict::UnboundedWitness { points } => {
            let mut s = String::from("unbounded-evidence (min kept dropping");
            for p in points {
                s.push_str("; drop at ");
                s.push_str(&fmt_point(p));
            }
            s.push(')');
            s
        }
        BoundedVerdict::Unknown { radius } => {
            format!("unknown (mixed evidence at radius {})", fmt12(*radius))
        }
    }
}

pub fn render_section(buf: &mut String, r: &SectionReport) {
    line(buf, "verdict", verdict_text(&r.verdict));
    line(buf, "stages", r.radii.len().to_string());
    for (radius, min) in r.radii.iter().zip(&r.min_trace) {
        line(
            buf,
            &format!("min_at_radius {}", fmt12(*radius)),
            fmt_point(min),
        );
    }
    line(buf, "final_stage_members", r.points.len().to_string());
}

pub fn render_index_report(buf: &mut String, r: &IndexSetReport) {
    line(
        buf,
        "indices",
        if r.indices.is_empty() {
            "(none)".to_string()
        } else {
            r.indices
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        },
    );
    line(buf, "samples", r.samples.to_string());
    for v in &r.violations {
        line(
            buf,
            &format!("varies f{}", v.component + 1),
            format!(
                "by {} at {}",
                fmt12(v.deviation),
                fmt_point(&v.witness)
            ),
        );
    }
}

pub fn render_descent(buf: &mut String, t: &DescentTrace) {
    line(buf, "steps", t.steps.len().to_string());
    for (k, s) in t.steps.iter().enumerate() {
        line(
            buf,
            &format!("step {k}"),
            format!(
                "f{} improved by {}: {} -> {}",
                s.component + 1,
                fmt12(s.improvement),
                fmt_point(&s.from),
                fmt_point(&s.to)
            ),
        );
    }
    match &t.outcome {
        DescentOutcome::Terminated { point, index_set } => {
            line(buf, "outcome", "terminated");
            line(buf, "strong_candidate", fmt_point(point));
            line(
                buf,
                "terminal_index_set",
                index_set
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            );
        }
        DescentOutcome::BudgetExhausted { point } => {
            line(buf, "outcome", "budget-exhausted");
            line(buf, "last_point", fmt_point(point));
        }
    }
}

pub fn render_front_summary(buf: &mut String, r: &FrontReport) {
    let weak = r.weak.iter().filter(|&&b| b).count();
    let strong = r.strong.iter().filter(|&&b| b).count();
    line(buf, "grid_members", r.points.len().to_string());
    line(buf, "weak_optima", weak.to_string());
    line(buf, "strong_optima", strong.to_string());
    // Strong optima are few by nature; list them.
    for (i, p) in r.points.iter().enumerate() {
        if r.strong[i] {
            line(
                buf,
                "strong",
                format!("{} value {}", fmt_point(p), fmt_point(&r.values[i])),
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Limit sets and conditions

fn witness_text(w: &LimitWitness) -> String {
    let mut s = format!(
        "value {} at final point {}",
        fmt_point(&w.value),
        fmt_point(&w.final_point)
    );
    if let Some(r) = w.residuals.last() {
        let _ = write!(s, ", final residual {}", fmt12(*r));
    }
    if w.flagged {
        s.push_str(" [inexact evidence]");
    }
    s
}

pub fn render_limit_estimate(
    buf: &mut String,
    mode: LimitMode,
    labels: &[String],
    e: &LimitEstimate,
) {
    line(buf, "mode", mode.name());
    for o in &e.outcomes {
        let label = labels
            .get(o.index)
            .map(String::as_str)
            .unwrap_or("(unnamed)");
        let status = match &o.status {
            PathStatus::Accepted => "accepted".to_string(),
            PathStatus::SoftRejected(r) => format!("soft-rejected: {r}"),
            PathStatus::HardRejected(r) => format!("hard-rejected: {r}"),
        };
        line(buf, &format!("path {} ({label})", o.index), status);
        if let Some(w) = &o.witness {
            line(buf, &format!("path {} witness", o.index), witness_text(w));
        }
    }
    line(
        buf,
        "max_sublevel_norm",
        fmt12(e.max_sublevel_norm()),
    );
}

pub fn render_condition(buf: &mut String, r: &ConditionReport) {
    let verdict = match &r.verdict {
        ConditionVerdict::Holds { radius } => format!(
            "holds (no admissible escape within sampled radius {})",
            fmt12(*radius)
        ),
        ConditionVerdict::Fails { witness } => format!("fails ({})", witness_text(witness)),
        ConditionVerdict::Unknown { reason } => format!("unknown ({reason})"),
    };
    line(buf, r.kind.name(), verdict);
}

// ---------------------------------------------------------------------------
// Existence checks

fn inclusion_text(v: &InclusionVerdict) -> String {
    match v {
        InclusionVerdict::Holds { matched } => {
            let mut s = format!("holds ({} witness value(s) matched", matched.len());
            for (w, u) in matched {
                let _ = write!(s, "; {} ~ {}", fmt_point(w), fmt_point(u));
            }
            s.push(')');
            s
        }
        InclusionVerdict::HoldsVacuously => {
            "holds-vacuously (no accepted witnesses)".to_string()
        }
        InclusionVerdict::Fails { unmatched, nearest } => {
            let mut s = format!("fails ({} unmatched", unmatched.len());
            for w in unmatched {
                let _ = write!(s, "; {}", fmt_point(w));
            }
            if let Some((d, u)) = nearest {
                let _ = write!(s, "; nearest stationary value {} at distance {}", fmt_point(u), fmt12(*d));
            }
            s.push(')');
            s
        }
        InclusionVerdict::Unknown { reason } => format!("unknown ({reason})"),
    }
}

pub fn render_inclusion(buf: &mut String, r: &InclusionReport) {
    line(buf, &format!("inclusion {}", r.mode.name()), inclusion_text(&r.verdict));
}

pub fn render_stationary(buf: &mut String, s: &StationaryValues) {
    line(buf, "stationary_points", s.raw_count.to_string());
    line(buf, "distinct_values", s.values.len().to_string());
    line(buf, "flagged", s.flagged.to_string());
    line(buf, "skipped", s.skipped.to_string());
    // Listing every value would swamp the report on degenerate problems;
    // the CSV carries the full set.
    for v in s.values.iter().take(8) {
        line(buf, "value", fmt_point(v));
    }
    if s.values.len() > 8 {
        line(buf, "value", format!("... {} more", s.values.len() - 8));
    }
}

pub fn conclusion_text(c: &Conclusion) -> String {
    match c {
        Conclusion::SolutionsExist { via } => format!("weak-solution-exists (via {via})"),
        Conclusion::Inconclusive { reason } => format!("inconclusive ({reason})"),
    }
}

pub fn render_existence(buf: &mut String, labels: &[String], r: &ExistenceReport) {
    line(buf, "restricted", r.restricted.to_string());
    line(buf, "hypothesis", verdict_text(&r.hypothesis.verdict));
    line(buf, "hypothesis_ok", r.hypothesis_ok.to_string());
    for inc in &r.inclusions {
        render_inclusion(buf, inc);
        render_limit_estimate(buf, inc.mode, labels, &inc.estimate);
    }
    render_stationary(buf, &r.stationary);
    line(buf, "consistent", r.consistent.to_string());
    line(buf, "conclusion", conclusion_text(&r.conclusion));
}

pub fn render_equivalence(buf: &mut String, labels: &[String], r: &EquivalenceReport) {
    line(buf, "hypothesis", verdict_text(&r.hypothesis.verdict));
    if let Some(reason) = &r.refused {
        line(buf, "refused", reason);
        return;
    }
    for c in &r.conditions {
        render_condition(buf, c);
        render_limit_estimate(buf, c.kind.mode(), labels, &c.estimate);
    }
    line(
        buf,
        "agreement",
        match r.agreement {
            Some(true) => "yes (all four verdicts identical)".to_string(),
            Some(false) => "no (verdicts split)".to_string(),
            None => "undetermined (some verdict unknown)".to_string(),
        },
    );
    match &r.shared_witness {
        Some(w) => line(buf, "shared_witness", fmt_point(w)),
        None => line(buf, "shared_witness", "(none)"),
    }
}

pub fn render_sufficiency(buf: &mut String, labels: &[String], r: &SufficiencyReport) {
    render_equivalence(buf, labels, &r.harness);
    line(buf, "conclusion", conclusion_text(&r.conclusion));
}

// ---------------------------------------------------------------------------
// CSV emission

type CsvResult = Result<(), csv::Error>;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, csv::Error> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
}

/// `sections.csv`: one row per sampling stage (radius and the running
/// componentwise minimum).
pub fn write_sections_csv(path: &Path, r: &SectionReport) -> CsvResult {
    let mut w = writer(path)?;
    let k = r.min_trace.first().map_or(0, Vec::len);
    let mut header = vec!["stage".to_string(), "radius".to_string()];
    header.extend((1..=k).map(|i| format!("min_{i}")));
    w.write_record(&header)?;
    for (stage, (radius, min)) in r.radii.iter().zip(&r.min_trace).enumerate() {
        let mut row = vec![stage.to_string(), csv_num(*radius)];
        row.extend(min.iter().map(|v| csv_num(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `front.csv`: one row per grid member with its values and optimality
/// flags.
pub fn write_front_csv(path: &Path, r: &FrontReport, dim: usize, objectives: usize) -> CsvResult {
    let mut w = writer(path)?;
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend((1..=objectives).map(|i| format!("f{i}")));
    header.push("weak".to_string());
    header.push("strong".to_string());
    w.write_record(&header)?;
    for (i, p) in r.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| csv_num(*v)).collect();
        row.extend(r.values[i].iter().map(|v| csv_num(*v)));
        row.push(r.weak[i].to_string());
        row.push(r.strong[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `sweep.csv`: one row per grid member of a residual sweep.
pub fn write_nu_sweep_csv(
    path: &Path,
    points: &[Vec<f64>],
    results: &[Result<NuValue, StationarityError>],
) -> CsvResult {
    let mut w = writer(path)?;
    let dim = points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend(
        ["nu", "lower_bound", "exact", "converged", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for (p, r) in points.iter().zip(results) {
        let mut row: Vec<String> = p.iter().map(|v| csv_num(*v)).collect();
        match r {
            Ok(v) => {
                row.push(csv_num(v.value));
                row.push(csv_num(v.lower_bound));
                row.push(v.exact.to_string());
                row.push(v.converged.to_string());
                row.push("ok".to_string());
            }
            Err(_) => {
                row.extend(["", "", "", ""].iter().map(|s| s.to_string()));
                row.push("skipped".to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `tangency.csv`: one row per grid member of a tangency sweep.
pub fn write_tangency_sweep_csv(
    path: &Path,
    points: &[Vec<f64>],
    results: &[Result<TangencyCertificate, StationarityError>],
) -> CsvResult {
    let mut w = writer(path)?;
    let dim = points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend(
        ["residual", "lower_bound", "member", "mu", "exact", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for (p, r) in points.iter().zip(results) {
        let mut row: Vec<String> = p.iter().map(|v| csv_num(*v)).collect();
        match r {
            Ok(c) => {
                row.push(csv_num(c.residual));
                row.push(csv_num(c.lower_bound));
                row.push(c.member.to_string());
                row.push(csv_num(c.mu));
                row.push(c.exact.to_string());
                row.push("ok".to_string());
            }
            Err(_) => {
                row.extend(["", "", "", "", ""].iter().map(|s| s.to_string()));
                row.push("skipped".to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `limits.csv`: one row per probe path per mode.
pub fn write_limits_csv(
    path: &Path,
    rows: &[(LimitMode, &LimitEstimate)],
    labels: &[String],
) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["mode", "path", "label", "status", "detail", "value", "final_norm", "flagged"])?;
    for (mode, e) in rows {
        for o in &e.outcomes {
            let label = labels.get(o.index).map(String::as_str).unwrap_or("");
            let (status, detail) = match &o.status {
                PathStatus::Accepted => ("accepted", String::new()),
                PathStatus::SoftRejected(r) => ("soft-rejected", r.clone()),
                PathStatus::HardRejected(r) => ("hard-rejected", r.clone()),
            };
            let (value, norm, flagged) = match &o.witness {
                Some(wit) => (
                    wit.value.iter().map(|v| csv_num(*v)).collect::<Vec<_>>().join(" "),
                    wit.norms.last().map(|v| csv_num(*v)).unwrap_or_default(),
                    wit.flagged.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([
                mode.name(),
                &o.index.to_string(),
                label,
                status,
                &detail,
                &value,
                &norm,
                &flagged,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `stationary.csv`: the deduplicated sampled stationary values.
pub fn write_stationary_csv(path: &Path, s: &StationaryValues, tracked: usize) -> CsvResult {
    let mut w = writer(path)?;
    let header: Vec<String> = (1..=tracked).map(|i| format!("v{i}")).collect();
    w.write_record(&header)?;
    for v in &s.values {
        let row: Vec<String> = v.iter().map(|x| csv_num(*x)).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_format_is_stable() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(0.5), "5.00000000000e-1");
        assert_eq!(fmt12(-2.0f64.powi(-25)), "-2.98023223877e-8");
        assert_eq!(fmt12(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn csv_numbers_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, -2.0f64.powi(-45), 6.283185307179586] {
            let s = csv_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
