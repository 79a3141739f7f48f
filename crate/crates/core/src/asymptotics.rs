//! Asymptotic behaviour along escaping sequences: limit-set estimation,
//! stationary values on a grid, the four compactness-style conditions
//! (properness, two residual-decay conditions, tangency tameness), and a
//! variational refinement step.
//!
//! Everything here is sampling-based and one-sided by design. A probe path
//! that escapes to infinity inside the region while the admission bound
//! `f ≤ y0` and the mode's residual test hold produces a *witness* — a
//! limit value that genuinely belongs to the asymptotic set up to the
//! tolerances. The absence of witnesses proves nothing by itself; the only
//! way a condition is reported as holding is through a vacuity certificate
//! (the sampled sublevel set stopped growing under radius doubling) that no
//! probe contradicts.

use crate::dsl::{DslError, Expression, VectorObjective};
use crate::feasible::{FeasibleError, FeasibleSet, Region};
use crate::sections::{
    check_index_set, section_sample, BoundedVerdict, GridSpec, SectionParams, SectionReport,
    SectionsError, SublevelSet,
};
use crate::stationarity::{nu, tangency, NuOptions, StationarityError};
use rayon::prelude::*;

/// Errors from the asymptotic estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    /// Every declared probe path was geometrically unusable (left the
    /// region, norms not growing, too short). Soft failures — a path that
    /// escapes but violates the admission bound or whose residuals do not
    /// settle — do not trigger this; they simply yield no witnesses.
    #[error("no admissible probe paths: {}", reasons.join("; "))]
    NoAdmissibleProbes { reasons: Vec<String> },
    /// A probe path is structurally malformed (dimension mismatch,
    /// non-increasing schedule, a path expression using more than the
    /// parameter variable).
    #[error("probe path {index}: {message}")]
    InvalidPath { index: usize, message: String },
    /// Invalid arguments outside the probe paths.
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Sections(#[from] SectionsError),
    #[error(transparent)]
    Stationarity(#[from] StationarityError),
    #[error(transparent)]
    Feasible(#[from] FeasibleError),
    #[error(transparent)]
    Dsl(#[from] DslError),
}

/// A candidate escaping sequence.
#[derive(Debug, Clone)]
pub enum ProbePath {
    /// Coordinates given as expressions in a single parameter (variable
    /// `x1` plays the role of `t`), evaluated on an increasing schedule.
    Parametric {
        exprs: Vec<Expression>,
        schedule: Vec<f64>,
    },
    /// Points listed outright, in escape order.
    Explicit { points: Vec<Vec<f64>> },
}

/// The default parameter schedule `t = 2^k`, `k = 0..=20`.
pub fn default_schedule() -> Vec<f64> {
    (0..=20).map(|k| f64::powi(2.0, k)).collect()
}

impl ProbePath {
    /// Materializes the path's points. Structural problems are errors;
    /// anything value-dependent is left to the estimator's filters.
    fn points(&self, dim: usize, index: usize) -> Result<Vec<Vec<f64>>, AsymptoticsError> {
        let invalid = |message: String| AsymptoticsError::InvalidPath { index, message };
        match self {
            ProbePath::Parametric { exprs, schedule } => {
                if exprs.len() != dim {
                    return Err(invalid(format!(
                        "path has {} coordinates, region has {dim}",
                        exprs.len()
                    )));
                }
                if let Some(v) = exprs.iter().filter_map(|e| e.max_var()).max() {
                    if v > 0 {
                        return Err(invalid(
                            "path expressions may use only the parameter variable x1".into(),
                        ));
                    }
                }
                if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid(
                        "schedule must be strictly increasing with at least two entries".into(),
                    ));
                }
                Ok(schedule
                    .iter()
                    .map(|&t| exprs.iter().map(|e| e.eval(&[t])).collect())
                    .collect())
            }
            ProbePath::Explicit { points } => {
                if points.iter().any(|p| p.len() != dim) {
                    return Err(invalid(format!("every point must have dimension {dim}")));
                }
                Ok(points.clone())
            }
        }
    }
}

/// What must decay along a path for its limit value to be admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// The stationarity residual tends to zero.
    Nu,
    /// The norm-weighted residual `‖x‖·ν(x)` tends to zero.
    ScaledNu,
    /// The tail of the path lies in the tangency variety.
    Tangency,
    /// No residual requirement; only escape, admission, and settling of
    /// the tracked values (the properness test).
    ValuesOnly,
}

impl LimitMode {
    /// Stable lowercase name for reports.
    pub fn name(self) -> &'static str {
        match self {
            LimitMode::Nu => "residual-decay",
            LimitMode::ScaledNu => "scaled-residual-decay",
            LimitMode::Tangency => "tangency",
            LimitMode::ValuesOnly => "values-only",
        }
    }
}

/// Tolerances of the limit-set estimator.
#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Region-membership slack for retaining probe points.
    pub membership_tol: f64,
    /// Slack for the admission bound `fᵢ(x) ≤ y0ᵢ + slack·(1 + |y0ᵢ|)`.
    pub sublevel_slack: f64,
    /// Residual decay floor: the final residual must not exceed
    /// `trend_tol·(1 + ‖limit value‖)`, and the tail may not rise above it.
    pub trend_tol: f64,
    /// The tracked values must agree pairwise within this over the tail.
    pub cauchy_tol: f64,
    /// Absolute escape threshold on the final retained norm.
    pub escape_abs: f64,
    /// Relative escape threshold: final norm ≥ growth·(1 + first norm).
    pub escape_growth: f64,
    /// Inner residual solver knobs.
    pub nu: NuOptions,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            membership_tol: crate::DEFAULT_TOL,
            sublevel_slack: crate::DEFAULT_TOL,
            trend_tol: crate::DEFAULT_TOL,
            cauchy_tol: 1e-4,
            escape_abs: 50.0,
            escape_growth: 4.0,
            nu: NuOptions::default(),
        }
    }
}

/// Why a path produced no witness, and whether it still demonstrated
/// escape (which matters when weighing vacuity certificates).
#[derive(Debug, Clone, PartialEq)]
pub enum PathStatus {
    /// The path produced a witness.
    Accepted,
    /// Escape was demonstrated but admission, residual decay, or value
    /// settling failed; the reason is recorded.
    SoftRejected(String),
    /// The path never qualified geometrically.
    HardRejected(String),
}

/// A limit value observed along one accepted path.
#[derive(Debug, Clone)]
pub struct LimitWitness {
    /// Index of the path in the probe list.
    pub path: usize,
    /// The tracked objective values at the final retained point.
    pub value: Vec<f64>,
    /// The final retained point itself.
    pub final_point: Vec<f64>,
    /// Residual trace along the retained points (empty in values-only
    /// mode).
    pub residuals: Vec<f64>,
    /// Norms of the retained points.
    pub norms: Vec<f64>,
    /// True when some residual in the certifying tail came from an inexact
    /// subdifferential hull: the decay is then only a lower-bound
    /// statement and existence conclusions must not rest on it.
    pub flagged: bool,
}

/// Per-path outcome of a limit-set estimation.
#[derive(Debug, Clone)]
pub struct PathOutcome {
    /// Index of the path in the probe list.
    pub index: usize,
    pub status: PathStatus,
    /// Largest norm among retained points that satisfied the admission
    /// bound — evidence of how far the sublevel set provably reaches.
    pub max_sublevel_norm: f64,
    pub witness: Option<LimitWitness>,
}

/// Outcomes of all probe paths.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    pub outcomes: Vec<PathOutcome>,
}

impl LimitEstimate {
    /// The accepted witnesses, in path order.
    pub fn witnesses(&self) -> impl Iterator<Item = &LimitWitness> {
        self.outcomes.iter().filter_map(|o| o.witness.as_ref())
    }

    /// Largest norm at which any path certified sublevel membership.
    pub fn max_sublevel_norm(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.max_sublevel_norm)
            .fold(0.0, f64::max)
    }
}

/// Length of the certifying tail: residual decay and value settling are
/// judged on the last this-many retained points.
const TAIL: usize = 5;

/// Estimates an asymptotic limit set of the values `f_I` along the probe
/// paths: each accepted path contributes the limit value it approaches.
///
/// A path is retained pointwise inside `region` (points off the region are
/// dropped; losing more than half rejects the path), must have
/// nondecreasing norms that end beyond the escape threshold, and must
/// satisfy `f ≤ y0` (with slack) at every retained point. The mode then
/// decides the residual requirement on the tail.
pub fn estimate_limit_set<R: Region + Sync>(
    f: &VectorObjective,
    index_set: &[usize],
    region: &R,
    y0: &[f64],
    probes: &[ProbePath],
    mode: LimitMode,
    opts: &LimitOptions,
) -> Result<LimitEstimate, AsymptoticsError> {
    check_index_set(index_set, f)?;
    if f.dim() != region.dim() {
        return Err(AsymptoticsError::BadInput(format!(
            "objective dimension {} does not match region dimension {}",
            f.dim(),
            region.dim()
        )));
    }
    if y0.len() != f.len() {
        return Err(AsymptoticsError::BadInput(format!(
            "threshold has {} components, objective has {}",
            y0.len(),
            f.len()
        )));
    }

    let mut outcomes = Vec::with_capacity(probes.len());
    for (index, probe) in probes.iter().enumerate() {
        let points = probe.points(region.dim(), index)?;
        outcomes.push(judge_path(f, index_set, region, y0, index, points, mode, opts));
    }

    let hard: Vec<&PathOutcome> = outcomes
        .iter()
        .filter(|o| matches!(o.status, PathStatus::HardRejected(_)))
        .collect();
    if !probes.is_empty() && hard.len() == probes.len() {
        let reasons = hard
            .iter()
            .map(|o| match &o.status {
                PathStatus::HardRejected(r) => format!("path {}: {r}", o.index),
                _ => unreachable!(),
            })
            .collect();
        return Err(AsymptoticsError::NoAdmissibleProbes { reasons });
    }
    Ok(LimitEstimate { outcomes })
}

#[allow(clippy::too_many_arguments)]
fn judge_path<R: Region + Sync>(
    f: &VectorObjective,
    index_set: &[usize],
    region: &R,
    y0: &[f64],
    index: usize,
    points: Vec<Vec<f64>>,
    mode: LimitMode,
    opts: &LimitOptions,
) -> PathOutcome {
    let hard = |message: String| PathOutcome {
        index,
        status: PathStatus::HardRejected(message),
        max_sublevel_norm: 0.0,
        witness: None,
    };

    let total = points.len();
    if total < TAIL {
        return hard(format!("path has {total} points, need at least {TAIL}"));
    }
    let retained: Vec<Vec<f64>> = points
        .into_iter()
        .filter(|p| p.iter().all(|v| v.is_finite()) && region.contains(p, opts.membership_tol))
        .collect();
    if retained.len() < TAIL.max((total + 1) / 2) {
        // The probe itself is well-formed; it just does not stay in the
        // region (for restricted estimates the region is the sublevel set,
        // so this is how a value-bounded problem rejects an escape). No
        // witness, but no error either.
        return PathOutcome {
            index,
            status: PathStatus::SoftRejected(format!(
                "only {} of {total} points lie in the region (need at least {})",
                retained.len(),
                TAIL.max((total + 1) / 2)
            )),
            max_sublevel_norm: 0.0,
            witness: None,
        };
    }

    let norms: Vec<f64> = retained
        .iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    for w in norms.windows(2) {
        if w[1] < w[0] * (1.0 - 1e-9) - 1e-9 {
            return hard(format!("norms decrease along the path ({} after {})", w[1], w[0]));
        }
    }
    let escape = opts
        .escape_abs
        .max(opts.escape_growth * (1.0 + norms[0]));
    let last_norm = *norms.last().expect("nonempty");
    if last_norm < escape {
        return hard(format!(
            "final norm {last_norm:.3} below the escape threshold {escape:.3}"
        ));
    }

    // Admission bound, tracked at every retained point.
    let mut max_sublevel_norm: f64 = 0.0;
    let mut violation: Option<(usize, usize)> = None;
    for (k, p) in retained.iter().enumerate() {
        let fv = f.eval(p);
        let bad = fv
            .iter()
            .zip(y0)
            .position(|(v, t)| *v > t + opts.sublevel_slack * (1.0 + t.abs()));
        match bad {
            Some(i) => {
                if violation.is_none() {
                    violation = Some((k, i));
                }
            }
            None => max_sublevel_norm = max_sublevel_norm.max(norms[k]),
        }
    }
    let soft = |message: String, max_sublevel_norm: f64| PathOutcome {
        index,
        status: PathStatus::SoftRejected(message),
        max_sublevel_norm,
        witness: None,
    };
    if let Some((k, i)) = violation {
        return soft(
            format!(
                "component {} exceeds the threshold at retained point {k}",
                i + 1
            ),
            max_sublevel_norm,
        );
    }

    // Residual trace; points where the residual cannot be evaluated (a
    // degenerate corner on the path) are skipped, but losing the tail is
    // disqualifying.
    let mut residuals = Vec::new();
    let mut flagged = false;
    if mode != LimitMode::ValuesOnly {
        let traces: Vec<Option<(f64, bool)>> = retained
            .par_iter()
            .zip(norms.par_iter())
            .map(|(p, n)| match mode {
                LimitMode::Nu => nu(f, region, p, &opts.nu)
                    .ok()
                    .map(|v| (v.value, v.exact)),
                LimitMode::ScaledNu => nu(f, region, p, &opts.nu)
                    .ok()
                    .map(|v| (n * v.value, v.exact)),
                LimitMode::Tangency => tangency(f, region, p, &opts.nu)
                    .ok()
                    .map(|c| (c.residual, c.exact)),
                LimitMode::ValuesOnly => unreachable!(),
            })
            .collect();
        let evaluated = traces.iter().flatten().count();
        if evaluated < TAIL || traces.iter().rev().take(TAIL).any(Option::is_none) {
            return soft(
                "residuals could not be evaluated on the tail of the path".into(),
                max_sublevel_norm,
            );
        }
        residuals = traces.iter().flatten().map(|(v, _)| *v).collect();
        flagged = traces
            .iter()
            .flatten()
            .rev()
            .take(TAIL)
            .any(|(_, exact)| !exact);
    }

    let limit_value = f.eval_subset(index_set, retained.last().expect("nonempty"));
    let value_norm = limit_value.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = opts.trend_tol * (1.0 + value_norm);

    match mode {
        LimitMode::Nu | LimitMode::ScaledNu => {
            let last = *residuals.last().expect("tail checked");
            if last > floor {
                return soft(
                    format!("final residual {last:.3e} above the decay floor {floor:.3e}"),
                    max_sublevel_norm,
                );
            }
            let tail = &residuals[residuals.len().saturating_sub(TAIL)..];
            if tail.windows(2).any(|w| w[1] > w[0].max(floor)) {
                return soft(
                    "residuals rise above the decay floor on the tail".into(),
                    max_sublevel_norm,
                );
            }
        }
        LimitMode::Tangency => {
            let tail = &residuals[residuals.len().saturating_sub(TAIL)..];
            if let Some(r) = tail.iter().find(|r| **r > floor) {
                return soft(
                    format!("tangency residual {r:.3e} on the tail exceeds {floor:.3e}"),
                    max_sublevel_norm,
                );
            }
        }
        LimitMode::ValuesOnly => {}
    }

    // The tracked values must settle: pairwise agreement over the tail.
    let tail_points = &retained[retained.len().saturating_sub(TAIL)..];
    let tail_values: Vec<Vec<f64>> = tail_points
        .iter()
        .map(|p| f.eval_subset(index_set, p))
        .collect();
    for a in &tail_values {
        for b in &tail_values {
            let spread = a
                .iter()
                .zip(b)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            if spread > opts.cauchy_tol {
                return soft(
                    format!("tracked values spread {spread:.3e} on the tail"),
                    max_sublevel_norm,
                );
            }
        }
    }

    PathOutcome {
        index,
        status: PathStatus::Accepted,
        max_sublevel_norm,
        witness: Some(LimitWitness {
            path: index,
            value: limit_value,
            final_point: retained.last().expect("nonempty").clone(),
            residuals,
            norms,
            flagged,
        }),
    }
}

/// Objective values at sampled stationary points: `f_I(x)` over grid
/// members of `region` satisfying `f(x) ≤ y0` where the residual vanishes
/// with an exact certificate.
#[derive(Debug, Clone)]
pub struct StationaryValues {
    /// Points whose residual vanished exactly.
    pub points: Vec<Vec<f64>>,
    /// Deduplicated tracked values at those points.
    pub values: Vec<Vec<f64>>,
    /// Stationary points found before deduplication of values.
    pub raw_count: usize,
    /// Grid members whose residual vanished numerically but whose hull was
    /// inexact — excluded from `values`.
    pub flagged: usize,
    /// Grid members where the residual could not be evaluated (degenerate
    /// corners) — skipped.
    pub skipped: usize,
}

/// Sweeps a grid for vanishing-residual points and collects their tracked
/// values (the sampled counterpart of the asymptotic sets' right-hand
/// side).
pub fn stationary_values<R: Region + Sync>(
    f: &VectorObjective,
    index_set: &[usize],
    region: &R,
    y0: &[f64],
    grid: &GridSpec,
    opts: &LimitOptions,
) -> Result<StationaryValues, AsymptoticsError> {
    check_index_set(index_set, f)?;
    if y0.len() != f.len() {
        return Err(AsymptoticsError::BadInput(format!(
            "threshold has {} components, objective has {}",
            y0.len(),
            f.len()
        )));
    }
    let members: Vec<Vec<f64>> = region
        .grid(&grid.window, &grid.resolution)
        .into_iter()
        .filter(|p| {
            f.eval(p)
                .iter()
                .zip(y0)
                .all(|(v, t)| *v <= t + opts.sublevel_slack * (1.0 + t.abs()))
        })
        .collect();

    enum Sweep {
        Stationary(Vec<f64>),
        Flagged,
        Inert,
        Skipped,
    }
    let swept: Vec<Sweep> = members
        .par_iter()
        .map(|p| match nu(f, region, p, &opts.nu) {
            Ok(v) if v.value <= opts.nu.tol && v.exact => Sweep::Stationary(p.clone()),
            Ok(v) if v.value <= opts.nu.tol => Sweep::Flagged,
            Ok(_) => Sweep::Inert,
            Err(_) => Sweep::Skipped,
        })
        .collect();

    let mut points = Vec::new();
    let mut flagged = 0;
    let mut skipped = 0;
    for s in swept {
        match s {
            Sweep::Stationary(p) => points.push(p),
            Sweep::Flagged => flagged += 1,
            Sweep::Skipped => skipped += 1,
            Sweep::Inert => {}
        }
    }
    let raw_count = points.len();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for p in &points {
        let v = f.eval_subset(index_set, p);
        let dup = values.iter().any(|u| {
            u.iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= 1e-6
        });
        if !dup {
            values.push(v);
        }
    }
    Ok(StationaryValues {
        points,
        values,
        raw_count,
        flagged,
        skipped,
    })
}

/// The four asymptotic regularity conditions of a restricted problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// The selected objectives are proper on the section: no escaping
    /// sequence keeps admissible, settling values.
    Proper,
    /// No escaping admissible sequence drives the residual to zero.
    PalaisSmale,
    /// No escaping admissible sequence drives the norm-weighted residual
    /// to zero.
    WeakPalaisSmale,
    /// No escaping admissible sequence stays in the tangency variety.
    MTame,
}

impl ConditionKind {
    /// The residual mode whose witnesses refute this condition.
    pub fn mode(self) -> LimitMode {
        match self {
            ConditionKind::Proper => LimitMode::ValuesOnly,
            ConditionKind::PalaisSmale => LimitMode::Nu,
            ConditionKind::WeakPalaisSmale => LimitMode::ScaledNu,
            ConditionKind::MTame => LimitMode::Tangency,
        }
    }

    /// All four kinds, in reporting order.
    pub fn all() -> [ConditionKind; 4] {
        [
            ConditionKind::Proper,
            ConditionKind::PalaisSmale,
            ConditionKind::WeakPalaisSmale,
            ConditionKind::MTame,
        ]
    }

    /// Stable lowercase name for reports.
    pub fn name(self) -> &'static str {
        match self {
            ConditionKind::Proper => "proper",
            ConditionKind::PalaisSmale => "palais-smale",
            ConditionKind::WeakPalaisSmale => "weak-palais-smale",
            ConditionKind::MTame => "m-tame",
        }
    }
}

/// Verdict on one condition.
#[derive(Debug, Clone)]
pub enum ConditionVerdict {
    /// Vacuously holds: the sampled sublevel set stopped growing inside
    /// the radius and no probe escaped within it.
    Holds { radius: f64 },
    /// An accepted witness refutes the condition.
    Fails { witness: LimitWitness },
    /// Neither a witness nor a trustworthy vacuity certificate.
    Unknown { reason: String },
}

/// One condition's verdict with the evidence that produced it.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub verdict: ConditionVerdict,
    pub section: SectionReport,
    pub estimate: LimitEstimate,
}

/// Classifies the evidence for one condition. Witnesses dominate; a
/// vacuity certificate is trusted only when no probe demonstrated
/// admissible escape beyond its radius.
pub(crate) fn classify(
    kind: ConditionKind,
    verdict: &BoundedVerdict,
    estimate: &LimitEstimate,
) -> ConditionVerdict {
    let mut flagged_only = false;
    for w in estimate.witnesses() {
        if !w.flagged {
            return ConditionVerdict::Fails { witness: w.clone() };
        }
        flagged_only = true;
    }
    if flagged_only {
        return ConditionVerdict::Unknown {
            reason: format!(
                "the only witnesses against {} rest on inexact subdifferential hulls",
                kind.name()
            ),
        };
    }
    match verdict {
        BoundedVerdict::SetBounded { radius } => {
            let reach = estimate.max_sublevel_norm();
            if reach > *radius {
                ConditionVerdict::Unknown {
                    reason: format!(
                        "a probe stayed admissible out to norm {reach:.3}, beyond the sampled \
                         bound {radius:.3}"
                    ),
                }
            } else {
                ConditionVerdict::Holds { radius: *radius }
            }
        }
        other => ConditionVerdict::Unknown {
            reason: format!(
                "no witness, and the sampled section evidence ({}) cannot certify vacuity",
                match other {
                    BoundedVerdict::ValuesBounded { .. } => "values bounded only",
                    BoundedVerdict::UnboundedWitness { .. } => "unbounded values",
                    BoundedVerdict::Unknown { .. } => "inconclusive",
                    BoundedVerdict::SetBounded { .. } => unreachable!(),
                }
            ),
        },
    }
}

/// Checks one asymptotic condition of the problem restricted to the
/// anchor's sublevel set with the selected objectives.
#[allow(clippy::too_many_arguments)]
pub fn check_condition(
    kind: ConditionKind,
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    probes: &[ProbePath],
    section_params: &SectionParams,
    opts: &LimitOptions,
) -> Result<ConditionReport, AsymptoticsError> {
    check_index_set(index_set, f)?;
    let section = section_sample(f, index_set, region, x0, section_params)?;
    let restricted = f.restrict(index_set);
    let sublevel = SublevelSet::at_point(f, region, x0, opts.membership_tol)?;
    let y0 = restricted.eval(x0);
    let all: Vec<usize> = (0..restricted.len()).collect();
    let estimate = estimate_limit_set(
        &restricted,
        &all,
        &sublevel,
        &y0,
        probes,
        kind.mode(),
        opts,
    )?;
    let verdict = classify(kind, &section.verdict, &estimate);
    Ok(ConditionReport {
        kind,
        verdict,
        section,
        estimate,
    })
}

/// Parameters of the variational refinement step.
#[derive(Debug, Clone)]
pub struct EkelandParams {
    /// Slope budget: the refined point is an `ε`-minimizer candidate.
    pub epsilon: f64,
    /// Search ball radius around the start.
    pub lambda: f64,
    /// Grid nodes per axis, both for the search and the verification scan.
    pub resolution: usize,
    /// The verification scan covers `scan_factor · lambda` around the
    /// start.
    pub scan_factor: f64,
}

impl Default for EkelandParams {
    fn default() -> Self {
        EkelandParams {
            epsilon: 1.0,
            lambda: 1.0,
            resolution: 129,
            scan_factor: 4.0,
        }
    }
}

/// A refined point with its certificate.
#[derive(Debug, Clone)]
pub struct EkelandPoint {
    pub point: Vec<f64>,
    pub value: f64,
    /// How much below the start value the refined value sits.
    pub improvement: f64,
    /// True when the sampled scan found no point beating the refined one
    /// by more than the sloped margin `(ε/λ)·distance`.
    pub verified: bool,
    /// A scan point that violated the margin, when one exists.
    pub violation: Option<Vec<f64>>,
}

/// Refines a start point to an approximate minimizer of a scalar
/// objective over the region: the best grid node within `lambda` of the
/// start, verified against the sloped lower bound on a wider scan.
pub fn ekeland_refine(
    phi: &Expression,
    region: &impl Region,
    x_start: &[f64],
    params: &EkelandParams,
    tol: f64,
) -> Result<EkelandPoint, AsymptoticsError> {
    let dim = region.dim();
    if x_start.len() != dim {
        return Err(AsymptoticsError::BadInput(format!(
            "start point has dimension {}, region has {dim}",
            x_start.len()
        )));
    }
    if let Some(v) = phi.max_var() {
        if v >= dim {
            return Err(AsymptoticsError::BadInput(format!(
                "objective uses x{}, region has dimension {dim}",
                v + 1
            )));
        }
    }
    if !region.contains(x_start, tol) {
        return Err(AsymptoticsError::BadInput(
            "start point lies outside the region".into(),
        ));
    }
    if !(params.epsilon > 0.0 && params.lambda > 0.0) {
        return Err(AsymptoticsError::BadInput(
            "epsilon and lambda must be positive".into(),
        ));
    }

    let window: Vec<(f64, f64)> = x_start
        .iter()
        .map(|&c| (c - params.lambda, c + params.lambda))
        .collect();
    let res = vec![params.resolution; dim];
    let start_value = phi.eval(x_start);
    let mut best = (x_start.to_vec(), start_value);
    for p in region.grid(&window, &res) {
        let d2: f64 = p
            .iter()
            .zip(x_start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d2.sqrt() > params.lambda * (1.0 + 1e-12) {
            continue;
        }
        let v = phi.eval(&p);
        let better = v < best.1 - 1e-15;
        let tied = (v - best.1).abs() <= 1e-15;
        if better || (tied && lex_less(&p, &best.0)) {
            let value = if tied { best.1.min(v) } else { v };
            best = (p, value);
        }
    }
    let (point, value) = best;

    let scan_window: Vec<(f64, f64)> = x_start
        .iter()
        .map(|&c| {
            (
                c - params.scan_factor * params.lambda,
                c + params.scan_factor * params.lambda,
            )
        })
        .collect();
    let slope = params.epsilon / params.lambda;
    let mut violation = None;
    for z in region.grid(&scan_window, &res) {
        let dist: f64 = z
            .iter()
            .zip(&point)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if phi.eval(&z) + slope * dist + 1e-12 < value {
            violation = Some(z);
            break;
        }
    }
    Ok(EkelandPoint {
        improvement: start_value - value,
        verified: violation.is_none(),
        violation,
        point,
        value,
    })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::feasible::Cell;

    fn obj(dim: usize, exprs: &[&str]) -> VectorObjective {
        VectorObjective::new(dim, exprs.iter().map(|s| parse(s).unwrap()).collect()).unwrap()
    }

    fn half_line() -> FeasibleSet {
        FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])]).unwrap()
    }

    fn ray_path() -> ProbePath {
        ProbePath::Parametric {
            exprs: vec![parse("x1").unwrap()],
            schedule: default_schedule(),
        }
    }

    #[test]
    fn decaying_gradient_yields_a_witness() {
        let f = obj(1, &["exp(0 - x1)"]);
        let region = half_line();
        let y0 = vec![1.0];
        for mode in [LimitMode::Nu, LimitMode::ScaledNu, LimitMode::Tangency] {
            let est = estimate_limit_set(
                &f,
                &[0],
                &region,
                &y0,
                &[ray_path()],
                mode,
                &LimitOptions::default(),
            )
            .unwrap();
            let w: Vec<_> = est.witnesses().collect();
            assert_eq!(w.len(), 1, "{mode:?}");
            assert!(w[0].value[0].abs() < 1e-9);
            assert!(!w[0].flagged);
        }
    }

    #[test]
    fn stubborn_gradient_soft_rejects() {
        let f = obj(1, &["0 - x1"]);
        let region = half_line();
        let est = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[ray_path()],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(matches!(est.outcomes[0].status, PathStatus::SoftRejected(_)));
        assert!(est.outcomes[0].witness.is_none());
        // The path still demonstrated admissible escape.
        assert!(est.max_sublevel_norm() > 1e6);
    }

    #[test]
    fn admission_violations_kill_acceptance_but_not_the_path() {
        let f = obj(1, &["x1"]);
        let region = half_line();
        let est = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[ray_path()],
            LimitMode::ValuesOnly,
            &LimitOptions::default(),
        )
        .unwrap();
        match &est.outcomes[0].status {
            PathStatus::SoftRejected(r) => assert!(r.contains("threshold"), "{r}"),
            s => panic!("expected soft rejection, got {s:?}"),
        }
        assert_eq!(est.max_sublevel_norm(), 0.0);
    }

    #[test]
    fn geometric_failures_reject_hard() {
        let f = obj(1, &["x1"]);
        let region = half_line();
        // A well-formed path that simply leaves the region is rejected
        // softly: no witness, but not an input error — restricted
        // estimates reject value-bounded escapes exactly this way.
        let leaves = ProbePath::Parametric {
            exprs: vec![parse("0 - x1").unwrap()],
            schedule: default_schedule(),
        };
        let est = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[leaves],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap();
        assert_eq!(est.witnesses().count(), 0);
        assert!(matches!(
            est.outcomes[0].status,
            PathStatus::SoftRejected(ref r) if r.contains("lie in the region")
        ));

        let shrinking = ProbePath::Explicit {
            points: (0..10).map(|k| vec![1000.0 - 100.0 * k as f64]).collect(),
        };
        let err = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[shrinking],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap_err();
        match err {
            AsymptoticsError::NoAdmissibleProbes { reasons } => {
                assert!(reasons[0].contains("norms decrease"), "{reasons:?}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn short_paths_are_structurally_fine_but_hard_rejected() {
        let f = obj(1, &["x1"]);
        let region = half_line();
        let stub = ProbePath::Explicit {
            points: vec![vec![1.0], vec![2.0], vec![3.0]],
        };
        let err = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[100.0],
            &[stub],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, AsymptoticsError::NoAdmissibleProbes { .. }));
    }

    #[test]
    fn empty_probe_list_is_not_an_error() {
        let f = obj(1, &["x1"]);
        let est = estimate_limit_set(
            &f,
            &[0],
            &half_line(),
            &[0.0],
            &[],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(est.outcomes.is_empty());
    }

    #[test]
    fn malformed_paths_error_out() {
        let f = obj(2, &["x1"]);
        let region = FeasibleSet::whole_space(2);
        let bad_dim = ProbePath::Parametric {
            exprs: vec![parse("x1").unwrap()],
            schedule: default_schedule(),
        };
        let err = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[bad_dim],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, AsymptoticsError::InvalidPath { index: 0, .. }));

        let bad_var = ProbePath::Parametric {
            exprs: vec![parse("x1").unwrap(), parse("x2").unwrap()],
            schedule: default_schedule(),
        };
        let err = estimate_limit_set(
            &f,
            &[0],
            &region,
            &[0.0],
            &[bad_var],
            LimitMode::Nu,
            &LimitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, AsymptoticsError::InvalidPath { .. }));
    }

    #[test]
    fn stationary_values_pick_up_the_vanishing_gradient() {
        let f = obj(1, &["(x1 - 1)^2"]);
        let region = FeasibleSet::whole_space(1);
        let grid = GridSpec::uniform(vec![(-2.0, 2.0)], 41);
        let sv = stationary_values(
            &f,
            &[0],
            &region,
            &[10.0],
            &grid,
            &LimitOptions::default(),
        )
        .unwrap();
        assert_eq!(sv.values.len(), 1);
        assert!(sv.values[0][0].abs() < 1e-12);
        assert_eq!(sv.flagged, 0);
        assert_eq!(sv.skipped, 0);
    }

    #[test]
    fn stationary_sweep_skips_degenerate_corners() {
        // The quadrant cut by (x1-x2)² + x1 - x2 ≤ 0 pinches at the origin:
        // three active normals in the plane make the corner degenerate, so
        // the sweep records a skip instead of failing.
        let f = obj(2, &["x1 + x2"]);
        let quadrant = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![0.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        let cut = SublevelSet::new(
            &obj(2, &["(x1 - x2)^2 + x1 - x2"]),
            &quadrant,
            &[0.0],
        )
        .unwrap();
        let grid = GridSpec::uniform(vec![(0.0, 1.0), (0.0, 1.0)], 5);
        let sv = stationary_values(
            &f,
            &[0],
            &cut,
            &[100.0],
            &grid,
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(sv.skipped >= 1, "skipped {}", sv.skipped);
    }

    #[test]
    fn coercive_problem_holds_vacuously_without_probes() {
        let f = obj(2, &["x1^2 + x2^2"]);
        let region = FeasibleSet::whole_space(2);
        for kind in ConditionKind::all() {
            let report = check_condition(
                kind,
                &f,
                &[0],
                &region,
                &[2.0, 0.0],
                &[],
                &SectionParams::default(),
                &LimitOptions::default(),
            )
            .unwrap();
            assert!(
                matches!(report.verdict, ConditionVerdict::Holds { .. }),
                "{kind:?}: {:?}",
                report.verdict
            );
        }
    }

    #[test]
    fn escaping_witness_fails_the_conditions() {
        let f = obj(1, &["exp(0 - x1)"]);
        let region = half_line();
        for kind in ConditionKind::all() {
            let report = check_condition(
                kind,
                &f,
                &[0],
                &region,
                &[0.0],
                &[ray_path()],
                &SectionParams::default(),
                &LimitOptions::default(),
            )
            .unwrap();
            match &report.verdict {
                ConditionVerdict::Fails { witness } => {
                    assert!(witness.value[0].abs() < 1e-9, "{kind:?}");
                }
                other => panic!("{kind:?}: expected failure, got {other:?}"),
            }
        }
    }

    #[test]
    fn classifier_downgrades_contradicted_vacuity() {
        let verdict = BoundedVerdict::SetBounded { radius: 8.0 };
        let estimate = LimitEstimate {
            outcomes: vec![PathOutcome {
                index: 0,
                status: PathStatus::SoftRejected("residual floor".into()),
                max_sublevel_norm: 4096.0,
                witness: None,
            }],
        };
        match classify(ConditionKind::PalaisSmale, &verdict, &estimate) {
            ConditionVerdict::Unknown { reason } => {
                assert!(reason.contains("beyond the sampled bound"), "{reason}")
            }
            other => panic!("expected unknown, got {other:?}"),
        }
        let consistent = LimitEstimate {
            outcomes: vec![PathOutcome {
                index: 0,
                status: PathStatus::SoftRejected("left the sublevel".into()),
                max_sublevel_norm: 2.0,
                witness: None,
            }],
        };
        match classify(ConditionKind::PalaisSmale, &verdict, &consistent) {
            ConditionVerdict::Holds { radius } => assert_eq!(radius, 8.0),
            other => panic!("expected holds, got {other:?}"),
        }
    }

    #[test]
    fn flagged_witnesses_leave_the_verdict_unknown() {
        let verdict = BoundedVerdict::Unknown { radius: 8.0 };
        let estimate = LimitEstimate {
            outcomes: vec![PathOutcome {
                index: 0,
                status: PathStatus::Accepted,
                max_sublevel_norm: 1e6,
                witness: Some(LimitWitness {
                    path: 0,
                    value: vec![0.0],
                    final_point: vec![1e6],
                    residuals: vec![0.0],
                    norms: vec![1e6],
                    flagged: true,
                }),
            }],
        };
        match classify(ConditionKind::PalaisSmale, &verdict, &estimate) {
            ConditionVerdict::Unknown { reason } => {
                assert!(reason.contains("inexact"), "{reason}")
            }
            other => panic!("expected unknown, got {other:?}"),
        }
    }

    #[test]
    fn refinement_walks_down_the_slope() {
        let phi = parse("x1").unwrap();
        let region = half_line();
        let params = EkelandParams {
            epsilon: 5.0,
            lambda: 2.0,
            resolution: 129,
            scan_factor: 4.0,
        };
        let p = ekeland_refine(&phi, &region, &[5.0], &params, 1e-7).unwrap();
        assert!((p.point[0] - 3.0).abs() < 1e-12);
        assert!((p.improvement - 2.0).abs() < 1e-12);
        assert!(p.verified, "slope 5/2 certificate should pass");

        let tight = EkelandParams {
            epsilon: 1.0,
            ..params
        };
        let p = ekeland_refine(&phi, &region, &[5.0], &tight, 1e-7).unwrap();
        assert!((p.point[0] - 3.0).abs() < 1e-12);
        assert!(!p.verified, "slope 1/2 cannot dominate the origin");
        let z = p.violation.expect("violating point");
        assert!(z[0] < 1.0, "violation should sit near the origin, got {z:?}");
    }

    #[test]
    fn refinement_validates_its_inputs() {
        let phi = parse("x2").unwrap();
        let region = half_line();
        let err = ekeland_refine(&phi, &region, &[1.0], &EkelandParams::default(), 1e-7)
            .unwrap_err();
        assert!(matches!(err, AsymptoticsError::BadInput(_)));
        let phi = parse("x1").unwrap();
        let err = ekeland_refine(&phi, &region, &[-1.0], &EkelandParams::default(), 1e-7)
            .unwrap_err();
        assert!(matches!(err, AsymptoticsError::BadInput(_)));
    }

    #[test]
    fn default_schedule_is_the_doubling_ladder() {
        let s = default_schedule();
        assert_eq!(s.len(), 21);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[20], 1048576.0);
        assert!(s.windows(2).all(|w| w[1] == 2.0 * w[0]));
    }
}
