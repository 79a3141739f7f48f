//! Sublevel sets, image sections, and the combinatorial side of the
//! solution theory: which objectives are constant near an anchor, descent
//! chains toward efficient points, and brute-force Pareto fronts on grids.
//!
//! The central type is [`SublevelSet`]: the feasible region intersected
//! with `f(x) ≤ y₀` componentwise. It is a [`Region`] in its own right, so
//! stationarity residuals and normal cones work on it unchanged. The
//! objective constraints are kept separate from the base cells on purpose:
//! a periodic base replicates its *geometry* along an axis, but the
//! objective threshold must cut every translate identically rather than
//! travel with it.
//!
//! Everything here is sampling-based. Verdicts are about the grid actually
//! examined — a reported index set means "constant on every sampled point",
//! not a symbolic proof — and the reports carry the witnesses (violating
//! points, improving points, minimum traces) so callers can re-check them.

use crate::dsl::{DslError, Expression, VectorObjective};
use crate::dsl::{constraint_to_smooth_dnf, sign_branches};
use crate::feasible::{
    active_normals, assemble_cone, conjunction_to_cell, Cell, ConeRep, FeasibleError,
    FeasibleSet, Region, MAX_SPLIT_CELLS,
};
use rayon::prelude::*;

/// Cap on stored sample points in a [`SectionReport`]; grids beyond this
/// keep only the leading points in grid order.
const SAMPLE_CAP: usize = 20_000;

/// Relative stall threshold: a per-doubling decrease of the sampled minimum
/// below this (scaled) size counts as "no longer decreasing".
const STALL_TOL: f64 = 1e-7;

/// Errors from sublevel construction and the sampling drivers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SectionsError {
    /// A point expected to lie in the region does not.
    #[error("anchor point {point:?} is not in the region (tol {tol:e})")]
    AnchorOutsideRegion { point: Vec<f64>, tol: f64 },
    /// Objective length and threshold length disagree.
    #[error("objective has {components} components but the threshold has {thresholds}")]
    ThresholdMismatch { components: usize, thresholds: usize },
    /// The index set is empty or names a component that does not exist.
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    /// Splitting the objective constraints into smooth branches exploded.
    #[error("objective constraints split into more than {limit} branches")]
    TooManyBranches { limit: usize },
    /// Expression-level failure while branching a constraint.
    #[error(transparent)]
    Dsl(#[from] DslError),
    /// Feasible-set failure underneath.
    #[error(transparent)]
    Feasible(#[from] FeasibleError),
}

/// The region `{x ∈ K : f(x) ≤ y₀}` (componentwise), as a [`Region`].
///
/// Membership requires the base region *and* at least one of the
/// `extra` disjunct cells (each a smooth conjunction equivalent to the
/// objective constraints on its branch). Normal cones are assembled per
/// (base cell instance, containing disjunct) pair, so an objective
/// component active at the threshold contributes its gradient as a ray
/// alongside the geometric normals.
#[derive(Debug, Clone)]
pub struct SublevelSet {
    base: FeasibleSet,
    /// Constraint-only disjunct cells (free boxes); `x` must satisfy one.
    extra: Vec<Cell>,
    /// True when no objective constraint was imposed at all.
    unconstrained: bool,
    threshold: Vec<f64>,
}

impl SublevelSet {
    /// `{x ∈ region : f(x) ≤ y0}`.
    pub fn new(
        f: &VectorObjective,
        region: &FeasibleSet,
        y0: &[f64],
    ) -> Result<SublevelSet, SectionsError> {
        if f.len() != y0.len() {
            return Err(SectionsError::ThresholdMismatch {
                components: f.len(),
                thresholds: y0.len(),
            });
        }
        let dim = region.dim();
        if f.is_empty() {
            return Ok(SublevelSet {
                base: region.clone(),
                extra: Vec::new(),
                unconstrained: true,
                threshold: Vec::new(),
            });
        }

        // Disjunctive normal form of every `fᵢ − y0ᵢ ≤ 0`, preferring the
        // seam-free distribution of abs/max/min.
        let mut per_component: Vec<Vec<Vec<Expression>>> = Vec::new();
        for (c, &t) in f.components().iter().zip(y0) {
            let shifted = Expression::Sub(Box::new(c.clone()), Box::new(Expression::Const(t)));
            let disjuncts = match constraint_to_smooth_dnf(&shifted) {
                Some(d) => d,
                None => sign_branches(&shifted)
                    .ok_or(SectionsError::TooManyBranches {
                        limit: MAX_SPLIT_CELLS,
                    })?
                    .into_iter()
                    .map(|(mut conditions, value)| {
                        conditions.push(value);
                        conditions
                    })
                    .collect(),
            };
            per_component.push(disjuncts);
        }

        let mut conjunctions: Vec<Vec<Expression>> = vec![Vec::new()];
        for disjuncts in &per_component {
            let mut next = Vec::new();
            for partial in &conjunctions {
                for d in disjuncts {
                    if next.len() >= MAX_SPLIT_CELLS {
                        return Err(SectionsError::TooManyBranches {
                            limit: MAX_SPLIT_CELLS,
                        });
                    }
                    let mut row = partial.clone();
                    row.extend(d.iter().cloned());
                    next.push(row);
                }
            }
            conjunctions = next;
        }

        let free = Cell::free(dim);
        let mut extra = Vec::new();
        for conj in &conjunctions {
            if let Some(cell) = conjunction_to_cell(&free, conj) {
                extra.push(cell);
            }
        }
        // `extra` may legitimately come out empty (e.g. a constant
        // objective above its threshold): membership is then always false.
        Ok(SublevelSet {
            base: region.clone(),
            extra,
            unconstrained: false,
            threshold: y0.to_vec(),
        })
    }

    /// `K_{x0} = {x ∈ region : f(x) ≤ f(x0)}`, anchored at a member point.
    pub fn at_point(
        f: &VectorObjective,
        region: &FeasibleSet,
        x0: &[f64],
        tol: f64,
    ) -> Result<SublevelSet, SectionsError> {
        if !region.contains(x0, tol) {
            return Err(SectionsError::AnchorOutsideRegion {
                point: x0.to_vec(),
                tol,
            });
        }
        SublevelSet::new(f, region, &f.eval(x0))
    }

    /// The componentwise threshold `y0` (empty when unconstrained).
    pub fn threshold(&self) -> &[f64] {
        &self.threshold
    }

    /// The underlying feasible set.
    pub fn base(&self) -> &FeasibleSet {
        &self.base
    }
}

impl Region for SublevelSet {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        if !self.base.contains(x, tol) {
            return false;
        }
        self.unconstrained || self.extra.iter().any(|c| c.contains(x, tol))
    }

    fn normal_cones(&self, x: &[f64], tol: f64) -> Result<Vec<ConeRep>, FeasibleError> {
        if x.len() != self.dim() {
            return Err(FeasibleError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let instances = self.base.containing_cells(x, tol);
        if instances.is_empty() {
            return Err(FeasibleError::NotInRegion {
                point: x.to_vec(),
                tol,
            });
        }
        if self.unconstrained {
            return instances
                .iter()
                .map(|cell| {
                    let (rays, lin) = active_normals(cell, x, tol)?;
                    assemble_cone(rays, lin, x)
                })
                .collect();
        }
        let disjuncts: Vec<&Cell> = self
            .extra
            .iter()
            .filter(|c| c.contains(x, tol))
            .collect();
        if disjuncts.is_empty() {
            return Err(FeasibleError::NotInRegion {
                point: x.to_vec(),
                tol,
            });
        }
        let mut cones = Vec::new();
        for cell in &instances {
            let (base_rays, base_lin) = active_normals(cell, x, tol)?;
            for d in &disjuncts {
                let (mut rays, mut lin) = (base_rays.clone(), base_lin.clone());
                let (extra_rays, extra_lin) = active_normals(d, x, tol)?;
                rays.extend(extra_rays);
                lin.extend(extra_lin);
                cones.push(assemble_cone(rays, lin, x)?);
            }
        }
        Ok(cones)
    }
}

/// A rectangular sampling window with per-axis resolutions.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Per-axis `(lo, hi)` bounds; must be finite and ordered.
    pub window: Vec<(f64, f64)>,
    /// Nodes per axis; broadcast from one entry if shorter than `window`.
    pub resolution: Vec<usize>,
}

impl GridSpec {
    /// A window with the same resolution on every axis.
    pub fn uniform(window: Vec<(f64, f64)>, resolution: usize) -> GridSpec {
        let n = window.len();
        GridSpec {
            window,
            resolution: vec![resolution; n],
        }
    }

    fn check(&self, dim: usize) -> Result<(), SectionsError> {
        if self.window.len() != dim {
            return Err(SectionsError::InvalidIndexSet(format!(
                "grid window covers {} axes for dimension {dim}",
                self.window.len()
            )));
        }
        if self.resolution.len() != dim {
            return Err(SectionsError::InvalidIndexSet(format!(
                "grid resolution covers {} axes for dimension {dim}",
                self.resolution.len()
            )));
        }
        Ok(())
    }
}

/// Validates a 0-based index set against an objective: nonempty, in range,
/// strictly increasing (which also rules out duplicates).
pub fn check_index_set(index_set: &[usize], f: &VectorObjective) -> Result<(), SectionsError> {
    if index_set.is_empty() {
        return Err(SectionsError::InvalidIndexSet(
            "index set is empty".to_string(),
        ));
    }
    for w in index_set.windows(2) {
        if w[0] >= w[1] {
            return Err(SectionsError::InvalidIndexSet(format!(
                "indices must be strictly increasing, got {:?}",
                index_set
            )));
        }
    }
    let last = *index_set.last().expect("nonempty");
    if last >= f.len() {
        return Err(SectionsError::InvalidIndexSet(format!(
            "component {} out of range for an objective with {} components",
            last,
            f.len()
        )));
    }
    Ok(())
}

/// Evidence about boundedness below of the sampled image section.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundedVerdict {
    /// Doubling the sampling radius stopped finding any new member: the
    /// sublevel set itself fits (as far as the grid can see) inside the
    /// reported radius around the anchor, so its image section is bounded.
    SetBounded { radius: f64 },
    /// Members keep appearing at larger radii but the componentwise sampled
    /// minimum of the selected objectives stabilized.
    ValuesBounded { box_min: Vec<f64>, radius: f64 },
    /// The sampled minimum kept strictly decreasing through the final
    /// doublings; the points realizing the drops are reported.
    UnboundedWitness { points: Vec<Vec<f64>> },
    /// Mixed or insufficient evidence at the reported radius.
    Unknown { radius: f64 },
}

impl BoundedVerdict {
    /// True for the two verdicts that count as evidence of boundedness
    /// below (the hypothesis shared by the existence results).
    pub fn is_bounded_evidence(&self) -> bool {
        matches!(
            self,
            BoundedVerdict::SetBounded { .. } | BoundedVerdict::ValuesBounded { .. }
        )
    }
}

/// Parameters of the doubling-radius section sampler.
#[derive(Debug, Clone)]
pub struct SectionParams {
    /// First sampling radius around the anchor.
    pub initial_radius: f64,
    /// Number of radius doublings after the first stage.
    pub doublings: usize,
    /// Grid nodes per axis at every stage.
    pub resolution: usize,
    /// Membership tolerance.
    pub tol: f64,
}

impl Default for SectionParams {
    fn default() -> Self {
        SectionParams {
            initial_radius: 1.0,
            doublings: 12,
            resolution: 33,
            tol: crate::DEFAULT_TOL,
        }
    }
}

/// Samples of the image section together with the boundedness verdict.
#[derive(Debug, Clone)]
pub struct SectionReport {
    pub verdict: BoundedVerdict,
    /// Radii of the sampling stages.
    pub radii: Vec<f64>,
    /// Componentwise running minimum of the selected objectives per stage.
    pub min_trace: Vec<Vec<f64>>,
    /// Sublevel-set members found at the final stage (capped).
    pub points: Vec<Vec<f64>>,
    /// Selected objective values at `points`.
    pub values: Vec<Vec<f64>>,
}

/// Samples `[f_I(K_{x0})]_{f_I(x0)}` over grids of doubling radius around
/// the anchor and classifies the boundedness evidence.
pub fn section_sample(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    params: &SectionParams,
) -> Result<SectionReport, SectionsError> {
    check_index_set(index_set, f)?;
    let sub = SublevelSet::at_point(f, region, x0, params.tol)?;
    let fi = f.restrict(index_set);
    let dim = region.dim();

    let mut radii = Vec::new();
    let mut min_trace: Vec<Vec<f64>> = Vec::new();
    let mut running_min = fi.eval(x0);
    let mut drop_points: Vec<Vec<f64>> = Vec::new(); // best new point per stage that lowered the min
    let mut final_points: Vec<Vec<f64>> = Vec::new();
    let mut final_values: Vec<Vec<f64>> = Vec::new();
    let mut outer_shell_occupied = false;

    for stage in 0..=params.doublings {
        let radius = params.initial_radius * 2f64.powi(stage as i32);
        let window: Vec<(f64, f64)> = x0.iter().map(|&c| (c - radius, c + radius)).collect();
        let members = sub.grid(&window, &vec![params.resolution; dim]);

        let mut stage_min = running_min.clone();
        let mut stage_drop: Option<(f64, Vec<f64>)> = None;
        if stage == params.doublings {
            let inner = radius / 2.0;
            outer_shell_occupied = members.iter().any(|p| {
                p.iter()
                    .zip(x0)
                    .any(|(a, c)| (a - c).abs() > inner * (1.0 + 1e-12))
            });
        }
        for p in &members {
            let v = fi.eval(p);
            let mut biggest = 0.0;
            for (m, &vi) in stage_min.iter_mut().zip(&v) {
                if vi < *m {
                    let d = *m - vi;
                    if d > biggest {
                        biggest = d;
                    }
                    *m = vi;
                }
            }
            if biggest > 0.0 && stage_drop.as_ref().map_or(true, |(b, _)| biggest > *b) {
                stage_drop = Some((biggest, p.clone()));
            }
            if stage == params.doublings && final_points.len() < SAMPLE_CAP {
                final_points.push(p.clone());
                final_values.push(v);
            }
        }
        if let Some((_, p)) = stage_drop {
            drop_points.push(p);
        } else {
            drop_points.push(Vec::new()); // marker: no drop this stage
        }
        radii.push(radius);
        running_min = stage_min;
        min_trace.push(running_min.clone());
    }

    // Classify. A stage "dropped" when some component's running minimum
    // fell by more than the stall tolerance relative to its size.
    let dropped: Vec<bool> = min_trace
        .iter()
        .enumerate()
        .map(|(k, cur)| {
            if k == 0 {
                return false;
            }
            min_trace[k - 1]
                .iter()
                .zip(cur)
                .any(|(prev, now)| prev - now > STALL_TOL * (1.0 + now.abs()))
        })
        .collect();
    let final_radius = *radii.last().expect("at least one stage");

    let verdict = if !outer_shell_occupied {
        BoundedVerdict::SetBounded {
            radius: final_radius / 2.0,
        }
    } else if dropped.len() >= 4 && dropped[dropped.len() - 3..].iter().all(|&d| d) {
        let mut points: Vec<Vec<f64>> = drop_points
            .iter()
            .rev()
            .filter(|p| !p.is_empty())
            .take(3)
            .cloned()
            .collect();
        points.reverse();
        BoundedVerdict::UnboundedWitness { points }
    } else if dropped.len() >= 3 && dropped[dropped.len() - 2..].iter().all(|&d| !d) {
        BoundedVerdict::ValuesBounded {
            box_min: running_min.clone(),
            radius: final_radius,
        }
    } else {
        BoundedVerdict::Unknown {
            radius: final_radius,
        }
    };

    Ok(SectionReport {
        verdict,
        radii,
        min_trace,
        points: final_points,
        values: final_values,
    })
}

/// One objective excluded from the sampled index set, with the point that
/// excluded it.
#[derive(Debug, Clone)]
pub struct IndexViolation {
    /// 0-based objective component.
    pub component: usize,
    /// Sublevel-set member where the component deviates from its anchor
    /// value.
    pub witness: Vec<f64>,
    /// `|fᵢ(witness) − fᵢ(x0)|`.
    pub deviation: f64,
}

/// The sampled index set `{i : fᵢ ≡ fᵢ(x0) on K_{x0}}` with witnesses for
/// every excluded component.
#[derive(Debug, Clone)]
pub struct IndexSetReport {
    /// 0-based components constant (within tolerance) on every sample.
    pub indices: Vec<usize>,
    /// Why the other components were excluded.
    pub violations: Vec<IndexViolation>,
    /// Number of sublevel-set samples examined (anchor included).
    pub samples: usize,
}

/// Samples `K_{x0}` on the grid and reports which objective components are
/// constant at their anchor value across every sample.
pub fn index_set(
    f: &VectorObjective,
    region: &FeasibleSet,
    x0: &[f64],
    grid: &GridSpec,
    tol: f64,
) -> Result<IndexSetReport, SectionsError> {
    grid.check(region.dim())?;
    let sub = SublevelSet::at_point(f, region, x0, tol)?;
    let mut members = sub.grid(&grid.window, &grid.resolution);
    members.push(x0.to_vec());
    let anchor = f.eval(x0);

    let mut indices = Vec::new();
    let mut violations = Vec::new();
    for i in 0..f.len() {
        let mut worst: Option<(f64, Vec<f64>)> = None;
        for p in &members {
            let d = (f.components()[i].eval(p) - anchor[i]).abs();
            if worst.as_ref().map_or(true, |(w, _)| d > *w) {
                worst = Some((d, p.clone()));
            }
        }
        let (deviation, witness) = worst.expect("anchor is always sampled");
        if deviation <= tol {
            indices.push(i);
        } else {
            violations.push(IndexViolation {
                component: i,
                witness,
                deviation,
            });
        }
    }
    Ok(IndexSetReport {
        indices,
        violations,
        samples: members.len(),
    })
}

/// One move of a descent chain.
#[derive(Debug, Clone)]
pub struct DescentStep {
    /// Anchor before the move.
    pub from: Vec<f64>,
    /// 0-based objective component that was improvable.
    pub component: usize,
    /// Grid member of `K_{from}` minimizing that component.
    pub to: Vec<f64>,
    /// Decrease achieved in the moved component.
    pub improvement: f64,
}

/// Why a descent chain stopped.
#[derive(Debug, Clone)]
pub enum DescentOutcome {
    /// Every objective is constant on the sampled sublevel set of `point`:
    /// a grid-level strong solution with the reported (full) index set.
    Terminated {
        point: Vec<f64>,
        index_set: Vec<usize>,
    },
    /// The step budget ran out while components were still improvable.
    BudgetExhausted { point: Vec<f64> },
}

/// A descent chain: the moves taken and how it ended.
#[derive(Debug, Clone)]
pub struct DescentTrace {
    pub steps: Vec<DescentStep>,
    pub outcome: DescentOutcome,
}

/// Walks from `x0` through successively smaller sublevel sets: while some
/// objective has a strictly better grid point in `K_{x_c}`, move to the
/// minimizer of the next such objective in cyclic order. Each move shrinks
/// the sublevel set, so on a fixed grid the walk terminates at a point
/// whose sampled index set is full — a grid-level strong solution.
pub fn descent_chain(
    f: &VectorObjective,
    region: &FeasibleSet,
    x0: &[f64],
    grid: &GridSpec,
    tol: f64,
    max_steps: usize,
) -> Result<DescentTrace, SectionsError> {
    grid.check(region.dim())?;
    if f.is_empty() {
        return Err(SectionsError::InvalidIndexSet(
            "objective has no components".to_string(),
        ));
    }
    let mut current = x0.to_vec();
    let mut steps = Vec::new();
    let mut cursor = 0usize; // next component to try, cyclic

    for _ in 0..max_steps {
        let sub = SublevelSet::at_point(f, region, &current, tol)?;
        let mut members = sub.grid(&grid.window, &grid.resolution);
        members.push(current.clone());
        let anchor = f.eval(&current);

        // Find the next improvable component in cyclic order from `cursor`.
        let mut chosen: Option<(usize, Vec<f64>, f64)> = None;
        for off in 0..f.len() {
            let j = (cursor + off) % f.len();
            let mut best: Option<(f64, Vec<f64>)> = None;
            for p in &members {
                let v = f.components()[j].eval(p);
                let better = match &best {
                    None => true,
                    Some((bv, bp)) => {
                        v < *bv || (v == *bv && lex_less(p, bp))
                    }
                };
                if better {
                    best = Some((v, p.clone()));
                }
            }
            let (bv, bp) = best.expect("anchor is always sampled");
            if anchor[j] - bv > tol {
                chosen = Some((j, bp, anchor[j] - bv));
                break;
            }
        }

        match chosen {
            None => {
                // No component improvable: sampled index set is full.
                return Ok(DescentTrace {
                    steps,
                    outcome: DescentOutcome::Terminated {
                        point: current,
                        index_set: (0..f.len()).collect(),
                    },
                });
            }
            Some((j, to, improvement)) => {
                steps.push(DescentStep {
                    from: current.clone(),
                    component: j,
                    to: to.clone(),
                    improvement,
                });
                current = to;
                cursor = (j + 1) % f.len();
            }
        }
    }
    Ok(DescentTrace {
        steps,
        outcome: DescentOutcome::BudgetExhausted { point: current },
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

/// Grid members of the region with their objective values and exact
/// (tolerance-free) Pareto flags.
#[derive(Debug, Clone)]
pub struct FrontReport {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    /// `weak[i]`: no sampled point beats `points[i]` strictly in every
    /// component.
    pub weak: Vec<bool>,
    /// `strong[i]`: no sampled point is at least as good everywhere and
    /// strictly better somewhere.
    pub strong: Vec<bool>,
}

/// Brute-force Pareto classification of every grid member. Comparisons are
/// exact: domination is decided on the computed `f` values with no
/// tolerance, which keeps `strong ⊆ weak` a theorem rather than a hope.
pub fn front(f: &VectorObjective, region: &impl Region, grid: &GridSpec) -> FrontReport {
    let points = region.grid(&grid.window, &grid.resolution);
    let values: Vec<Vec<f64>> = points.iter().map(|p| f.eval(p)).collect();
    let n = values.len();
    let weak: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            !(0..n).any(|j| {
                j != i && values[j].iter().zip(&values[i]).all(|(a, b)| a < b)
            })
        })
        .collect();
    let strong: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            !(0..n).any(|j| {
                j != i
                    && values[j].iter().zip(&values[i]).all(|(a, b)| a <= b)
                    && values[j].iter().zip(&values[i]).any(|(a, b)| a < b)
            })
        })
        .collect();
    FrontReport {
        points,
        values,
        weak,
        strong,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn obj(dim: usize, exprs: &[&str]) -> VectorObjective {
        VectorObjective::new(
            dim,
            exprs.iter().map(|s| parse(s).unwrap()).collect(),
        )
        .unwrap()
    }

    fn quadrant() -> FeasibleSet {
        FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![0.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap()
    }

    #[test]
    fn sublevel_membership_cuts_by_value() {
        let f = obj(2, &["x1 + x2"]);
        let sub = SublevelSet::at_point(&f, &quadrant(), &[1.0, 1.0], 1e-7).unwrap();
        assert!(sub.contains(&[0.5, 0.5], 1e-7));
        assert!(sub.contains(&[2.0, 0.0], 1e-7));
        assert!(!sub.contains(&[2.0, 0.1], 1e-7));
        assert!(!sub.contains(&[-0.5, 0.5], 1e-7)); // outside the base
    }

    #[test]
    fn objective_boundary_contributes_its_gradient() {
        let f = obj(2, &["x1 + x2"]);
        let sub = SublevelSet::at_point(&f, &quadrant(), &[1.0, 1.0], 1e-7).unwrap();
        let cones = sub.normal_cones(&[2.0, 0.0], 1e-7).unwrap();
        assert_eq!(cones.len(), 1);
        let mut dirs: Vec<Vec<f64>> = cones[0].rays.clone();
        dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(dirs, vec![vec![0.0, -1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn interior_of_the_sublevel_set_has_a_zero_cone() {
        let f = obj(2, &["x1 + x2"]);
        let sub = SublevelSet::at_point(&f, &quadrant(), &[1.0, 1.0], 1e-7).unwrap();
        let cones = sub.normal_cones(&[0.5, 0.5], 1e-7).unwrap();
        assert_eq!(cones.len(), 1);
        assert!(cones[0].is_zero());
    }

    #[test]
    fn abs_threshold_splits_without_an_interior_seam() {
        // |x1| ≤ 1/2 must become one disjunct with two affine rows, not a
        // union with a wall at x1 = 0.
        let f = obj(1, &["abs(x1)"]);
        let base = FeasibleSet::whole_space(1);
        let sub = SublevelSet::new(&f, &base, &[0.5]).unwrap();
        assert!(sub.contains(&[0.0], 1e-9));
        assert!(!sub.contains(&[0.6], 1e-9));
        let at_zero = sub.normal_cones(&[0.0], 1e-7).unwrap();
        assert_eq!(at_zero.len(), 1);
        assert!(at_zero[0].is_zero(), "no seam at the kink: {at_zero:?}");
        let at_edge = sub.normal_cones(&[0.5], 1e-7).unwrap();
        assert_eq!(at_edge[0].rays, vec![vec![1.0]]);
    }

    #[test]
    fn objective_constraints_do_not_travel_with_periodic_cells() {
        // Base: [0, π] repeated with period 2π. Objective x1 anchored at
        // π/2 caps the whole family at x1 ≤ π/2; the second translate must
        // not re-admit points by shifting the cap.
        let pi = std::f64::consts::PI;
        let base = FeasibleSet::with_periodic(
            1,
            vec![Cell::from_box(vec![0.0], vec![pi])],
            crate::feasible::Periodic {
                axis: 0,
                period: 2.0 * pi,
            },
        )
        .unwrap();
        let f = obj(1, &["x1"]);
        let sub = SublevelSet::at_point(&f, &base, &[0.5 * pi], 1e-7).unwrap();
        assert!(sub.contains(&[0.25 * pi], 1e-7));
        assert!(!sub.contains(&[2.0 * pi + 0.1], 1e-7));
        assert!(!sub.contains(&[2.5 * pi], 1e-7));
    }

    #[test]
    fn constant_objective_above_threshold_empties_the_set() {
        let f = obj(1, &["1"]);
        let base = FeasibleSet::whole_space(1);
        let sub = SublevelSet::new(&f, &base, &[0.0]).unwrap();
        assert!(!sub.contains(&[0.0], 1e-7));
        assert!(sub.grid(&[(-1.0, 1.0)], &[11]).is_empty());
    }

    #[test]
    fn coercive_sublevel_reports_set_bounded() {
        let f = obj(2, &["x1^2 + x2^2"]);
        let base = FeasibleSet::whole_space(2);
        let report = section_sample(
            &f,
            &[0],
            &base,
            &[3.0, 0.0],
            &SectionParams {
                doublings: 5,
                ..SectionParams::default()
            },
        )
        .unwrap();
        assert!(
            matches!(report.verdict, BoundedVerdict::SetBounded { .. }),
            "verdict: {:?}",
            report.verdict
        );
    }

    #[test]
    fn flat_tail_reports_values_bounded() {
        // exp(-x1) on [0, ∞): the set is unbounded but the sampled minimum
        // flattens to 0.
        let f = obj(1, &["exp(0 - x1)"]);
        let base = FeasibleSet::new(
            1,
            vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])],
        )
        .unwrap();
        let report =
            section_sample(&f, &[0], &base, &[0.0], &SectionParams::default()).unwrap();
        match &report.verdict {
            BoundedVerdict::ValuesBounded { box_min, .. } => {
                assert!(box_min[0].abs() < 1e-6);
            }
            other => panic!("expected ValuesBounded, got {other:?}"),
        }
    }

    #[test]
    fn linear_descent_reports_an_unbounded_witness() {
        let f = obj(1, &["0 - x1"]);
        let base = FeasibleSet::new(
            1,
            vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])],
        )
        .unwrap();
        let report =
            section_sample(&f, &[0], &base, &[0.0], &SectionParams::default()).unwrap();
        match &report.verdict {
            BoundedVerdict::UnboundedWitness { points } => {
                assert!(!points.is_empty());
                let norms: Vec<f64> = points.iter().map(|p| p[0].abs()).collect();
                assert!(norms.windows(2).all(|w| w[0] < w[1]));
            }
            other => panic!("expected UnboundedWitness, got {other:?}"),
        }
    }

    #[test]
    fn index_set_separates_constant_from_varying_components() {
        // f1 = x1 - x1 ≡ 0 everywhere; f2 = x2 varies on the sublevel set.
        let f = obj(2, &["x1 - x1", "x2"]);
        let report = index_set(
            &f,
            &quadrant(),
            &[1.0, 1.0],
            &GridSpec::uniform(vec![(0.0, 2.0), (0.0, 2.0)], 21),
            1e-7,
        )
        .unwrap();
        assert_eq!(report.indices, vec![0]);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.component, 1);
        assert!(v.deviation > 0.9 && v.deviation <= 1.0 + 1e-9);
        assert!(v.witness[1] < 0.1);
    }

    #[test]
    fn strict_tradeoff_pins_the_anchor() {
        // f = (x1, -x1): K_{x0} collapses to {x0}, so every component is
        // constant and the chain terminates without moving.
        let f = obj(1, &["x1", "0 - x1"]);
        let base = FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![1.0])]).unwrap();
        let trace = descent_chain(
            &f,
            &base,
            &[0.7],
            &GridSpec::uniform(vec![(0.0, 1.0)], 11),
            1e-7,
            50,
        )
        .unwrap();
        assert!(trace.steps.is_empty());
        match &trace.outcome {
            DescentOutcome::Terminated { point, index_set } => {
                assert_eq!(point, &vec![0.7]);
                assert_eq!(index_set, &vec![0, 1]);
            }
            other => panic!("expected termination, got {other:?}"),
        }
    }

    #[test]
    fn descent_chain_walks_to_the_corner() {
        let f = obj(2, &["x1 + x2", "x2"]);
        let base = FeasibleSet::new(
            2,
            vec![Cell::from_box(vec![0.0, 0.0], vec![1.0, 1.0])],
        )
        .unwrap();
        let trace = descent_chain(
            &f,
            &base,
            &[1.0, 1.0],
            &GridSpec::uniform(vec![(0.0, 1.0), (0.0, 1.0)], 11),
            1e-7,
            50,
        )
        .unwrap();
        match &trace.outcome {
            DescentOutcome::Terminated { point, .. } => {
                assert_eq!(point, &vec![0.0, 0.0]);
            }
            other => panic!("expected termination, got {other:?}"),
        }
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].component, 0);
    }

    #[test]
    fn tradeoff_front_keeps_every_point() {
        let f = obj(1, &["x1", "0 - x1"]);
        let base = FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![1.0])]).unwrap();
        let report = front(&f, &base, &GridSpec::uniform(vec![(0.0, 1.0)], 5));
        assert_eq!(report.points.len(), 5);
        assert!(report.weak.iter().all(|&w| w));
        assert!(report.strong.iter().all(|&s| s));
    }

    #[test]
    fn single_objective_front_is_the_minimum() {
        let f = obj(2, &["x1 + x2"]);
        let base = FeasibleSet::new(
            2,
            vec![Cell::from_box(vec![0.0, 0.0], vec![1.0, 1.0])],
        )
        .unwrap();
        let report = front(&f, &base, &GridSpec::uniform(vec![(0.0, 1.0), (0.0, 1.0)], 3));
        let strong_count = report.strong.iter().filter(|&&s| s).count();
        let weak_count = report.weak.iter().filter(|&&w| w).count();
        assert_eq!(strong_count, 1);
        assert_eq!(weak_count, 1);
        for i in 0..report.points.len() {
            assert!(!report.strong[i] || report.weak[i], "strong ⊆ weak");
        }
    }

    #[test]
    fn index_set_validation_rejects_bad_inputs() {
        let f = obj(2, &["x1", "x2"]);
        assert!(check_index_set(&[], &f).is_err());
        assert!(check_index_set(&[1, 0], &f).is_err());
        assert!(check_index_set(&[0, 0], &f).is_err());
        assert!(check_index_set(&[2], &f).is_err());
        assert!(check_index_set(&[0, 1], &f).is_ok());
    }

    #[test]
    fn anchor_outside_the_region_is_an_error() {
        let f = obj(2, &["x1"]);
        let err = SublevelSet::at_point(&f, &quadrant(), &[-1.0, 0.0], 1e-7).unwrap_err();
        assert!(matches!(err, SectionsError::AnchorOutsideRegion { .. }));
    }
}
