//! Feasible sets as finite unions of closed cells.
//!
//! A [`Cell`] is a box together with affine rows `a·x ≤ b` and smooth
//! inequalities `g(x) ≤ 0`; a [`FeasibleSet`] is a finite union of cells,
//! optionally replicated periodically along one coordinate (for sets like
//! unions of translated intervals). The module answers three questions:
//! membership within a tolerance, which grid nodes of a window are members,
//! and what the limiting normal cone at a member looks like.
//!
//! Normal cones are reported **per containing cell**: at a junction of two
//! cells the limiting normal cone of the union is not the union of the
//! per-cell cones in general, so callers receive the list and minimize
//! distances over it, which keeps downstream stationarity residuals valid
//! lower bounds. Each per-cell cone is generated by the active box-face
//! normals, active affine normals, and gradients of active smooth
//! constraints; when those generators are not linearly independent the cone
//! is not a simple generator cone and the computation refuses with a
//! degenerate-corner error rather than report a wrong cone.

use crate::dsl::{constraint_to_smooth_dnf, sign_branches, DslError, Expression};
use crate::linalg;
use thiserror::Error;

/// Hard cap on the number of cells produced by constraint splitting.
pub const MAX_SPLIT_CELLS: usize = 64;

/// Two generators are treated as positively parallel when the cosine of
/// their angle exceeds `1 - PARALLEL_TOL`.
const PARALLEL_TOL: f64 = 1e-12;

/// Relative pivot threshold for the rank test in the cone qualification.
const RANK_TOL: f64 = 1e-9;

/// Errors from membership, cone, and construction operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FeasibleError {
    /// Point has the wrong number of coordinates.
    #[error("point has {got} coordinates but the region lives in dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Cone request at a point outside the region.
    #[error("point {point:?} is not in the region (tolerance {tol:e})")]
    NotInRegion { point: Vec<f64>, tol: f64 },
    /// An active smooth constraint has a set-valued generalized gradient at
    /// the point, so the boundary normal direction is not a single ray.
    #[error("constraint `{constraint}` is active at {point:?} but not smooth there; \
             its boundary normal is set-valued")]
    NonsmoothActiveConstraint { constraint: String, point: Vec<f64> },
    /// The active normals are linearly dependent, so the normal cone is not
    /// the simple generator cone this representation can express.
    #[error("degenerate corner at {point:?}: {count} active normals span only rank {rank} \
             (active set: {active:?})", count = active.len())]
    DegenerateCorner {
        point: Vec<f64>,
        active: Vec<Vec<f64>>,
        rank: usize,
    },
    /// A cell fails validation (bounds, dimensions, nonsmooth constraint tree).
    #[error("cell {index}: {message}")]
    InvalidCell { index: usize, message: String },
    /// The periodic family description is unusable.
    #[error("periodic family: {0}")]
    InvalidPeriodic(String),
    /// Constraint splitting exceeded the cell budget.
    #[error("splitting the constraints needs more than {limit} cells; simplify the region")]
    TooManyCells { limit: usize },
    /// Every candidate cell simplified to an empty region.
    #[error("the constraint system is infeasible: every cell simplified away")]
    EmptyRegion,
    /// Expression-level failure (dimension, inexact hull, …).
    #[error(transparent)]
    Dsl(#[from] DslError),
}

/// One closed cell: a box plus affine and smooth inequalities.
///
/// Smooth constraint expressions must not contain `abs`/`max`/`min` nodes —
/// unions of cells express those shapes instead (see
/// [`FeasibleSet::from_constraints`]). `norm2` is allowed: it is smooth
/// wherever a constraint `norm2(…) ≤ c` with `c > 0` is active.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Per-coordinate lower bounds; `-inf` means unbounded.
    pub lower: Vec<f64>,
    /// Per-coordinate upper bounds; `+inf` means unbounded.
    pub upper: Vec<f64>,
    /// Rows `(a, b)` meaning `a·x ≤ b`.
    pub affine: Vec<(Vec<f64>, f64)>,
    /// Expressions `g` meaning `g(x) ≤ 0`.
    pub smooth: Vec<Expression>,
}

impl Cell {
    /// The unconstrained cell (all of `R^dim`).
    pub fn free(dim: usize) -> Cell {
        Cell {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            affine: Vec::new(),
            smooth: Vec::new(),
        }
    }

    /// A pure box cell.
    pub fn from_box(lower: Vec<f64>, upper: Vec<f64>) -> Cell {
        Cell {
            lower,
            upper,
            affine: Vec::new(),
            smooth: Vec::new(),
        }
    }

    /// Adds an affine row `a·x ≤ b`.
    pub fn with_affine(mut self, a: Vec<f64>, b: f64) -> Cell {
        self.affine.push((a, b));
        self
    }

    /// Adds a smooth inequality `g(x) ≤ 0`.
    pub fn with_smooth(mut self, g: Expression) -> Cell {
        self.smooth.push(g);
        self
    }

    fn validate(&self, dim: usize, index: usize) -> Result<(), FeasibleError> {
        let fail = |message: String| Err(FeasibleError::InvalidCell { index, message });
        if self.lower.len() != dim || self.upper.len() != dim {
            return fail(format!(
                "box has {}/{} bounds for dimension {dim}",
                self.lower.len(),
                self.upper.len()
            ));
        }
        for i in 0..dim {
            if self.lower[i].is_nan() || self.upper[i].is_nan() {
                return fail(format!("box bound for x{} is NaN", i + 1));
            }
            if self.lower[i] > self.upper[i] {
                return fail(format!(
                    "box is empty along x{}: {} > {}",
                    i + 1,
                    self.lower[i],
                    self.upper[i]
                ));
            }
        }
        for (a, b) in &self.affine {
            if a.len() != dim {
                return fail(format!("affine row has {} coefficients", a.len()));
            }
            if b.is_nan() || a.iter().any(|c| !c.is_finite()) {
                return fail("affine row has a non-finite entry".to_string());
            }
            if linalg::norm(a) == 0.0 {
                return fail("affine row has a zero normal".to_string());
            }
        }
        for g in &self.smooth {
            if let Some(i) = g.max_var() {
                if i >= dim {
                    return fail(format!("constraint `{g}` uses x{}", i + 1));
                }
            }
            if !has_no_kink_nodes(g) {
                return fail(format!(
                    "constraint `{g}` contains abs/max/min; split it into cells instead"
                ));
            }
        }
        Ok(())
    }

    /// Membership with an absolute slack `tol` on every inequality.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        for i in 0..x.len() {
            if x[i] < self.lower[i] - tol || x[i] > self.upper[i] + tol {
                return false;
            }
        }
        for (a, b) in &self.affine {
            if linalg::dot(a, x) - b > tol {
                return false;
            }
        }
        for g in &self.smooth {
            if g.eval(x) > tol {
                return false;
            }
        }
        true
    }

    /// The cell translated by `delta` along coordinate `axis`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Cell {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        if lower[axis].is_finite() {
            lower[axis] += delta;
        }
        if upper[axis].is_finite() {
            upper[axis] += delta;
        }
        let affine = self
            .affine
            .iter()
            .map(|(a, b)| (a.clone(), b + delta * a[axis]))
            .collect();
        let smooth = self
            .smooth
            .iter()
            .map(|g| g.shift_var(axis, delta))
            .collect();
        Cell {
            lower,
            upper,
            affine,
            smooth,
        }
    }
}

/// True when the tree contains no `abs`/`max`/`min` node (`norm2` allowed).
fn has_no_kink_nodes(e: &Expression) -> bool {
    use Expression as E;
    match e {
        E::Const(_) | E::Var(_) => true,
        E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) => {
            has_no_kink_nodes(a) && has_no_kink_nodes(b)
        }
        E::Neg(a) | E::Pow(a, _) | E::Sin(a) | E::Cos(a) | E::Exp(a) => has_no_kink_nodes(a),
        E::Abs(_) | E::Max(_) | E::Min(_) => false,
        E::Norm2(args) => args.iter().all(has_no_kink_nodes),
    }
}

/// Periodic replication of every cell along one axis: instance `k` is the
/// base cell translated by `k·period` for `k = 0, 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodic {
    /// 0-based coordinate the family is translated along.
    pub axis: usize,
    /// Translation step; must be positive.
    pub period: f64,
}

/// A generator representation of a closed convex cone:
/// `{Σ λⱼ rⱼ + Σ μₗ lₗ : λⱼ ≥ 0, μₗ ∈ R}`. The zero vector is always a
/// member; an interior point gets the zero cone (no generators).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConeRep {
    /// Nonnegative-combination generators.
    pub rays: Vec<Vec<f64>>,
    /// Free-combination generators (lines through the origin).
    pub lineality: Vec<Vec<f64>>,
}

impl ConeRep {
    /// The zero cone `{0}`.
    pub fn zero() -> ConeRep {
        ConeRep::default()
    }

    /// True when the cone is exactly `{0}`.
    pub fn is_zero(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }
}

/// Anything that can act as the constraint region of a problem: the base
/// feasible set or a sublevel set built on top of it.
pub trait Region {
    /// Ambient dimension.
    fn dim(&self) -> usize;

    /// Membership with absolute slack `tol` on every inequality.
    fn contains(&self, x: &[f64], tol: f64) -> bool;

    /// Limiting normal cones at `x`, one per containing cell. Constraints
    /// within `tol` of their bound count as active.
    fn normal_cones(&self, x: &[f64], tol: f64) -> Result<Vec<ConeRep>, FeasibleError>;

    /// Member nodes of the rectangular grid over `window` with `resolution`
    /// nodes per axis, in row-major order (last axis fastest). Resolution 1
    /// samples the lower edge of the axis. Membership uses the module's
    /// active-constraint tolerance.
    fn grid(&self, window: &[(f64, f64)], resolution: &[usize]) -> Vec<Vec<f64>> {
        assert_eq!(window.len(), self.dim(), "window dimension mismatch");
        assert_eq!(resolution.len(), self.dim(), "resolution dimension mismatch");
        assert!(
            window.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi)
                && resolution.iter().all(|&r| r >= 1),
            "grid needs a finite ordered window and positive resolutions"
        );
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim()];
        let mut x = vec![0.0; self.dim()];
        loop {
            for i in 0..self.dim() {
                let (lo, hi) = window[i];
                let r = resolution[i];
                x[i] = if r == 1 {
                    lo
                } else {
                    lo + idx[i] as f64 * (hi - lo) / (r - 1) as f64
                };
            }
            if self.contains(&x, crate::ACTIVE_CONSTRAINT_TOL) {
                out.push(x.clone());
            }
            // Row-major odometer: advance the last axis first.
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < resolution[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
}

/// A closed feasible set: a finite union of cells, optionally replicated
/// periodically along one axis.
///
/// Periodic families are conceptually infinite (`k = 0, 1, 2, …`); every
/// operation instantiates only the finitely many translates that can touch
/// the queried point or window. Verdicts that would require looking past
/// that finite range (emptiness or boundedness over the whole family) are
/// therefore out of scope here and reported as unknown by the callers that
/// need them.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    dim: usize,
    cells: Vec<Cell>,
    periodic: Option<Periodic>,
}

impl FeasibleSet {
    /// A plain union of cells.
    pub fn new(dim: usize, cells: Vec<Cell>) -> Result<FeasibleSet, FeasibleError> {
        if cells.is_empty() {
            return Err(FeasibleError::EmptyRegion);
        }
        for (i, c) in cells.iter().enumerate() {
            c.validate(dim, i)?;
        }
        Ok(FeasibleSet {
            dim,
            cells,
            periodic: None,
        })
    }

    /// All of `R^dim`.
    pub fn whole_space(dim: usize) -> FeasibleSet {
        FeasibleSet {
            dim,
            cells: vec![Cell::free(dim)],
            periodic: None,
        }
    }

    /// A union of cells replicated by `periodic`. Every cell must be bounded
    /// along the periodic axis so the set of relevant translates of a point
    /// stays finite.
    pub fn with_periodic(
        dim: usize,
        cells: Vec<Cell>,
        periodic: Periodic,
    ) -> Result<FeasibleSet, FeasibleError> {
        let mut set = FeasibleSet::new(dim, cells)?;
        if periodic.axis >= dim {
            return Err(FeasibleError::InvalidPeriodic(format!(
                "axis {} out of range for dimension {dim}",
                periodic.axis
            )));
        }
        if !(periodic.period > 0.0) || !periodic.period.is_finite() {
            return Err(FeasibleError::InvalidPeriodic(format!(
                "period must be a positive finite number, got {}",
                periodic.period
            )));
        }
        for (i, c) in set.cells.iter().enumerate() {
            if !c.lower[periodic.axis].is_finite() || !c.upper[periodic.axis].is_finite() {
                return Err(FeasibleError::InvalidPeriodic(format!(
                    "cell {i} is unbounded along the periodic axis"
                )));
            }
        }
        set.periodic = Some(periodic);
        Ok(set)
    }

    /// Build a union of smooth cells from a box plus arbitrary constraint
    /// expressions `e ≤ 0`.
    ///
    /// Constraints whose `abs`/`max`/`min` structure distributes are split
    /// without cutting the region along kink loci (`|u| ≤ c` becomes the two
    /// inequalities of **one** cell, `min(a,b) ≤ 0` a genuine two-cell
    /// union). Constraints that do not distribute fall back to sign-regime
    /// branching, which introduces interior walls between branches: harmless
    /// for membership, but normal cones at those walls gain spurious rays,
    /// so the fallback is only taken when necessary.
    pub fn from_constraints(
        dim: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        constraints: &[Expression],
    ) -> Result<FeasibleSet, FeasibleError> {
        let base = Cell::from_box(lower, upper);
        base.validate(dim, 0).map_err(|e| match e {
            FeasibleError::InvalidCell { message, .. } => FeasibleError::InvalidCell {
                index: 0,
                message: format!("base box: {message}"),
            },
            other => other,
        })?;
        for c in constraints {
            if let Some(i) = c.max_var() {
                if i >= dim {
                    return Err(DslError::VarOutOfRange { index: i, dim }.into());
                }
            }
        }

        // Disjunctive normal form of each constraint, preferring the
        // seam-free distribution.
        let mut per_constraint: Vec<Vec<Vec<Expression>>> = Vec::new();
        for c in constraints {
            let disjuncts = match constraint_to_smooth_dnf(c) {
                Some(d) => d,
                None => sign_branches(c)
                    .ok_or(FeasibleError::TooManyCells {
                        limit: MAX_SPLIT_CELLS,
                    })?
                    .into_iter()
                    .map(|(mut conditions, value)| {
                        conditions.push(value);
                        conditions
                    })
                    .collect(),
            };
            per_constraint.push(disjuncts);
        }

        // Cross product of the disjunct choices.
        let mut conjunctions: Vec<Vec<Expression>> = vec![Vec::new()];
        for disjuncts in &per_constraint {
            let mut next = Vec::new();
            for partial in &conjunctions {
                for d in disjuncts {
                    if next.len() >= MAX_SPLIT_CELLS {
                        return Err(FeasibleError::TooManyCells {
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

        let mut cells = Vec::new();
        for conj in &conjunctions {
            if let Some(cell) = conjunction_to_cell(&base, conj) {
                cells.push(cell);
            }
        }
        if cells.is_empty() {
            return Err(FeasibleError::EmptyRegion);
        }
        FeasibleSet::new(dim, cells)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The base cells (unshifted for periodic families).
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// The periodic replication, if any.
    pub fn periodic(&self) -> Option<&Periodic> {
        self.periodic.as_ref()
    }

    /// The translates of `cell` (as shift distances) whose boxes can contain
    /// `x` within `tol`. Non-periodic sets always yield the single shift 0.
    fn candidate_shifts(&self, cell: &Cell, x: &[f64], tol: f64) -> Vec<f64> {
        match &self.periodic {
            None => vec![0.0],
            Some(p) => {
                let lo = cell.lower[p.axis];
                let hi = cell.upper[p.axis];
                let v = x[p.axis];
                // lo + kp ≤ v ≤ hi + kp  ⟺  (v−hi)/p ≤ k ≤ (v−lo)/p.
                let k_lo = ((v - hi - tol) / p.period).ceil().max(0.0);
                let k_hi = ((v - lo + tol) / p.period).floor();
                let mut shifts = Vec::new();
                if k_hi >= k_lo && k_hi >= 0.0 {
                    let mut k = k_lo;
                    while k <= k_hi && shifts.len() < 64 {
                        shifts.push(k * p.period);
                        k += 1.0;
                    }
                }
                shifts
            }
        }
    }

    /// Materialized cell instances containing `x` within `tol`, in
    /// deterministic order (cell index, then increasing shift).
    pub(crate) fn containing_cells(&self, x: &[f64], tol: f64) -> Vec<Cell> {
        let mut out = Vec::new();
        for cell in &self.cells {
            for delta in self.candidate_shifts(cell, x, tol) {
                let instance = if delta == 0.0 {
                    cell.clone()
                } else {
                    cell.shifted(self.periodic.as_ref().expect("shift implies periodic").axis, delta)
                };
                if instance.contains(x, tol) {
                    out.push(instance);
                }
            }
        }
        out
    }
}

impl Region for FeasibleSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        self.cells.iter().any(|cell| {
            self.candidate_shifts(cell, x, tol).into_iter().any(|delta| {
                if delta == 0.0 {
                    cell.contains(x, tol)
                } else {
                    cell.shifted(self.periodic.as_ref().expect("periodic").axis, delta)
                        .contains(x, tol)
                }
            })
        })
    }

    fn normal_cones(&self, x: &[f64], tol: f64) -> Result<Vec<ConeRep>, FeasibleError> {
        if x.len() != self.dim {
            return Err(FeasibleError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let instances = self.containing_cells(x, tol);
        if instances.is_empty() {
            return Err(FeasibleError::NotInRegion {
                point: x.to_vec(),
                tol,
            });
        }
        instances
            .iter()
            .map(|cell| {
                let (rays, lineality) = active_normals(cell, x, tol)?;
                assemble_cone(rays, lineality, x)
            })
            .collect()
    }
}

/// Active generators of one cell at `x`: box-face normals (`∓eᵢ`, or a
/// lineality direction when the coordinate is pinned between equal bounds),
/// active affine normals, and gradients of active smooth constraints.
pub(crate) fn active_normals(
    cell: &Cell,
    x: &[f64],
    tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), FeasibleError> {
    let dim = x.len();
    let mut rays: Vec<Vec<f64>> = Vec::new();
    let mut lineality: Vec<Vec<f64>> = Vec::new();
    let unit = |i: usize, sign: f64| {
        let mut v = vec![0.0; dim];
        v[i] = sign;
        v
    };
    for i in 0..dim {
        let lo_active = cell.lower[i].is_finite() && (x[i] - cell.lower[i]).abs() <= tol;
        let up_active = cell.upper[i].is_finite() && (x[i] - cell.upper[i]).abs() <= tol;
        match (lo_active, up_active) {
            (true, true) => lineality.push(unit(i, 1.0)),
            (true, false) => rays.push(unit(i, -1.0)),
            (false, true) => rays.push(unit(i, 1.0)),
            (false, false) => {}
        }
    }
    for (a, b) in &cell.affine {
        if (linalg::dot(a, x) - b).abs() <= tol {
            rays.push(a.clone());
        }
    }
    for g in &cell.smooth {
        if g.eval(x).abs() <= tol {
            let hull = g.subdiff(x, false)?;
            match hull.as_singleton() {
                Some(v) => rays.push(v.to_vec()),
                None => {
                    return Err(FeasibleError::NonsmoothActiveConstraint {
                        constraint: g.to_string(),
                        point: x.to_vec(),
                    })
                }
            }
        }
    }
    Ok((rays, lineality))
}

/// Deduplicates generators and checks the qualification that the remaining
/// ones are linearly independent; on failure reports a degenerate corner.
///
/// Opposite ray pairs (from a pair of inequalities acting as an equality)
/// merge into a lineality direction; rays parallel to a lineality direction
/// and positively-parallel duplicate rays are dropped.
pub(crate) fn assemble_cone(
    rays: Vec<Vec<f64>>,
    lineality: Vec<Vec<f64>>,
    x: &[f64],
) -> Result<ConeRep, FeasibleError> {
    let cos = |u: &[f64], v: &[f64]| {
        let nu = linalg::norm(u);
        let nv = linalg::norm(v);
        if nu <= PARALLEL_TOL || nv <= PARALLEL_TOL {
            // Zero generators carry no direction; the rank test flags them.
            return f64::NAN;
        }
        linalg::dot(u, v) / (nu * nv)
    };

    let mut lin: Vec<Vec<f64>> = Vec::new();
    for l in lineality {
        if !lin.iter().any(|k| cos(k, &l).abs() >= 1.0 - PARALLEL_TOL) {
            lin.push(l);
        }
    }

    // Merge opposite ray pairs into lineality directions.
    let mut kept: Vec<Vec<f64>> = Vec::new();
    'next_ray: for r in rays {
        if linalg::norm(&r) <= PARALLEL_TOL {
            // A vanishing gradient cannot certify a boundary direction.
            kept.push(r);
            continue;
        }
        for i in 0..kept.len() {
            let c = cos(&kept[i], &r);
            if c >= 1.0 - PARALLEL_TOL {
                continue 'next_ray; // duplicate direction
            }
            if c <= -(1.0 - PARALLEL_TOL) {
                let l = kept.remove(i);
                if !lin.iter().any(|k| cos(k, &l).abs() >= 1.0 - PARALLEL_TOL) {
                    lin.push(l);
                }
                continue 'next_ray;
            }
        }
        if lin.iter().any(|k| cos(k, &r).abs() >= 1.0 - PARALLEL_TOL) {
            continue; // absorbed by a lineality direction
        }
        kept.push(r);
    }

    let count = kept.len() + lin.len();
    if count > 0 {
        let mut stacked = kept.clone();
        stacked.extend(lin.iter().cloned());
        let rank = linalg::rank(&stacked, RANK_TOL);
        if rank < count {
            return Err(FeasibleError::DegenerateCorner {
                point: x.to_vec(),
                active: stacked,
                rank,
            });
        }
    }
    Ok(ConeRep {
        rays: kept,
        lineality: lin,
    })
}

/// Turns a conjunction of `e ≤ 0` constraints into a cell on top of `base`,
/// classifying each conjunct as constant (checked and dropped), affine
/// (row), or smooth. Returns `None` when a constant conjunct is violated,
/// i.e. the whole conjunction is infeasible.
pub(crate) fn conjunction_to_cell(base: &Cell, conjuncts: &[Expression]) -> Option<Cell> {
    let dim = base.lower.len();
    let mut cell = base.clone();
    for e in conjuncts {
        if e.max_var().is_none() {
            if e.eval(&[]) > 0.0 {
                return None;
            }
            continue;
        }
        match as_affine(e, dim) {
            Some((a, c)) if linalg::norm(&a) == 0.0 => {
                // Coefficients cancelled to a constant.
                if c > 0.0 {
                    return None;
                }
            }
            // e(x) = a·x + c ≤ 0  ⟺  a·x ≤ −c.
            Some((a, c)) => cell.affine.push((a, -c)),
            None => cell.smooth.push(e.clone()),
        }
    }
    Some(cell)
}

/// Writes `e` as `a·x + c` when the tree is affine; `None` otherwise.
fn as_affine(e: &Expression, dim: usize) -> Option<(Vec<f64>, f64)> {
    use Expression as E;
    if e.max_var().is_none() {
        return Some((vec![0.0; dim], e.eval(&[])));
    }
    match e {
        E::Const(c) => Some((vec![0.0; dim], *c)),
        E::Var(i) => {
            let mut a = vec![0.0; dim];
            a[*i] = 1.0;
            Some((a, 0.0))
        }
        E::Add(l, r) => {
            let (la, lc) = as_affine(l, dim)?;
            let (ra, rc) = as_affine(r, dim)?;
            Some((linalg::add(&la, &ra), lc + rc))
        }
        E::Sub(l, r) => {
            let (la, lc) = as_affine(l, dim)?;
            let (ra, rc) = as_affine(r, dim)?;
            Some((linalg::sub(&la, &ra), lc - rc))
        }
        E::Neg(a) => {
            let (va, vc) = as_affine(a, dim)?;
            Some((linalg::scale(-1.0, &va), -vc))
        }
        E::Mul(l, r) => {
            if l.max_var().is_none() {
                let c = l.eval(&[]);
                let (ra, rc) = as_affine(r, dim)?;
                Some((linalg::scale(c, &ra), c * rc))
            } else if r.max_var().is_none() {
                let c = r.eval(&[]);
                let (la, lc) = as_affine(l, dim)?;
                Some((linalg::scale(c, &la), c * lc))
            } else {
                None
            }
        }
        E::Pow(a, 1) => as_affine(a, dim),
        _ => None,
    }
}
