//! Stationarity residuals for nonsmooth vector objectives over cell-based
//! regions: the residual `ν` and membership in the tangency variety.
//!
//! At a point `x` of the region, `ν(x)` is the distance from the origin to
//! `conv(∂f₁(x) ∪ … ∪ ∂f_s(x)) + N(x)`: convex combinations of
//! subgradients of the components, translated by the normal cone. A zero
//! value is the Fritz-John style first-order condition; the decay of `ν`
//! along escaping sequences is what the asymptotic checkers watch.
//!
//! Tangency membership asks for slightly more: a combination
//! `Σαᵢvᵢ + μx + ω = 0` with `Σαᵢ + |μ| = 1`, `ω` in the normal cone. The
//! signed multiplier is handled by solving two one-sided problems (`μ ≥ 0`
//! and `μ ≤ 0`, i.e. the generator `+x` or `−x` joins the hull) and taking
//! the better branch, which avoids the degenerate cancellation `x − x = 0`
//! that a single convexification over `{±x}` would admit.
//!
//! Values are always computed, even when a subdifferential hull is only a
//! superset of the generalized gradient (stacked kinks): the result is then
//! a lower bound on the true residual and the `exact` flag is cleared so
//! callers can refuse to certify zero from it.

use crate::dsl::{DslError, HullRep, VectorObjective};
use crate::feasible::{FeasibleError, FeasibleSet, Region};
use crate::minnorm::{min_norm, MinNormResult};
use crate::sections::{check_index_set, SectionsError, SublevelSet};
use rayon::prelude::*;

/// Errors from residual evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StationarityError {
    /// The objective has no components.
    #[error("objective has no components")]
    EmptyObjective,
    /// Region-side failure: outside the region, degenerate corner, …
    #[error(transparent)]
    Feasible(#[from] FeasibleError),
    /// Expression-side failure while building subdifferential hulls.
    #[error(transparent)]
    Dsl(#[from] DslError),
    /// Sublevel-set construction failure (restricted residuals).
    #[error(transparent)]
    Sections(#[from] SectionsError),
}

/// Solver knobs shared by the residual evaluators.
#[derive(Debug, Clone)]
pub struct NuOptions {
    /// Active-constraint / membership tolerance.
    pub tol: f64,
    /// Convergence tolerance of the inner min-norm solves.
    pub minnorm_tol: f64,
    /// Iteration cap of the inner min-norm solves.
    pub max_iter: usize,
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            tol: crate::DEFAULT_TOL,
            minnorm_tol: crate::MINNORM_TOL,
            max_iter: crate::MINNORM_MAX_ITER,
        }
    }
}

/// The residual `ν` at a point.
#[derive(Debug, Clone)]
pub struct NuValue {
    /// Distance from the origin to the subgradient body (an upper bound on
    /// the true residual when the hulls are supersets; see `exact`).
    pub value: f64,
    /// Certified lower bound from the solver's duality gap, minimized over
    /// the candidate normal cones.
    pub lower_bound: f64,
    /// True when every hull was exact and every solve converged: the value
    /// is then the residual up to solver tolerance, and `value ≤ tol` may
    /// be read as stationarity.
    pub exact: bool,
    /// True when the value lies in `(tol, 10·tol]` — too large to accept as
    /// zero, too small to dismiss.
    pub marginal: bool,
    /// Convex weights aggregated per objective component.
    pub alpha: Vec<f64>,
    /// The minimizing vector itself.
    pub witness: Vec<f64>,
    /// Index of the normal cone (among the candidates at `x`) that
    /// attained the minimum.
    pub cone_index: usize,
    /// True when every inner solve closed its duality gap.
    pub converged: bool,
}

/// Outcome of a tangency-variety membership test.
#[derive(Debug, Clone)]
pub struct TangencyCertificate {
    /// Minimum over both multiplier branches of the distance to zero.
    pub residual: f64,
    /// Certified lower bound over all solves.
    pub lower_bound: f64,
    /// `residual ≤ tol`.
    pub member: bool,
    /// Residual in `(tol, 10·tol]`.
    pub marginal: bool,
    /// Hulls exact and solves converged.
    pub exact: bool,
    /// Convex weights aggregated per objective component (winning branch).
    pub alpha: Vec<f64>,
    /// Signed multiplier weight on `x` (winning branch).
    pub mu: f64,
    /// The minimizing vector.
    pub witness: Vec<f64>,
    /// True when the `μ ≥ 0` branch won (ties go here).
    pub branch_positive: bool,
}

/// Flattened union of the component subdifferential hulls: the generators,
/// the owning component of each, and whether all hulls were exact.
pub(crate) fn hull_union(
    f: &VectorObjective,
    x: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<usize>, bool), DslError> {
    let mut gens = Vec::new();
    let mut owner = Vec::new();
    let mut exact = true;
    for (i, c) in f.components().iter().enumerate() {
        let h: HullRep = c.subdiff(x, true)?;
        exact &= h.exact;
        for g in h.generators {
            gens.push(g);
            owner.push(i);
        }
    }
    Ok((gens, owner, exact))
}

fn aggregate_alpha(weights: &[f64], owner: &[usize], components: usize) -> Vec<f64> {
    let mut alpha = vec![0.0; components];
    for (w, &o) in weights.iter().zip(owner) {
        alpha[o] += w;
    }
    alpha
}

/// The residual `ν(x)` of `f` over `region`.
///
/// Errors propagate from the region (outside, degenerate corner — grid
/// sweeps catch and skip these; direct calls surface them) and from hull
/// construction.
pub fn nu(
    f: &VectorObjective,
    region: &impl Region,
    x: &[f64],
    opts: &NuOptions,
) -> Result<NuValue, StationarityError> {
    if f.is_empty() {
        return Err(StationarityError::EmptyObjective);
    }
    let cones = region.normal_cones(x, opts.tol)?;
    let (gens, owner, hulls_exact) = hull_union(f, x)?;

    let mut best: Option<(usize, MinNormResult)> = None;
    let mut lower = f64::INFINITY;
    let mut all_converged = true;
    for (ci, cone) in cones.iter().enumerate() {
        let r = min_norm(&gens, cone, opts.minnorm_tol, opts.max_iter);
        all_converged &= r.converged;
        lower = lower.min(r.lower_bound);
        if best.as_ref().map_or(true, |(_, b)| r.distance < b.distance) {
            best = Some((ci, r));
        }
    }
    let (cone_index, result) = best.expect("normal_cones never returns an empty list");
    let value = result.distance;
    Ok(NuValue {
        value,
        lower_bound: lower,
        exact: hulls_exact && all_converged,
        marginal: value > opts.tol && value <= 10.0 * opts.tol,
        alpha: aggregate_alpha(&result.weights, &owner, f.len()),
        witness: result.witness_point,
        cone_index,
        converged: all_converged,
    })
}

/// The restricted residual: `ν` of the sub-objective `f_I` over the
/// sublevel set `K_{x0} = {x ∈ region : f(x) ≤ f(x0)}`.
///
/// Convenience wrapper for single points; sweeps should build the
/// [`SublevelSet`] and restriction once and call [`nu`] directly.
pub fn nu_restricted(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    x: &[f64],
    opts: &NuOptions,
) -> Result<NuValue, StationarityError> {
    check_index_set(index_set, f)?;
    let sub = SublevelSet::at_point(f, region, x0, opts.tol)?;
    nu(&f.restrict(index_set), &sub, x, opts)
}

/// Tangency-variety membership of `x`: can zero be written as
/// `Σαᵢvᵢ + μx + ω` with `Σαᵢ + |μ| = 1` and `ω` in a normal cone?
pub fn tangency(
    f: &VectorObjective,
    region: &impl Region,
    x: &[f64],
    opts: &NuOptions,
) -> Result<TangencyCertificate, StationarityError> {
    if f.is_empty() {
        return Err(StationarityError::EmptyObjective);
    }
    let cones = region.normal_cones(x, opts.tol)?;
    let (gens, owner, hulls_exact) = hull_union(f, x)?;

    let mut best: Option<(bool, MinNormResult)> = None;
    let mut lower = f64::INFINITY;
    let mut all_converged = true;
    for positive in [true, false] {
        let mut branch_gens = gens.clone();
        branch_gens.push(if positive {
            x.to_vec()
        } else {
            x.iter().map(|v| -v).collect()
        });
        for cone in &cones {
            let r = min_norm(&branch_gens, cone, opts.minnorm_tol, opts.max_iter);
            all_converged &= r.converged;
            lower = lower.min(r.lower_bound);
            if best.as_ref().map_or(true, |(_, b)| r.distance < b.distance) {
                best = Some((positive, r));
            }
        }
    }

    // The raw instance mixes gradient-sized generators with ±x itself, so
    // at points far from the origin its solves are accurate only to
    // tol·‖x‖. When the best residual is small on that scale — a possible
    // member hiding behind conditioning — confirm with the unit direction
    // x̂ (membership is invariant under rescaling the multiplier atom) and
    // map the weights back to the Σα + |μ| = 1 normalization; the norm of
    // the recomposed point is a raw-feasible upper bound.
    let xnorm = crate::linalg::norm(x);
    let mag = gens
        .iter()
        .flat_map(|g| g.iter())
        .fold(xnorm, |m, &v| m.max(v.abs()));
    let looseness = 8.0 * opts.minnorm_tol * (1.0 + mag) + 2.0 * opts.tol;
    let needs_confirm = best
        .as_ref()
        .map_or(false, |(_, b)| b.distance > opts.tol && b.distance <= looseness);
    if needs_confirm && xnorm > 0.0 {
        for positive in [true, false] {
            let sign = if positive { 1.0 } else { -1.0 };
            let mut branch_gens = gens.clone();
            branch_gens.push(x.iter().map(|v| sign * v / xnorm).collect());
            for cone in &cones {
                let r = min_norm(&branch_gens, cone, opts.minnorm_tol, opts.max_iter);
                all_converged &= r.converged;
                let mu_hat = *r.weights.last().expect("multiplier atom present");
                let s = r.weights[..gens.len()].iter().sum::<f64>() + mu_hat / xnorm;
                if s <= 0.0 {
                    continue;
                }
                // Raw multipliers, renormalized to sum exactly to one.
                let mut weights: Vec<f64> =
                    r.weights[..gens.len()].iter().map(|w| w / s).collect();
                let mu_raw = mu_hat / xnorm / s;
                let total: f64 = weights.iter().sum::<f64>() + mu_raw;
                for w in &mut weights {
                    *w /= total;
                }
                let mu_raw = mu_raw / total;
                weights.push(mu_raw);
                let cone_coeffs: Vec<f64> =
                    r.cone_coeffs.iter().map(|c| c / s / total).collect();
                // Recompose the candidate point from the raw-feasible
                // multipliers and measure it directly.
                let mut point = vec![0.0; x.len()];
                for (w, g) in weights[..gens.len()].iter().zip(&gens) {
                    crate::linalg::axpy(&mut point, *w, g);
                }
                crate::linalg::axpy(&mut point, sign * mu_raw, x);
                for (c, dir) in cone_coeffs.iter().zip(cone.rays.iter().chain(&cone.lineality)) {
                    crate::linalg::axpy(&mut point, *c, dir);
                }
                let distance = crate::linalg::norm(&point);
                if best.as_ref().map_or(true, |(_, b)| distance < b.distance) {
                    best = Some((
                        positive,
                        MinNormResult {
                            distance,
                            lower_bound: lower.min(distance),
                            witness_point: point,
                            weights,
                            cone_coeffs,
                            iterations: r.iterations,
                            converged: r.converged,
                        },
                    ));
                }
            }
        }
    }
    let (branch_positive, result) = best.expect("normal_cones never returns an empty list");
    let mu_weight = *result.weights.last().expect("multiplier generator present");
    let residual = result.distance;
    Ok(TangencyCertificate {
        residual,
        lower_bound: lower,
        member: residual <= opts.tol,
        marginal: residual > opts.tol && residual <= 10.0 * opts.tol,
        exact: hulls_exact && all_converged,
        alpha: aggregate_alpha(&result.weights[..gens.len()], &owner, f.len()),
        mu: if branch_positive { mu_weight } else { -mu_weight },
        witness: result.witness_point,
        branch_positive,
    })
}

/// [`nu`] over many points in parallel, preserving order. Per-point errors
/// (a degenerate corner on the grid, a point off the region) come back as
/// `Err` entries for the caller to skip or surface.
pub fn nu_sweep<R: Region + Sync>(
    f: &VectorObjective,
    region: &R,
    points: &[Vec<f64>],
    opts: &NuOptions,
) -> Vec<Result<NuValue, StationarityError>> {
    points
        .par_iter()
        .map(|x| nu(f, region, x, opts))
        .collect()
}

/// [`tangency`] over many points in parallel, preserving order.
pub fn tangency_sweep<R: Region + Sync>(
    f: &VectorObjective,
    region: &R,
    points: &[Vec<f64>],
    opts: &NuOptions,
) -> Vec<Result<TangencyCertificate, StationarityError>> {
    points
        .par_iter()
        .map(|x| tangency(f, region, x, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::feasible::Cell;

    fn obj(dim: usize, exprs: &[&str]) -> VectorObjective {
        VectorObjective::new(dim, exprs.iter().map(|s| parse(s).unwrap()).collect()).unwrap()
    }

    fn opts() -> NuOptions {
        NuOptions::default()
    }

    #[test]
    fn interior_residual_is_the_gradient_norm() {
        let f = obj(2, &["(x1 - 1)^2 + x2^2"]);
        let free = FeasibleSet::whole_space(2);
        let v = nu(&f, &free, &[0.0, 0.0], &opts()).unwrap();
        assert!((v.value - 2.0).abs() < 1e-9);
        assert!(v.exact);
        assert!(!v.marginal);
        assert_eq!(v.alpha, vec![1.0]);
        let at_min = nu(&f, &free, &[1.0, 0.0], &opts()).unwrap();
        assert_eq!(at_min.value, 0.0);
        assert!(at_min.exact);
    }

    #[test]
    fn opposing_gradients_convexify_to_zero() {
        let f = obj(1, &["x1", "0 - x1"]);
        let free = FeasibleSet::whole_space(1);
        let v = nu(&f, &free, &[0.3], &opts()).unwrap();
        assert_eq!(v.value, 0.0);
        assert!((v.alpha[0] - 0.5).abs() < 1e-12);
        assert!((v.alpha[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kink_hull_reaches_zero_exactly() {
        // Components (½x₁²x₂ + x₁, |x₁|) at the origin of the half-plane
        // x₂ ≥ 0: the kink hull {±e₁} contains the first gradient's
        // cancellation, so ν = 0 exactly and the hull is exact.
        let f = obj(2, &["0.5*x1^2*x2 + x1", "abs(x1)"]);
        let region = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![-1.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        let v = nu(&f, &region, &[0.0, 0.0], &opts()).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.exact);
        assert!(!v.marginal);
    }

    #[test]
    fn restricted_residual_matches_the_closed_form() {
        // Anchor (-1, 2); the restricted residual of the first component
        // over the sublevel set is 1/(2n²) at (-1/n, n): the gradient's
        // first entry cancels there and the second is 1/(2n²); at n = 1
        // the boundary cone contains the leftover direction's complement.
        let f = obj(2, &["0.5*x1^2*x2 + x1", "abs(x1)"]);
        let region = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![-1.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        for n in [1.0f64, 2.0, 5.0, 10.0] {
            let v = nu_restricted(&f, &[0], &region, &[-1.0, 2.0], &[-1.0 / n, n], &opts())
                .unwrap();
            let expected = 1.0 / (2.0 * n * n);
            assert!(
                (v.value - expected).abs() <= 1e-8,
                "n = {n}: {} vs {expected}",
                v.value
            );
            assert!(v.exact);
        }
    }

    #[test]
    fn corner_of_the_sublevel_set_absorbs_the_gradient() {
        let f = obj(2, &["0.5*x1^2*x2 + x1", "abs(x1)"]);
        let region = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![-1.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        let v = nu_restricted(&f, &[0], &region, &[-1.0, 2.0], &[-1.0, 0.0], &opts()).unwrap();
        assert!(v.value <= 1e-8, "corner residual {}", v.value);
        assert!(v.exact);
    }

    #[test]
    fn radial_gradient_lies_in_the_tangency_variety() {
        let f = obj(2, &["x1^2 + x2^2"]);
        let free = FeasibleSet::whole_space(2);
        let c = tangency(&f, &free, &[3.0, 4.0], &opts()).unwrap();
        assert!(c.member, "residual {}", c.residual);
        assert!(c.exact);
        assert!(!c.branch_positive);
        assert!((c.alpha[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((c.mu + 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn linear_objective_balances_against_the_point() {
        let f = obj(1, &["x1"]);
        let free = FeasibleSet::whole_space(1);
        let c = tangency(&f, &free, &[2.0], &opts()).unwrap();
        assert!(c.member);
        assert!((c.alpha[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((c.mu + 1.0 / 3.0).abs() < 1e-9);
        assert!(!c.branch_positive);
    }

    #[test]
    fn orthogonal_position_stays_outside_the_variety() {
        // Gradient (1, 0) against position (0, 5): both branch segments
        // miss the origin, so the point is not in the variety.
        let f = obj(2, &["x1"]);
        let free = FeasibleSet::whole_space(2);
        let c = tangency(&f, &free, &[0.0, 5.0], &opts()).unwrap();
        assert!(!c.member);
        let expected = 5.0 / 26.0f64.sqrt();
        assert!((c.residual - expected).abs() < 1e-6, "{}", c.residual);
    }

    #[test]
    fn far_diagonal_points_stay_in_the_variety() {
        // Gradients (1, −1) and (−1, 0) against the far point (n, n): the
        // combination α = (α₁, 2α₁), μ = α₁/n is exact for every n, so
        // membership must survive the huge scale gap between the gradient
        // atoms and the multiplier atom.
        let f = obj(2, &["(x1 - x2)^2 + x1 - x2", "-x1"]);
        let quadrant = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![0.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        for k in [4, 10, 16, 20] {
            let n = 2.0f64.powi(k);
            let c = tangency(&f, &quadrant, &[n, n], &opts()).unwrap();
            assert!(
                c.residual <= 1e-7,
                "n = 2^{k}: residual {} should certify membership",
                c.residual
            );
            assert!(c.member, "n = 2^{k}");
            assert!(c.exact, "n = 2^{k}");
            assert!(c.branch_positive, "n = 2^{k}: μ is positive here");
            // Σα + |μ| = 1 within the documented normalization slack.
            let total: f64 = c.alpha.iter().sum::<f64>() + c.mu.abs();
            assert!((total - 1.0).abs() < 1e-10, "n = 2^{k}: total {total}");
        }
    }

    #[test]
    fn marginal_band_is_reported() {
        let f = obj(2, &["0.0000005 * x2"]);
        let free = FeasibleSet::whole_space(2);
        let v = nu(&f, &free, &[0.0, 0.0], &opts()).unwrap();
        assert!((v.value - 5e-7).abs() < 1e-12);
        assert!(v.marginal);
        assert!(v.exact);
    }

    #[test]
    fn inexact_hulls_clear_the_exact_flag() {
        // sin(abs(x1)) is differentiable nowhere-special at 0 but its hull
        // rule over-approximates; a zero residual from it must be flagged.
        let f = obj(1, &["sin(abs(x1))"]);
        let free = FeasibleSet::whole_space(1);
        let v = nu(&f, &free, &[0.0], &opts()).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(!v.exact);
    }

    #[test]
    fn errors_surface_for_direct_calls() {
        let f = obj(2, &["x1"]);
        let quadrant = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![0.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        let err = nu(&f, &quadrant, &[-1.0, 0.0], &opts()).unwrap_err();
        assert!(matches!(
            err,
            StationarityError::Feasible(FeasibleError::NotInRegion { .. })
        ));
    }

    #[test]
    fn sweep_preserves_order_and_isolates_errors() {
        let f = obj(1, &["x1^2"]);
        let half = FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])])
            .unwrap();
        let points = vec![vec![0.0], vec![-5.0], vec![2.0]];
        let out = nu_sweep(&f, &half, &points, &opts());
        assert_eq!(out.len(), 3);
        assert!(out[0].is_ok());
        assert!(out[1].is_err());
        let v = out[2].as_ref().unwrap();
        assert!((v.value - 4.0).abs() < 1e-9);
    }
}
