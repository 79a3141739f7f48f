//! Distance from the origin to `conv(G) + C`, for a finite generator list
//! `G` and a generator-represented cone `C`.
//!
//! This is the single convex program behind every stationarity residual in
//! the crate: the feasible region is the Minkowski sum of a V-polytope and a
//! cone, and we want the nearest point to the origin together with the
//! convex weights and cone coefficients that realize it.
//!
//! The solver splits the variable: Frank-Wolfe with away steps drives the
//! convex weights over `G` (linear minimization over a simplex is exact and
//! cheap, away steps restore linear convergence), while the cone
//! coefficients are handled by exact coordinate descent — minimizing
//! `½‖x + δr‖²` over `δ` is a one-dimensional quadratic, so each ray and
//! lineality direction is re-optimized to machine precision on every pass.
//! At a cone-optimal iterate `x` every ray satisfies `⟨x, r⟩ ≥ 0` and every
//! lineality direction `⟨x, l⟩ = 0`, which makes `min_g⟨x, g⟩ / ‖x‖` a
//! certified lower bound on the true distance; the solver stops when that
//! sandwich is `tol`-tight (or when `‖x‖` itself drops below `tol`, which
//! bounds the distance directly). Even a truncated run returns the sandwich
//! rather than a guess.
//!
//! Inputs are pre-scaled by a power of two so that the generator with the
//! largest coordinate lands near magnitude one. Powers of two keep every
//! floating-point operation exact under rescaling, which makes the solver
//! exactly positively homogeneous: doubling `G` doubles the reported
//! distance bit for bit. Instances whose hull contains the origin through a
//! cancelling pair of generators finish at distance exactly `0.0`.

use crate::feasible::ConeRep;
use crate::linalg;

/// Default convergence tolerance on the certified relative sandwich.
pub const DEFAULT_TOL: f64 = crate::MINNORM_TOL;

/// Weights below this threshold are dropped from the active set after a
/// step that mathematically zeroes them.
const WEIGHT_FLOOR: f64 = 1e-18;

/// Upper bound on cone-coordinate passes per outer iteration. Coordinate
/// descent on the cone block is a bound-constrained quadratic; a handful of
/// cyclic passes reaches its block optimum to rounding.
const CONE_SWEEP_LIMIT: usize = 16;

/// Relative dual-feasibility residue (per unit ray direction, per unit of
/// `‖x‖`) below which the cone block counts as optimal and the lower bound
/// as certified. Exact coordinate steps leave residues at rounding level,
/// orders of magnitude under this.
const DUAL_FEASIBILITY_FLOOR: f64 = 1e-12;

/// Solution of one min-norm instance.
#[derive(Debug, Clone)]
pub struct MinNormResult {
    /// `‖witness_point‖` — an upper bound on the true distance, within
    /// `tol·scale` of it when `converged` (with `scale` the power of two
    /// normalizing the largest generator coordinate).
    pub distance: f64,
    /// Certified lower bound: `min_g⟨x, g⟩ / ‖x‖` at a cone-dual-feasible
    /// iterate (clamped to `[0, distance]`), zero when no certificate was
    /// reached. Sound up to floating-point dual-feasibility residue.
    pub lower_bound: f64,
    /// The nearest point found, `Σ wᵢ gᵢ + Σ βⱼ rⱼ + Σ μₗ lₗ`.
    pub witness_point: Vec<f64>,
    /// Convex weights over the generators (nonnegative, sum 1).
    pub weights: Vec<f64>,
    /// Cone coefficients: one `βⱼ ≥ 0` per ray, then one signed `μₗ` per
    /// lineality direction.
    pub cone_coeffs: Vec<f64>,
    /// Outer iterations used.
    pub iterations: usize,
    /// False when the iteration budget ran out before the sandwich closed;
    /// the distance is then still an upper bound and `lower_bound` still
    /// holds.
    pub converged: bool,
}

/// Minimum-norm point of `conv(G) + C`.
///
/// `G` must be nonempty and dimensionally consistent with the cone
/// generators. The returned distance is within `tol·scale` of the optimum
/// once `converged` is true (`scale` ≈ the largest generator coordinate);
/// otherwise it is an upper bound and `lower_bound` a certified lower
/// bound.
pub fn min_norm(gens: &[Vec<f64>], cone: &ConeRep, tol: f64, max_iter: usize) -> MinNormResult {
    assert!(!gens.is_empty(), "min_norm needs at least one generator");
    assert!(tol > 0.0, "min_norm needs a positive tolerance");
    let dim = gens[0].len();
    for g in gens {
        assert_eq!(g.len(), dim, "generator dimensions disagree");
    }
    for r in cone.rays.iter().chain(&cone.lineality) {
        assert_eq!(r.len(), dim, "cone generator dimensions disagree");
    }

    // Power-of-two prescale: exact in floating point, so results are
    // exactly homogeneous in G.
    let mag = gens
        .iter()
        .flat_map(|g| g.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    if mag == 0.0 {
        // All generators are the origin: the hull contains 0.
        return MinNormResult {
            distance: 0.0,
            lower_bound: 0.0,
            witness_point: vec![0.0; dim],
            weights: std::iter::once(1.0)
                .chain(std::iter::repeat(0.0))
                .take(gens.len())
                .collect(),
            cone_coeffs: vec![0.0; cone.rays.len() + cone.lineality.len()],
            iterations: 0,
            converged: true,
        };
    }
    let scale = 2.0f64.powi(mag.log2().ceil() as i32);
    let scaled: Vec<Vec<f64>> = gens.iter().map(|g| linalg::scale(1.0 / scale, g)).collect();

    let (weights, beta, mu, x, lower_scaled, iterations, converged) =
        solve(&scaled, &cone.rays, &cone.lineality, tol, max_iter);

    let distance = scale * linalg::norm(&x);
    let mut cone_coeffs: Vec<f64> = beta.iter().chain(&mu).map(|c| c * scale).collect();
    // −0.0 coefficients read confusingly in reports; normalize them.
    for c in &mut cone_coeffs {
        if *c == 0.0 {
            *c = 0.0;
        }
    }
    MinNormResult {
        distance,
        lower_bound: (scale * lower_scaled).clamp(0.0, distance),
        witness_point: linalg::scale(scale, &x),
        weights,
        cone_coeffs,
        iterations,
        converged,
    }
}

/// The split solver in scaled units. Returns the simplex weights, ray and
/// lineality coefficients, the iterate, the certified scaled lower bound
/// (zero when uncertified), the iteration count, and convergence.
#[allow(clippy::type_complexity)]
fn solve(
    gens: &[Vec<f64>],
    rays: &[Vec<f64>],
    lins: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64, usize, bool) {
    let dim = gens[0].len();
    let ray_sq: Vec<f64> = rays.iter().map(|r| linalg::dot(r, r)).collect();
    let lin_sq: Vec<f64> = lins.iter().map(|l| linalg::dot(l, l)).collect();

    // Start at the cheapest generator (ties to the smallest index).
    let start = gens
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            linalg::norm(a)
                .partial_cmp(&linalg::norm(b))
                .expect("generator norms are finite")
        })
        .map(|(i, _)| i)
        .expect("nonempty generators");
    let mut w = vec![0.0; gens.len()];
    w[start] = 1.0;
    let mut beta = vec![0.0; rays.len()];
    let mut mu = vec![0.0; lins.len()];

    let rebuild = |w: &[f64], beta: &[f64], mu: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; dim];
        for (wi, g) in w.iter().zip(gens) {
            if *wi != 0.0 {
                linalg::axpy(&mut x, *wi, g);
            }
        }
        for (b, r) in beta.iter().zip(rays) {
            if *b != 0.0 {
                linalg::axpy(&mut x, *b, r);
            }
        }
        for (m, l) in mu.iter().zip(lins) {
            if *m != 0.0 {
                linalg::axpy(&mut x, *m, l);
            }
        }
        x
    };
    let mut x = rebuild(&w, &beta, &mu);

    let mut lower = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..max_iter {
        iterations = iter + 1;

        // Cone block: exact coordinate descent until it stops moving.
        for _ in 0..CONE_SWEEP_LIMIT {
            let mut moved = false;
            for (l, (lin, &lsq)) in lins.iter().zip(&lin_sq).enumerate() {
                if lsq == 0.0 {
                    continue;
                }
                let delta = -linalg::dot(&x, lin) / lsq;
                if delta != 0.0 {
                    mu[l] += delta;
                    linalg::axpy(&mut x, delta, lin);
                    moved = true;
                }
            }
            for (j, (ray, &rsq)) in rays.iter().zip(&ray_sq).enumerate() {
                if rsq == 0.0 {
                    continue;
                }
                let delta = (-linalg::dot(&x, ray) / rsq).max(-beta[j]);
                if delta != 0.0 {
                    beta[j] += delta;
                    linalg::axpy(&mut x, delta, ray);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }

        let norm_sq = linalg::dot(&x, &x);
        let xnorm = norm_sq.sqrt();

        // Linear minimization over the generator simplex.
        let mut fw = 0usize;
        let mut fw_dot = linalg::dot(&x, &gens[0]);
        for (i, g) in gens.iter().enumerate().skip(1) {
            let v = linalg::dot(&x, g);
            if v < fw_dot {
                fw = i;
                fw_dot = v;
            }
        }
        let gap = norm_sq - fw_dot;

        // Residual cone-dual infeasibility per unit direction.
        let mut viol = 0.0f64;
        for (ray, &rsq) in rays.iter().zip(&ray_sq) {
            if rsq > 0.0 {
                viol = viol.max(-linalg::dot(&x, ray) / rsq.sqrt());
            }
        }
        for (lin, &lsq) in lins.iter().zip(&lin_sq) {
            if lsq > 0.0 {
                viol = viol.max(linalg::dot(&x, lin).abs() / lsq.sqrt());
            }
        }

        let dual_ok = viol <= DUAL_FEASIBILITY_FLOOR * xnorm.max(tol);
        if dual_ok {
            lower = (fw_dot / xnorm.max(f64::MIN_POSITIVE)).max(0.0);
        }
        // Stop when x is within tol of zero (the optimum can be no closer
        // to the origin) or when the sandwich ‖x‖ − lower is tol-tight.
        if xnorm <= tol || (dual_ok && gap <= tol * xnorm) {
            converged = true;
            break;
        }

        // Simplex block: one Frank-Wolfe or away step with exact line
        // search. Moving weight toward generator g moves x along g − p,
        // with p the current generator part of x.
        let p = {
            let mut p = vec![0.0; dim];
            for (wi, g) in w.iter().zip(gens) {
                if *wi != 0.0 {
                    linalg::axpy(&mut p, *wi, g);
                }
            }
            p
        };
        let (away, away_dot) = {
            let mut best: Option<(usize, f64)> = None;
            for (i, g) in gens.iter().enumerate() {
                if w[i] > 0.0 {
                    let v = linalg::dot(&x, g);
                    if best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((i, v));
                    }
                }
            }
            best.expect("active set never empties")
        };

        let p_dot = linalg::dot(&x, &p);
        let desc_fw = p_dot - fw_dot;
        let desc_away = away_dot - p_dot;

        let fw_step = |w: &mut Vec<f64>, x: &[f64], p: &[f64]| -> bool {
            let d = {
                let mut d = gens[fw].clone();
                linalg::axpy(&mut d, -1.0, p);
                d
            };
            let denom = linalg::dot(&d, &d);
            if denom == 0.0 {
                return true; // the target vertex is the current point
            }
            let gamma = (-linalg::dot(x, &d) / denom).clamp(0.0, 1.0);
            if gamma >= 1.0 {
                w.iter_mut().for_each(|v| *v = 0.0);
                w[fw] = 1.0;
            } else {
                for v in w.iter_mut() {
                    *v *= 1.0 - gamma;
                }
                w[fw] += gamma;
            }
            false
        };

        let finished = if desc_fw >= desc_away {
            fw_step(&mut w, &x, &p)
        } else {
            let d = {
                let mut d = p.clone();
                linalg::axpy(&mut d, -1.0, &gens[away]);
                d
            };
            let denom = linalg::dot(&d, &d);
            let away_w = w[away];
            let gamma_max = if away_w >= 1.0 {
                0.0 // lone vertex: stepping away would leave the simplex
            } else {
                away_w / (1.0 - away_w)
            };
            let gamma = if denom == 0.0 {
                0.0
            } else {
                (-linalg::dot(&x, &d) / denom).clamp(0.0, gamma_max)
            };
            if gamma == 0.0 {
                // No progress available in the away direction; take the
                // Frank-Wolfe step instead.
                fw_step(&mut w, &x, &p)
            } else {
                for v in w.iter_mut() {
                    *v *= 1.0 + gamma;
                }
                w[away] -= gamma;
                if w[away] <= WEIGHT_FLOOR {
                    w[away] = 0.0;
                }
                false
            }
        };

        // Long runs accumulate rounding drift in the convex weights.
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-13 && sum > 0.0 {
            for v in w.iter_mut() {
                *v /= sum;
            }
        }
        x = rebuild(&w, &beta, &mu);
        if finished {
            // The simplex block is already optimal for this cone state;
            // re-enter the loop so the stop test runs on fresh numbers.
            continue;
        }
    }

    if !converged {
        // Budget exhausted: report the last certified lower bound only if
        // the final iterate is cone-dual feasible.
        let xnorm = linalg::norm(&x);
        let mut viol = 0.0f64;
        for (ray, &rsq) in rays.iter().zip(&ray_sq) {
            if rsq > 0.0 {
                viol = viol.max(-linalg::dot(&x, ray) / rsq.sqrt());
            }
        }
        for (lin, &lsq) in lins.iter().zip(&lin_sq) {
            if lsq > 0.0 {
                viol = viol.max(linalg::dot(&x, lin).abs() / lsq.sqrt());
            }
        }
        if viol > DUAL_FEASIBILITY_FLOOR * xnorm.max(tol) {
            lower = 0.0;
        } else {
            let mut fw_dot = f64::INFINITY;
            for g in gens {
                fw_dot = fw_dot.min(linalg::dot(&x, g));
            }
            lower = (fw_dot / xnorm.max(f64::MIN_POSITIVE)).max(0.0);
        }
    }

    (w, beta, mu, x, lower, iterations, converged)
}

/// Minimum of [`min_norm`] over paired generator lists and cones, as used
/// at cell junctions where several normal cones are candidates. Ties keep
/// the earliest pair.
pub fn min_norm_multi(
    gen_lists: &[Vec<Vec<f64>>],
    cones: &[ConeRep],
    tol: f64,
    max_iter: usize,
) -> MinNormResult {
    assert_eq!(gen_lists.len(), cones.len(), "generator/cone lists must align");
    assert!(!gen_lists.is_empty(), "min_norm_multi needs at least one pair");
    let mut best: Option<MinNormResult> = None;
    for (gens, cone) in gen_lists.iter().zip(cones) {
        let r = min_norm(gens, cone, tol, max_iter);
        let better = match &best {
            None => true,
            Some(b) => r.distance < b.distance,
        };
        if better {
            best = Some(r);
        }
    }
    best.expect("nonempty pair list")
}
