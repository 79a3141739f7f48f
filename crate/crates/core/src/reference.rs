//! Slow, independent reference implementations used by the test suites to
//! cross-check the fast paths.
//!
//! Nothing here shares code with the production solvers: the min-norm
//! oracle enumerates active sets and solves tiny KKT systems, derivatives
//! come from difference quotients, and the front oracle is a plain double
//! loop. Keep it that way — the value of this module is that a bug in the
//! fast path and a bug here are unlikely to agree.

use crate::dsl::Expression;
use crate::feasible::ConeRep;
use crate::linalg;

/// Distance from the origin to `conv(gens) + cone` by active-set
/// enumeration: for every support (nonempty generator subset × ray
/// subset, lineality always free) solve the equality-constrained least
/// squares problem, clip the solution to feasibility, and keep the best
/// value. The true optimum's support appears among the subsets, so the
/// minimum over candidates is the distance.
///
/// Exponential in the generator count — intended for instances with a
/// handful of generators, as the randomized comparison suites use.
pub fn oracle_min_norm(gens: &[Vec<f64>], cone: &ConeRep) -> f64 {
    assert!(!gens.is_empty(), "need at least one generator");
    let dim = gens[0].len();
    let rays = &cone.rays;
    let lins = &cone.lineality;
    assert!(gens.len() <= 16 && rays.len() <= 16, "oracle is exponential");

    let mut best = f64::INFINITY;
    for gmask in 1u32..(1 << gens.len()) {
        let support: Vec<&Vec<f64>> = (0..gens.len())
            .filter(|i| gmask & (1 << i) != 0)
            .map(|i| &gens[i])
            .collect();
        for rmask in 0u32..(1 << rays.len()) {
            let active_rays: Vec<&Vec<f64>> = (0..rays.len())
                .filter(|j| rmask & (1 << j) != 0)
                .map(|j| &rays[j])
                .collect();
            if let Some(v) = support_candidate(dim, &support, &active_rays, lins) {
                best = best.min(v);
            }
        }
    }
    best
}

/// Solves `min ‖Σwᵢsᵢ + Σβⱼrⱼ + Σγₗlₗ‖²` with `Σwᵢ = 1` by its KKT
/// system, clips `w` and `β` to feasibility, and returns the objective at
/// the clipped point (a valid upper bound; exact on the optimal support).
fn support_candidate(
    dim: usize,
    support: &[&Vec<f64>],
    rays: &[&Vec<f64>],
    lins: &[Vec<f64>],
) -> Option<f64> {
    let cols: Vec<&[f64]> = support
        .iter()
        .map(|v| v.as_slice())
        .chain(rays.iter().map(|v| v.as_slice()))
        .chain(lins.iter().map(|v| v.as_slice()))
        .collect();
    let m = cols.len();
    // KKT of min ‖A z‖² s.t. cᵀ z = 1:  [2AᵀA  c; cᵀ 0] [z; λ] = [0; 1].
    let mut kkt = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            kkt[i][j] = 2.0 * linalg::dot(cols[i], cols[j]);
        }
    }
    for i in 0..support.len() {
        kkt[i][m] = 1.0;
        kkt[m][i] = 1.0;
    }
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    let z = linalg::solve(&kkt, &rhs).or_else(|| {
        // Singular Gram (duplicate columns): a tiny ridge breaks the tie
        // without visibly moving the value.
        let mut ridged = kkt.clone();
        for (i, row) in ridged.iter_mut().enumerate().take(m) {
            row[i] += 1e-10;
        }
        linalg::solve(&ridged, &rhs)
    })?;

    // Clip to feasibility and renormalize the convex block.
    let mut w: Vec<f64> = z[..support.len()].iter().map(|v| v.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for v in &mut w {
        *v /= total;
    }
    let mut point = vec![0.0; dim];
    for (wi, s) in w.iter().zip(support) {
        linalg::axpy(&mut point, *wi, s);
    }
    for (j, r) in rays.iter().enumerate() {
        let beta = z[support.len() + j].max(0.0);
        linalg::axpy(&mut point, beta, r);
    }
    for (l, lin) in lins.iter().enumerate() {
        let gamma = z[support.len() + rays.len() + l];
        linalg::axpy(&mut point, gamma, lin);
    }
    Some(linalg::norm(&point))
}

/// Distance from the origin to `conv(gens) + cone` by dense sampling: a
/// simplex lattice over the convex weights crossed with grids over the
/// cone coefficients. Coarse but assumption-free; useful as a second
/// opinion on very small literal cases.
pub fn dense_min_norm(gens: &[Vec<f64>], cone: &ConeRep, divisions: usize, cap: f64) -> f64 {
    assert!(!gens.is_empty() && divisions >= 1);
    let dim = gens[0].len();
    let mut best = f64::INFINITY;
    let mut weights = vec![0usize; gens.len()];
    simplex_lattice(&mut weights, 0, divisions, &mut |w| {
        let mut hull_point = vec![0.0; dim];
        for (k, g) in w.iter().zip(gens) {
            linalg::axpy(&mut hull_point, *k as f64 / divisions as f64, g);
        }
        let mut coeffs = vec![0usize; cone.rays.len() + cone.lineality.len()];
        cone_grid(&mut coeffs, 0, divisions, &mut |c| {
            let mut p = hull_point.clone();
            for (j, r) in cone.rays.iter().enumerate() {
                linalg::axpy(&mut p, cap * c[j] as f64 / divisions as f64, r);
            }
            for (l, lin) in cone.lineality.iter().enumerate() {
                let t = c[cone.rays.len() + l] as f64 / divisions as f64;
                linalg::axpy(&mut p, cap * (2.0 * t - 1.0), lin);
            }
            let v = linalg::norm(&p);
            if v < best {
                best = v;
            }
        });
    });
    best
}

fn simplex_lattice(
    weights: &mut Vec<usize>,
    idx: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx + 1 == weights.len() {
        weights[idx] = remaining;
        visit(weights);
        return;
    }
    for k in 0..=remaining {
        weights[idx] = k;
        simplex_lattice(weights, idx + 1, remaining - k, visit);
    }
}

fn cone_grid(
    coeffs: &mut Vec<usize>,
    idx: usize,
    divisions: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == coeffs.len() {
        visit(coeffs);
        return;
    }
    for k in 0..=divisions {
        coeffs[idx] = k;
        cone_grid(coeffs, idx + 1, divisions, visit);
    }
}

/// Gradient by central differences with per-axis steps scaled to the
/// coordinate magnitude.
pub fn central_gradient(e: &Expression, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * (1.0 + x[i].abs());
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += h;
            lo[i] -= h;
            (e.eval(&hi) - e.eval(&lo)) / (2.0 * h)
        })
        .collect()
}

/// One-sided directional derivative `f'(x; d)` by Richardson-extrapolated
/// forward differences — valid at kinks, where central differences are
/// not.
pub fn directional_derivative(e: &Expression, x: &[f64], d: &[f64], t: f64) -> f64 {
    let fx = e.eval(x);
    let step = |s: f64| {
        let p: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + s * di).collect();
        (e.eval(&p) - fx) / s
    };
    2.0 * step(t / 2.0) - step(t)
}

/// The support function of a hull: `max_g ⟨g, d⟩`. For an exact
/// subdifferential hull this equals the one-sided directional derivative.
pub fn hull_support(generators: &[Vec<f64>], d: &[f64]) -> f64 {
    generators
        .iter()
        .map(|g| linalg::dot(g, d))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Weak and strong Pareto flags over a value list, by the definitions and
/// a plain double loop: weak means no other value is strictly smaller in
/// every component; strong means no other value is `≤` everywhere and `<`
/// somewhere.
pub fn oracle_front(values: &[Vec<f64>]) -> (Vec<bool>, Vec<bool>) {
    let n = values.len();
    let mut weak = vec![true; n];
    let mut strong = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let everywhere_strict = values[j]
                .iter()
                .zip(&values[i])
                .all(|(a, b)| a < b);
            if everywhere_strict {
                weak[i] = false;
            }
            let dominates = values[j].iter().zip(&values[i]).all(|(a, b)| a <= b)
                && values[j].iter().zip(&values[i]).any(|(a, b)| a < b);
            if dominates {
                strong[i] = false;
            }
        }
    }
    (weak, strong)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn oracle_agrees_with_closed_forms() {
        let zero = ConeRep::zero();
        // Single generator: the distance is its norm.
        assert!((oracle_min_norm(&[vec![3.0, 4.0]], &zero) - 5.0).abs() < 1e-10);
        // Opposing pair straddles the origin.
        assert!(oracle_min_norm(&[vec![1.0, 0.0], vec![-1.0, 0.0]], &zero) < 1e-10);
        // Segment offset from the origin: distance to the segment.
        let d = oracle_min_norm(&[vec![1.0, 1.0], vec![-1.0, 1.0]], &zero);
        assert!((d - 1.0).abs() < 1e-10);
        // A ray can absorb one coordinate.
        let cone = ConeRep {
            rays: vec![vec![0.0, -1.0]],
            lineality: vec![],
        };
        assert!((oracle_min_norm(&[vec![2.0, 5.0]], &cone) - 2.0).abs() < 1e-10);
        // Lineality projects out a direction entirely.
        let line = ConeRep {
            rays: vec![],
            lineality: vec![vec![1.0, 0.0]],
        };
        assert!((oracle_min_norm(&[vec![3.0, 4.0]], &line) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn duplicate_generators_survive_the_ridge() {
        let zero = ConeRep::zero();
        let d = oracle_min_norm(&[vec![2.0, 0.0], vec![2.0, 0.0]], &zero);
        assert!((d - 2.0).abs() < 1e-6);
    }

    #[test]
    fn dense_sampler_brackets_the_oracle() {
        let cone = ConeRep {
            rays: vec![vec![-1.0, 0.0]],
            lineality: vec![],
        };
        let gens = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
        let exact = oracle_min_norm(&gens, &cone);
        let dense = dense_min_norm(&gens, &cone, 40, 4.0);
        assert!(dense >= exact - 1e-12, "dense {dense} < exact {exact}");
        assert!(dense - exact < 0.05, "dense {dense} too far from {exact}");
    }

    #[test]
    fn central_differences_match_a_smooth_gradient() {
        let e = parse("sin(x1) * exp(x2) + x1^3").unwrap();
        let x = [0.7, -0.3];
        let g = central_gradient(&e, &x);
        let exact = [
            x[0].cos() * x[1].exp() + 3.0 * x[0] * x[0],
            x[0].sin() * x[1].exp(),
        ];
        for (a, b) in g.iter().zip(exact) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn directional_derivative_sees_the_kink() {
        let e = parse("abs(x1)").unwrap();
        // At the kink the derivative along +d is |d|, along -d also |d|.
        let fwd = directional_derivative(&e, &[0.0], &[1.0], 1e-5);
        let bwd = directional_derivative(&e, &[0.0], &[-1.0], 1e-5);
        assert!((fwd - 1.0).abs() < 1e-9);
        assert!((bwd - 1.0).abs() < 1e-9);
        // Support function of the exact hull {−1, +1} agrees.
        let hull = vec![vec![-1.0], vec![1.0]];
        assert!((hull_support(&hull, &[1.0]) - fwd).abs() < 1e-9);
        assert!((hull_support(&hull, &[-1.0]) - bwd).abs() < 1e-9);
    }

    #[test]
    fn front_oracle_flags_the_tradeoff_curve() {
        let values = vec![
            vec![0.0, 2.0],
            vec![1.0, 1.0],
            vec![2.0, 0.0],
            vec![2.0, 2.0], // dominated by (1,1)
            vec![0.0, 2.0], // exact duplicate of the first
        ];
        let (weak, strong) = oracle_front(&values);
        assert_eq!(weak, vec![true, true, true, false, true]);
        // The duplicate pair: neither strictly dominates the other, and
        // domination requires a strict component, so both stay strong.
        assert_eq!(strong, vec![true, true, true, false, true]);
    }
}
