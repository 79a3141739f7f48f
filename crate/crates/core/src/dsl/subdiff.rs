//! Convex generator hulls for generalized gradients at a point.
//!
//! [`Expression::subdiff`] walks the tree and returns a [`HullRep`]: a finite
//! generator set whose convex hull contains the generalized gradient of the
//! expression at the evaluation point. For expressions that are smooth at the
//! point the hull is the singleton gradient. At kinks of `abs`, `max`, and
//! `norm2` (over smooth arguments) the hull is the exact convex hull of the
//! generalized gradient; the `exact` flag records when this is guaranteed.
//!
//! Compositions that stack one nonsmooth node at the kink of another have no
//! exact finite description here; they are rejected with
//! [`DslError::InexactComposition`] unless the caller opts into the
//! over-approximating hull (`allow_inexact`), which is still a valid superset
//! and therefore yields a *lower bound* on distance-type residuals.

use super::{DslError, Expression};
use crate::KINK_TOL;

/// Hard ceiling on generator-set size, guarding against adversarial nesting
/// (e.g. long sums of `norm2` kinks whose Minkowski products explode).
const MAX_GENERATORS: usize = 4096;

/// A finite generator set for a convex set of (sub)gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct HullRep {
    /// Generator vectors; the represented set is their convex hull.
    pub generators: Vec<Vec<f64>>,
    /// True when the convex hull equals the generalized gradient exactly;
    /// false when it is only a superset.
    pub exact: bool,
}

impl HullRep {
    /// Build a hull, removing exact duplicate generators.
    pub fn new(mut generators: Vec<Vec<f64>>, exact: bool) -> Self {
        dedup_exact(&mut generators);
        HullRep { generators, exact }
    }

    fn singleton(g: Vec<f64>, exact: bool) -> Self {
        HullRep {
            generators: vec![g],
            exact,
        }
    }

    /// The single generator when the hull is a point (i.e. the expression is
    /// differentiable at the evaluation point).
    pub fn as_singleton(&self) -> Option<&[f64]> {
        if self.generators.len() == 1 {
            Some(&self.generators[0])
        } else {
            None
        }
    }

    /// Scale every generator by `c` in place.
    fn scaled(mut self, c: f64) -> Self {
        for g in &mut self.generators {
            for v in g.iter_mut() {
                *v *= c;
            }
        }
        dedup_exact(&mut self.generators);
        self
    }
}

fn dedup_exact(gens: &mut Vec<Vec<f64>>) {
    let mut i = 0;
    while i < gens.len() {
        let mut j = i + 1;
        while j < gens.len() {
            if gens[i] == gens[j] {
                gens.swap_remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }
}

/// Pairwise sums of two generator sets (Minkowski sum of the hulls).
fn minkowski(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DslError> {
    if a.len() * b.len() > MAX_GENERATORS {
        return Err(DslError::InexactComposition {
            detail: format!(
                "generator product {}x{} exceeds the hull size limit",
                a.len(),
                b.len()
            ),
        });
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for u in a {
        for v in b {
            out.push(u.iter().zip(v).map(|(x, y)| x + y).collect());
        }
    }
    Ok(out)
}

/// Generator directions of the Euclidean unit ball in dimension `m`.
///
/// For `m <= 4` the signed coordinate vectors plus the scaled sign vectors
/// (`2m + 2^m` points, all on the sphere) are returned and the inner
/// approximation is tight enough to be treated as exact downstream; for
/// larger `m` only the `2m` coordinate directions are kept and the hull is
/// flagged inexact.
fn ball_generators(m: usize) -> (Vec<Vec<f64>>, bool) {
    let mut gens = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; m];
            v[i] = s;
            gens.push(v);
        }
    }
    if m <= 4 && m >= 2 {
        let scale = 1.0 / (m as f64).sqrt();
        for mask in 0..(1u32 << m) {
            let v: Vec<f64> = (0..m)
                .map(|i| if mask >> i & 1 == 1 { scale } else { -scale })
                .collect();
            gens.push(v);
        }
    }
    (gens, m <= 4)
}

fn inexact_or(allow: bool, detail: String) -> Result<(), DslError> {
    if allow {
        Ok(())
    } else {
        Err(DslError::InexactComposition { detail })
    }
}

impl Expression {
    /// Generator hull of the generalized gradient of `self` at `x`.
    ///
    /// With `allow_inexact = false`, compositions whose hull would only be a
    /// superset of the generalized gradient (a nonsmooth argument sitting at
    /// the kink of `abs`/`max`/`min`/`norm2`) are errors; with `true` they
    /// produce the superset hull with `exact = false`.
    pub fn subdiff(&self, x: &[f64], allow_inexact: bool) -> Result<HullRep, DslError> {
        if let Some(i) = self.max_var() {
            if i >= x.len() {
                return Err(DslError::DimensionMismatch {
                    expected: i + 1,
                    got: x.len(),
                });
            }
        }
        self.subdiff_inner(x, allow_inexact)
    }

    fn subdiff_inner(&self, x: &[f64], allow: bool) -> Result<HullRep, DslError> {
        let n = x.len();
        use Expression as E;
        match self {
            E::Const(_) => Ok(HullRep::singleton(vec![0.0; n], true)),
            E::Var(i) => {
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                Ok(HullRep::singleton(g, true))
            }
            E::Add(a, b) | E::Sub(a, b) => {
                let ha = a.subdiff_inner(x, allow)?;
                let mut hb = b.subdiff_inner(x, allow)?;
                if matches!(self, E::Sub(..)) {
                    hb = hb.scaled(-1.0);
                    // Negating a genuinely nonsmooth hull keeps only a
                    // superset of the generalized gradient.
                    hb.exact = hb.exact && hb.generators.len() == 1;
                }
                let sum = minkowski(&ha.generators, &hb.generators)?;
                // A sum of two genuinely nonsmooth hulls over-approximates.
                let one_point = ha.generators.len() == 1 || hb.generators.len() == 1;
                Ok(HullRep::new(sum, ha.exact && hb.exact && one_point))
            }
            E::Mul(a, b) => {
                let va = a.eval(x);
                let vb = b.eval(x);
                let ha = a.subdiff_inner(x, allow)?;
                let hb = b.subdiff_inner(x, allow)?;
                // Judged before scaling: multiplying a kinked hull by a zero
                // value collapses it to {0}, which must not read as smooth.
                let smooth = ha.generators.len() == 1 && hb.generators.len() == 1;
                let ha = ha.scaled(vb);
                let hb = hb.scaled(va);
                let sum = minkowski(&ha.generators, &hb.generators)?;
                Ok(HullRep::new(sum, ha.exact && hb.exact && smooth))
            }
            E::Neg(a) => {
                let h = a.subdiff_inner(x, allow)?;
                let exact = h.exact && h.generators.len() == 1;
                let mut out = h.scaled(-1.0);
                out.exact = exact;
                Ok(out)
            }
            E::Pow(a, k) => {
                if *k == 1 {
                    return a.subdiff_inner(x, allow);
                }
                let v = a.eval(x);
                let factor = *k as f64 * v.powi(*k as i32 - 1);
                let h = a.subdiff_inner(x, allow)?;
                let exact = h.exact && h.generators.len() == 1;
                let mut out = h.scaled(factor);
                out.exact = exact;
                Ok(out)
            }
            E::Sin(a) | E::Cos(a) | E::Exp(a) => {
                let v = a.eval(x);
                let factor = match self {
                    E::Sin(_) => v.cos(),
                    E::Cos(_) => -v.sin(),
                    _ => v.exp(),
                };
                let h = a.subdiff_inner(x, allow)?;
                let exact = h.exact && h.generators.len() == 1;
                let mut out = h.scaled(factor);
                out.exact = exact;
                Ok(out)
            }
            E::Abs(a) => {
                let v = a.eval(x);
                let h = a.subdiff_inner(x, allow)?;
                if v.abs() > KINK_TOL {
                    let exact = h.exact && h.generators.len() == 1;
                    let mut out = h.scaled(v.signum());
                    out.exact = exact;
                    return Ok(out);
                }
                // At the kink: hull of {±g}.
                if h.generators.len() > 1 {
                    inexact_or(
                        allow,
                        "abs at its kink over a nonsmooth argument".into(),
                    )?;
                }
                let mut gens = h.generators.clone();
                for g in &h.generators {
                    gens.push(g.iter().map(|v| -v).collect());
                }
                let exact = h.exact && h.generators.len() == 1;
                Ok(HullRep::new(gens, exact))
            }
            E::Max(args) | E::Min(args) => {
                let is_max = matches!(self, E::Max(..));
                let vals: Vec<f64> = args.iter().map(|e| e.eval(x)).collect();
                let best = if is_max {
                    vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    vals.iter().cloned().fold(f64::INFINITY, f64::min)
                };
                let active: Vec<usize> = (0..args.len())
                    .filter(|&i| (vals[i] - best).abs() <= KINK_TOL)
                    .collect();
                if active.len() == 1 {
                    return args[active[0]].subdiff_inner(x, allow);
                }
                let hulls: Vec<HullRep> = active
                    .iter()
                    .map(|&i| args[i].subdiff_inner(x, allow))
                    .collect::<Result<_, _>>()?;
                let all_points = hulls.iter().all(|h| h.generators.len() == 1);
                if !all_points {
                    inexact_or(
                        allow,
                        format!(
                            "{} with several active nonsmooth branches",
                            if is_max { "max" } else { "min" }
                        ),
                    )?;
                }
                let mut gens = Vec::new();
                for h in &hulls {
                    gens.extend(h.generators.iter().cloned());
                }
                if gens.len() > MAX_GENERATORS {
                    return Err(DslError::InexactComposition {
                        detail: "active branch union exceeds the hull size limit".into(),
                    });
                }
                // The hull of active gradients is the generalized gradient of
                // a max; for a min it is only a superset (the generalized
                // gradient of a min of smooth functions is the *union*, whose
                // hull may be strictly larger).
                let exact = is_max && all_points && hulls.iter().all(|h| h.exact);
                Ok(HullRep::new(gens, exact))
            }
            E::Norm2(args) => {
                let m = args.len();
                let vals: Vec<f64> = args.iter().map(|e| e.eval(x)).collect();
                let r = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
                let hulls: Vec<HullRep> = args
                    .iter()
                    .map(|e| e.subdiff_inner(x, allow))
                    .collect::<Result<_, _>>()?;
                let all_points = hulls.iter().all(|h| h.generators.len() == 1);
                if r > KINK_TOL {
                    // Smooth regime: gradient is sum of (g_i / r) * grad g_i.
                    let mut acc = HullRep::singleton(vec![0.0; n], true);
                    for (i, h) in hulls.iter().enumerate() {
                        let scaled = h.clone().scaled(vals[i] / r);
                        let sum = minkowski(&acc.generators, &scaled.generators)?;
                        acc = HullRep::new(sum, acc.exact && scaled.exact);
                    }
                    acc.exact = acc.exact && all_points;
                    return Ok(acc);
                }
                // At the center: the generalized gradient is J^T applied to
                // the unit ball; approximate the ball by generator directions.
                if !all_points {
                    inexact_or(allow, "norm2 at its center over a nonsmooth argument".into())?;
                }
                let (ball, tight) = ball_generators(m);
                let mut gens: Vec<Vec<f64>> = Vec::new();
                let mut combos: Vec<Vec<&[f64]>> = vec![Vec::new()];
                for h in &hulls {
                    let mut next = Vec::new();
                    for partial in &combos {
                        for g in &h.generators {
                            let mut row = partial.clone();
                            row.push(g.as_slice());
                            next.push(row);
                        }
                    }
                    combos = next;
                    if combos.len() * ball.len() > MAX_GENERATORS {
                        return Err(DslError::InexactComposition {
                            detail: "norm2 center hull exceeds the size limit".into(),
                        });
                    }
                }
                for w in &ball {
                    for choice in &combos {
                        let mut g = vec![0.0; n];
                        for (wi, ji) in w.iter().zip(choice) {
                            for (gk, jk) in g.iter_mut().zip(ji.iter()) {
                                *gk += wi * jk;
                            }
                        }
                        gens.push(g);
                    }
                }
                let exact = tight && all_points && hulls.iter().all(|h| h.exact);
                Ok(HullRep::new(gens, exact))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn has_gen(h: &HullRep, g: &[f64]) -> bool {
        h.generators
            .iter()
            .any(|v| v.iter().zip(g).all(|(a, b)| (a - b).abs() < 1e-12))
    }

    #[test]
    fn smooth_gradients_are_singletons() {
        // ½x₁²x₂ + x₁ has gradient (x₁x₂ + 1, ½x₁²); at (-1/n, n) the first
        // entry vanishes and the second is 1/(2n²).
        let e = parse("0.5*x1^2*x2 + x1").unwrap();
        for n in [1.0f64, 2.0, 5.0] {
            let h = e.subdiff(&[-1.0 / n, n], false).unwrap();
            assert!(h.exact);
            let g = h.as_singleton().expect("smooth point");
            assert!(g[0].abs() < 1e-12);
            assert!((g[1] - 1.0 / (2.0 * n * n)).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_kink_is_exact_sign_pair() {
        let e = parse("abs(x1)").unwrap();
        let h = e.subdiff(&[0.0, 0.0], false).unwrap();
        assert!(h.exact);
        assert_eq!(h.generators.len(), 2);
        assert!(has_gen(&h, &[1.0, 0.0]));
        assert!(has_gen(&h, &[-1.0, 0.0]));
        // Away from the kink the hull collapses to the smooth gradient.
        let h = e.subdiff(&[-2.0, 0.0], false).unwrap();
        assert_eq!(h.as_singleton().unwrap(), &[-1.0, 0.0]);
        assert!(h.exact);
    }

    #[test]
    fn max_of_smooth_collects_active_gradients() {
        // max(x₁² + x₂, x₁ - 1) at (1, -1): both branches equal 0.
        let e = parse("max(x1^2 + x2, x1 - 1)").unwrap();
        let h = e.subdiff(&[1.0, -1.0], false).unwrap();
        assert!(h.exact);
        assert_eq!(h.generators.len(), 2);
        assert!(has_gen(&h, &[2.0, 1.0]));
        assert!(has_gen(&h, &[1.0, 0.0]));
        // Single active branch: smooth.
        let h = e.subdiff(&[0.0, 5.0], false).unwrap();
        assert_eq!(h.as_singleton().unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn min_kink_is_flagged_inexact() {
        let e = parse("min(x1, -x1)").unwrap();
        let h = e.subdiff(&[0.0], false).unwrap();
        assert!(!h.exact);
        assert_eq!(h.generators.len(), 2);
    }

    #[test]
    fn negation_of_kink_is_flagged_inexact() {
        let e = parse("-abs(x1)").unwrap();
        let h = e.subdiff(&[0.0], false).unwrap();
        assert!(!h.exact);
        assert!(has_gen(&h, &[1.0]));
        assert!(has_gen(&h, &[-1.0]));
    }

    #[test]
    fn norm2_center_ball_generators() {
        let e = parse("norm2(x1, x2)").unwrap();
        let h = e.subdiff(&[0.0, 0.0], false).unwrap();
        assert!(h.exact);
        // 2m coordinate directions + 2^m scaled sign vectors, m = 2.
        assert_eq!(h.generators.len(), 8);
        for g in &h.generators {
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "ball generator off the sphere");
        }
        // Away from the center: unit gradient.
        let h = e.subdiff(&[3.0, 4.0], false).unwrap();
        let g = h.as_singleton().unwrap();
        assert!((g[0] - 0.6).abs() < 1e-12 && (g[1] - 0.8).abs() < 1e-12);
        assert!(h.exact);
    }

    #[test]
    fn norm2_high_dimension_center_is_inexact() {
        let e = parse("norm2(x1, x2, x3, x4, x5)").unwrap();
        let h = e.subdiff(&[0.0; 5], false).unwrap();
        assert!(!h.exact);
        assert_eq!(h.generators.len(), 10);
    }

    #[test]
    fn stacked_kinks_require_opt_in() {
        let e = parse("abs(abs(x1) - 1) + abs(x1)").unwrap();
        // At x1 = 0 the outer abs sits at |0| - 1 = -1 (no kink), fine:
        assert!(e.subdiff(&[0.0], false).is_ok());
        // At x1 = 1 the outer abs kinks over a smooth inner (|x| smooth at 1):
        assert!(e.subdiff(&[1.0], false).is_ok());
        // abs(abs(x1)) at 0: kink over a kink.
        let nested = parse("abs(abs(x1))").unwrap();
        assert!(matches!(
            nested.subdiff(&[0.0], false),
            Err(DslError::InexactComposition { .. })
        ));
        let h = nested.subdiff(&[0.0], true).unwrap();
        assert!(!h.exact);
        assert!(has_gen(&h, &[1.0]));
        assert!(has_gen(&h, &[-1.0]));
    }

    #[test]
    fn smooth_outer_over_kink_is_allowed_but_inexact() {
        // sin(abs(x1)) at 0: the outer factor cos(0) = 1 scales the kink hull.
        let e = parse("sin(abs(x1))").unwrap();
        let h = e.subdiff(&[0.0], false).unwrap();
        assert!(!h.exact);
        assert!(has_gen(&h, &[1.0]));
        assert!(has_gen(&h, &[-1.0]));
    }

    #[test]
    fn product_with_kink_is_superset() {
        // x₁·|x₁| is differentiable at 0 with derivative 0; the hull rule
        // gives 0·{±1} + 0·{1} = {0}, correct but flagged inexact.
        let e = parse("x1*abs(x1)").unwrap();
        let h = e.subdiff(&[0.0], false).unwrap();
        assert_eq!(h.generators, vec![vec![0.0]]);
        assert!(!h.exact);
    }

    #[test]
    fn gradients_match_central_differences() {
        let exprs = [
            "sin(x1)*cos(x2) + exp(x1 - x2)",
            "x1^3 - 2*x1*x2 + x2^2",
            "norm2(x1 - 1, x2 + 2)",
            "exp(-(x1^2) - x2^2)",
        ];
        let pts = [[0.3, -0.4], [1.1, 0.9], [-0.7, 0.2]];
        for src in exprs {
            let e = parse(src).unwrap();
            for p in pts {
                let h = e.subdiff(&p, false).unwrap();
                let g = h.as_singleton().expect("smooth point");
                let eps = 1e-6;
                for i in 0..2 {
                    let mut hi = p;
                    let mut lo = p;
                    hi[i] += eps;
                    lo[i] -= eps;
                    let fd = (e.eval(&hi) - e.eval(&lo)) / (2.0 * eps);
                    assert!(
                        (g[i] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                        "`{src}` at {p:?}: analytic {} vs fd {fd}",
                        g[i]
                    );
                }
            }
        }
    }
}
