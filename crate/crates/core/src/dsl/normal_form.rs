//! Rewriting nonsmooth constraints into unions of smooth systems.
//!
//! A constraint `e <= 0` whose expression contains `abs`/`max`/`min` can
//! usually be rewritten as a disjunction of conjunctions of constraints that
//! are smooth wherever they are active, by distributing arithmetic over the
//! max/min lattice: `|u| <= c` becomes the *conjunction* `u - c <= 0 and
//! -u - c <= 0`, while `min(a, b) <= 0` becomes the genuine union
//! `a <= 0 or b <= 0`.
//!
//! Getting this right matters for normal cones: the naive alternative of
//! splitting `|x1| <= 1` into the two half-regions `0 <= x1 <= 1` and
//! `-1 <= x1 <= 0` manufactures an interior wall at `x1 = 0` whose bogus
//! normal rays would contaminate every cone-based residual computed on the
//! region. The distribution here introduces no such walls; the seam-creating
//! branch split ([`sign_branches`]) is kept only as a fallback for
//! expressions the distribution cannot reach (e.g. a product of two
//! nonsmooth factors).
//!
//! `norm2` terms are left in place as leaves: a constraint like
//! `norm2(x1, x2) - 1 <= 0` is differentiable everywhere on its active
//! boundary, which is all that cone extraction needs.

use super::Expression;

/// Caps keeping pathological nestings from exploding the rewrite.
const MAX_CONJUNCTIONS: usize = 64;
const MAX_CONJUNCT_LEN: usize = 32;
const MAX_LEAVES: usize = 128;

/// Max/min lattice over expressions that contain no `abs`/`max`/`min` node.
enum Tree {
    Leaf(Expression),
    Max(Vec<Tree>),
    Min(Vec<Tree>),
}

impl Tree {
    fn leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Max(ts) | Tree::Min(ts) => ts.iter().map(Tree::leaves).sum(),
        }
    }
}

/// True when every node is differentiable wherever a constraint built from
/// the expression can be active (`norm2` counts: its only kink is at value 0,
/// while its constraints activate on positive level sets).
fn is_lattice_leaf(e: &Expression) -> bool {
    match e {
        Expression::Const(_) | Expression::Var(_) => true,
        Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
            is_lattice_leaf(a) && is_lattice_leaf(b)
        }
        Expression::Neg(a)
        | Expression::Pow(a, _)
        | Expression::Sin(a)
        | Expression::Cos(a)
        | Expression::Exp(a) => is_lattice_leaf(a),
        Expression::Abs(_) | Expression::Max(_) | Expression::Min(_) => false,
        Expression::Norm2(args) => args.iter().all(is_lattice_leaf),
    }
}

/// Remove removable kinks before distribution: `abs(u)^even = u^even` and
/// `norm2(args)^2 = sum of squares`.
fn desugar(e: &Expression) -> Expression {
    use Expression as E;
    match e {
        E::Pow(inner, k) => match (&**inner, *k % 2 == 0) {
            (E::Abs(u), true) => E::Pow(Box::new(desugar(u)), *k),
            (E::Norm2(args), _) if *k == 2 => {
                let mut acc: Option<Expression> = None;
                for a in args {
                    let sq = E::Pow(Box::new(desugar(a)), 2);
                    acc = Some(match acc {
                        None => sq,
                        Some(prev) => E::Add(Box::new(prev), Box::new(sq)),
                    });
                }
                acc.unwrap_or(E::Const(0.0))
            }
            _ => E::Pow(Box::new(desugar(inner)), *k),
        },
        E::Const(c) => E::Const(*c),
        E::Var(i) => E::Var(*i),
        E::Add(a, b) => E::Add(Box::new(desugar(a)), Box::new(desugar(b))),
        E::Sub(a, b) => E::Sub(Box::new(desugar(a)), Box::new(desugar(b))),
        E::Mul(a, b) => E::Mul(Box::new(desugar(a)), Box::new(desugar(b))),
        E::Neg(a) => E::Neg(Box::new(desugar(a))),
        E::Sin(a) => E::Sin(Box::new(desugar(a))),
        E::Cos(a) => E::Cos(Box::new(desugar(a))),
        E::Exp(a) => E::Exp(Box::new(desugar(a))),
        E::Abs(a) => E::Abs(Box::new(desugar(a))),
        E::Max(args) => E::Max(args.iter().map(desugar).collect()),
        E::Min(args) => E::Min(args.iter().map(desugar).collect()),
        E::Norm2(args) => E::Norm2(args.iter().map(desugar).collect()),
    }
}

fn neg_tree(t: Tree) -> Tree {
    match t {
        Tree::Leaf(e) => Tree::Leaf(Expression::Neg(Box::new(e))),
        Tree::Max(ts) => Tree::Min(ts.into_iter().map(neg_tree).collect()),
        Tree::Min(ts) => Tree::Max(ts.into_iter().map(neg_tree).collect()),
    }
}

/// `max_i a_i + max_j b_j = max_{i,j} (a_i + b_j)` and its min analogue:
/// addition distributes into the lattice branch by branch.
fn add_trees(a: Tree, b: Tree) -> Option<Tree> {
    let out = match (a, b) {
        (Tree::Leaf(x), Tree::Leaf(y)) => {
            Tree::Leaf(Expression::Add(Box::new(x), Box::new(y)))
        }
        (Tree::Max(ts), other) | (other, Tree::Max(ts)) => {
            let mut branches = Vec::with_capacity(ts.len());
            for t in ts {
                branches.push(add_trees(t, clone_tree(&other))?);
            }
            Tree::Max(branches)
        }
        (Tree::Min(ts), other) | (other, Tree::Min(ts)) => {
            let mut branches = Vec::with_capacity(ts.len());
            for t in ts {
                branches.push(add_trees(t, clone_tree(&other))?);
            }
            Tree::Min(branches)
        }
    };
    if out.leaves() > MAX_LEAVES {
        None
    } else {
        Some(out)
    }
}

fn clone_tree(t: &Tree) -> Tree {
    match t {
        Tree::Leaf(e) => Tree::Leaf(e.clone()),
        Tree::Max(ts) => Tree::Max(ts.iter().map(clone_tree).collect()),
        Tree::Min(ts) => Tree::Min(ts.iter().map(clone_tree).collect()),
    }
}

/// Multiply every leaf by a nonnegative constant expression.
fn scale_tree(t: Tree, factor: &Expression) -> Tree {
    match t {
        Tree::Leaf(e) => Tree::Leaf(Expression::Mul(Box::new(factor.clone()), Box::new(e))),
        Tree::Max(ts) => Tree::Max(
            ts.into_iter().map(|t| scale_tree(t, factor)).collect(),
        ),
        Tree::Min(ts) => Tree::Min(
            ts.into_iter().map(|t| scale_tree(t, factor)).collect(),
        ),
    }
}

fn to_tree(e: &Expression) -> Option<Tree> {
    use Expression as E;
    if is_lattice_leaf(e) {
        return Some(Tree::Leaf(e.clone()));
    }
    match e {
        E::Abs(u) => {
            let t = to_tree(u)?;
            let neg = neg_tree(clone_tree(&t));
            Some(Tree::Max(vec![t, neg]))
        }
        E::Max(args) => Some(Tree::Max(
            args.iter().map(to_tree).collect::<Option<Vec<_>>>()?,
        )),
        E::Min(args) => Some(Tree::Min(
            args.iter().map(to_tree).collect::<Option<Vec<_>>>()?,
        )),
        E::Add(a, b) => add_trees(to_tree(a)?, to_tree(b)?),
        E::Sub(a, b) => add_trees(to_tree(a)?, neg_tree(to_tree(b)?)),
        E::Neg(a) => Some(neg_tree(to_tree(a)?)),
        E::Mul(a, b) => {
            // Only a constant factor distributes over max/min (with a lattice
            // flip when negative).
            let (c, other) = if a.max_var().is_none() {
                (a, b)
            } else if b.max_var().is_none() {
                (b, a)
            } else {
                return None;
            };
            let value = c.eval(&[]);
            let t = to_tree(other)?;
            if value >= 0.0 {
                Some(scale_tree(t, c))
            } else {
                let positive = E::Const(-value);
                Some(neg_tree(scale_tree(t, &positive)))
            }
        }
        // Powers and transcendental wrappers of nonsmooth arguments do not
        // distribute (the even-power cases were removed by `desugar`).
        _ => None,
    }
}

/// Cartesian combination of per-branch disjunctions: the conjunction of the
/// branch conditions, in all combinations.
fn conjoin(
    acc: Vec<Vec<Expression>>,
    next: Vec<Vec<Expression>>,
) -> Option<Vec<Vec<Expression>>> {
    let mut out = Vec::new();
    for a in &acc {
        for b in &next {
            if a.len() + b.len() > MAX_CONJUNCT_LEN {
                return None;
            }
            let mut row = a.clone();
            row.extend(b.iter().cloned());
            out.push(row);
            if out.len() > MAX_CONJUNCTIONS {
                return None;
            }
        }
    }
    Some(out)
}

/// `tree <= 0` as a disjunction of smooth conjunctions.
fn tree_dnf(t: &Tree) -> Option<Vec<Vec<Expression>>> {
    match t {
        Tree::Leaf(e) => Some(vec![vec![e.clone()]]),
        // max <= 0 iff every branch <= 0: conjunction across branches.
        Tree::Max(ts) => {
            let mut acc = vec![Vec::new()];
            for t in ts {
                acc = conjoin(acc, tree_dnf(t)?)?;
            }
            Some(acc)
        }
        // min <= 0 iff some branch <= 0: union across branches.
        Tree::Min(ts) => {
            let mut acc = Vec::new();
            for t in ts {
                acc.extend(tree_dnf(t)?);
                if acc.len() > MAX_CONJUNCTIONS {
                    return None;
                }
            }
            Some(acc)
        }
    }
}

/// Rewrite the constraint `e <= 0` as a union of smooth constraint systems.
///
/// Returns `Some(dnf)` where the constraint holds iff for some `i` every
/// expression in `dnf[i]` is `<= 0`, and every expression is smooth wherever
/// it can be active. Returns `None` when the expression does not distribute
/// (callers then fall back to [`sign_branches`] and accept its seams).
pub fn constraint_to_smooth_dnf(e: &Expression) -> Option<Vec<Vec<Expression>>> {
    let tree = to_tree(&desugar(e))?;
    tree_dnf(&tree)
}

/// Fallback branch split for constraints that do not distribute: enumerate
/// the sign regimes of every `abs`/`max`/`min` node.
///
/// Each result is `(conditions, smooth)`: on the region where every condition
/// expression is `<= 0`, the original expression equals `smooth`. Unlike
/// [`constraint_to_smooth_dnf`], the conditions cut the feasible region along
/// kink loci, so downstream cone extraction will see the (harmless for
/// containment, but spurious) walls between branches.
pub fn sign_branches(e: &Expression) -> Option<Vec<(Vec<Expression>, Expression)>> {
    use Expression as E;
    fn product(
        parts: &[Expression],
    ) -> Option<Vec<(Vec<Expression>, Vec<Expression>)>> {
        let mut acc: Vec<(Vec<Expression>, Vec<Expression>)> = vec![(vec![], vec![])];
        for p in parts {
            let branches = sign_branches(p)?;
            let mut next = Vec::new();
            for (conds, reps) in &acc {
                for (bc, bs) in &branches {
                    let mut conds = conds.clone();
                    conds.extend(bc.iter().cloned());
                    let mut reps = reps.clone();
                    reps.push(bs.clone());
                    next.push((conds, reps));
                    if next.len() > MAX_CONJUNCTIONS {
                        return None;
                    }
                }
            }
            acc = next;
        }
        Some(acc)
    }

    if is_lattice_leaf(e) {
        return Some(vec![(vec![], e.clone())]);
    }
    let out = match e {
        E::Abs(u) => {
            let mut out = Vec::new();
            for (conds, s) in sign_branches(u)? {
                // s >= 0 regime: |u| = s.
                let mut c_pos = conds.clone();
                c_pos.push(E::Neg(Box::new(s.clone())));
                out.push((c_pos, s.clone()));
                // s <= 0 regime: |u| = -s.
                let mut c_neg = conds;
                c_neg.push(s.clone());
                out.push((c_neg, E::Neg(Box::new(s))));
            }
            out
        }
        E::Max(args) | E::Min(args) => {
            let is_max = matches!(e, E::Max(..));
            let mut out = Vec::new();
            for (conds, reps) in product(args)? {
                for i in 0..reps.len() {
                    let mut c = conds.clone();
                    for (j, rj) in reps.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        // Branch i active: r_j <= r_i (max) or r_i <= r_j (min).
                        let (lo, hi) = if is_max { (rj, &reps[i]) } else { (&reps[i], rj) };
                        c.push(E::Sub(Box::new(lo.clone()), Box::new(hi.clone())));
                    }
                    out.push((c, reps[i].clone()));
                    if out.len() > MAX_CONJUNCTIONS {
                        return None;
                    }
                }
            }
            out
        }
        E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) => {
            let rebuild = |x: Expression, y: Expression| match e {
                E::Add(..) => E::Add(Box::new(x), Box::new(y)),
                E::Sub(..) => E::Sub(Box::new(x), Box::new(y)),
                _ => E::Mul(Box::new(x), Box::new(y)),
            };
            let mut out = Vec::new();
            for (conds, reps) in product(&[(**a).clone(), (**b).clone()])? {
                out.push((conds, rebuild(reps[0].clone(), reps[1].clone())));
            }
            out
        }
        E::Neg(a) | E::Pow(a, _) | E::Sin(a) | E::Cos(a) | E::Exp(a) => {
            let rebuild = |x: Expression| match e {
                E::Neg(..) => E::Neg(Box::new(x)),
                E::Pow(_, k) => E::Pow(Box::new(x), *k),
                E::Sin(..) => E::Sin(Box::new(x)),
                E::Cos(..) => E::Cos(Box::new(x)),
                _ => E::Exp(Box::new(x)),
            };
            sign_branches(a)?
                .into_iter()
                .map(|(c, s)| (c, rebuild(s)))
                .collect()
        }
        E::Norm2(args) => {
            let mut out = Vec::new();
            for (conds, reps) in product(args)? {
                out.push((conds, E::Norm2(reps)));
            }
            out
        }
        E::Const(_) | E::Var(_) => unreachable!("handled as lattice leaf"),
    };
    if out.len() > MAX_CONJUNCTIONS {
        None
    } else {
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    /// Check `e <= 0 iff some conjunction fully <= 0` on a sample grid.
    fn assert_dnf_equivalent(src: &str, dim: usize) {
        let e = parse(src).unwrap();
        let dnf = constraint_to_smooth_dnf(&e)
            .unwrap_or_else(|| panic!("`{src}` should distribute"));
        for row in &dnf {
            for c in row {
                assert!(
                    is_lattice_leaf(c),
                    "conjunct `{c}` of `{src}` still nonsmooth"
                );
            }
        }
        let vals = [-1.3, -1.0, -0.5, 0.0, 0.4, 1.0, 1.7];
        let mut point = vec![0.0; dim];
        let mut idx = vec![0usize; dim];
        loop {
            for (d, &i) in idx.iter().enumerate() {
                point[d] = vals[i];
            }
            let direct = e.eval(&point) <= 0.0;
            let split = dnf
                .iter()
                .any(|row| row.iter().all(|c| c.eval(&point) <= 1e-12));
            assert_eq!(
                direct, split,
                "`{src}` disagrees with its DNF at {point:?}"
            );
            // Odometer increment over the sample grid.
            let mut d = 0;
            loop {
                if d == dim {
                    return;
                }
                idx[d] += 1;
                if idx[d] < vals.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn abs_bound_is_a_conjunction_without_seams() {
        let e = parse("abs(x1) - 1").unwrap();
        let dnf = constraint_to_smooth_dnf(&e).unwrap();
        // One region, two smooth walls: x1 - 1 <= 0 and -x1 - 1 <= 0.
        assert_eq!(dnf.len(), 1);
        assert_eq!(dnf[0].len(), 2);
        assert_dnf_equivalent("abs(x1) - 1", 1);
    }

    #[test]
    fn min_bound_is_a_genuine_union() {
        let e = parse("min(x1, x2)").unwrap();
        let dnf = constraint_to_smooth_dnf(&e).unwrap();
        assert_eq!(dnf.len(), 2);
        assert_dnf_equivalent("min(x1, x2)", 2);
    }

    #[test]
    fn sums_of_kinks_distribute() {
        // |x1| + |x2| <= 1 is the diamond: one region, four walls.
        let e = parse("abs(x1) + abs(x2) - 1").unwrap();
        let dnf = constraint_to_smooth_dnf(&e).unwrap();
        assert_eq!(dnf.len(), 1);
        assert_eq!(dnf[0].len(), 4);
        assert_dnf_equivalent("abs(x1) + abs(x2) - 1", 2);
    }

    #[test]
    fn negative_scale_flips_the_lattice() {
        assert_dnf_equivalent("-2*max(x1, x2) + 1", 2);
        assert_dnf_equivalent("1 - abs(x1)", 1);
    }

    #[test]
    fn even_powers_of_abs_desugar_to_smooth() {
        let e = parse("abs(x1)^2 - x2").unwrap();
        let dnf = constraint_to_smooth_dnf(&e).unwrap();
        assert_eq!(dnf.len(), 1);
        assert_eq!(dnf[0].len(), 1);
        assert_dnf_equivalent("abs(x1)^2 - x2", 2);
        let n = parse("norm2(x1, x2)^2 - 1").unwrap();
        let dnf = constraint_to_smooth_dnf(&n).unwrap();
        assert_eq!(dnf[0].len(), 1);
    }

    #[test]
    fn norm2_stays_as_a_leaf() {
        let e = parse("norm2(x1, x2) - 1").unwrap();
        let dnf = constraint_to_smooth_dnf(&e).unwrap();
        assert_eq!(dnf, vec![vec![e]]);
    }

    #[test]
    fn products_of_kinks_fall_back_to_sign_branches() {
        let e = parse("x1*abs(x1) - 1").unwrap();
        assert!(constraint_to_smooth_dnf(&e).is_none());
        let branches = sign_branches(&e).unwrap();
        assert_eq!(branches.len(), 2);
        for (conds, smooth) in &branches {
            assert!(is_lattice_leaf(smooth));
            // Sample a point satisfying the conditions and compare values.
            for t in [-1.5, -0.2, 0.0, 0.3, 2.0] {
                if conds.iter().all(|c| c.eval(&[t]) <= 1e-12) {
                    assert!((smooth.eval(&[t]) - e.eval(&[t])).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn max_branches_carry_dominance_conditions() {
        let e = parse("exp(max(x1, x2))").unwrap();
        let branches = sign_branches(&e).unwrap();
        assert_eq!(branches.len(), 2);
        let p = [2.0, -1.0];
        let mut matched = 0;
        for (conds, smooth) in &branches {
            if conds.iter().all(|c| c.eval(&p) <= 1e-12) {
                assert!((smooth.eval(&p) - e.eval(&p)).abs() < 1e-12);
                matched += 1;
            }
        }
        assert_eq!(matched, 1, "exactly one branch active away from ties");
    }
}
