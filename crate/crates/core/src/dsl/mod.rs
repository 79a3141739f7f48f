//! Expression language for objective components and constraints.
//!
//! The grammar is deliberately small: infix `+ - *`, integer powers `^`,
//! unary minus, parentheses, the functions `sin`, `cos`, `exp`, `abs`,
//! `max`, `min`, `norm2`, variables `x1..xn` (1-based in source, 0-based in
//! the tree), and decimal or fraction literals (`1/2` is the literal 0.5 —
//! there is no division operator). Every expression therefore evaluates to a
//! finite value at every finite point.
//!
//! Beyond evaluation the module provides symbolic partial derivatives for
//! smooth trees ([`Expression::partial`]) and convex subdifferential hulls at
//! a point ([`Expression::subdiff`]), the building block of the stationarity
//! residuals.

mod normal_form;
mod parse;
mod subdiff;

pub use normal_form::{constraint_to_smooth_dnf, sign_branches};
pub use parse::{parse, parse_param};
pub use subdiff::HullRep;

use std::fmt;

/// A scalar expression tree over variables `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    /// Literal constant.
    Const(f64),
    /// Variable by 0-based index (`x1` parses to `Var(0)`).
    Var(usize),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Neg(Box<Expression>),
    /// Integer power with positive exponent.
    Pow(Box<Expression>, u32),
    Sin(Box<Expression>),
    Cos(Box<Expression>),
    Exp(Box<Expression>),
    Abs(Box<Expression>),
    /// Pointwise maximum of one or more arguments.
    Max(Vec<Expression>),
    /// Pointwise minimum of one or more arguments.
    Min(Vec<Expression>),
    /// Euclidean norm of the argument vector.
    Norm2(Vec<Expression>),
}

/// Errors raised by parsing, differentiation, and hull construction.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DslError {
    /// Source text does not conform to the grammar.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    /// Identifier is not a function name or a variable.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    /// Variable index exceeds the declared dimension.
    #[error("variable x{} exceeds the problem dimension {dim}", index + 1)]
    VarOutOfRange { index: usize, dim: usize },
    /// Point has the wrong number of coordinates.
    #[error("dimension mismatch: expression over {expected} variables evaluated at a point of dimension {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Symbolic differentiation hit an `abs`/`max`/`min`/`norm2` node.
    #[error("expression is not smooth: cannot differentiate through `{node}`")]
    NotSmooth { node: &'static str },
    /// A nonsmooth subexpression sits at the kink of another nonsmooth node;
    /// only an over-approximating hull is available.
    #[error("inexact composition: {detail} (pass allow_inexact to accept an over-approximating hull)")]
    InexactComposition { detail: String },
}

impl Expression {
    /// Largest variable index used, or `None` for a constant expression.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expression::Const(_) => None,
            Expression::Var(i) => Some(*i),
            Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(i), Some(j)) => Some(i.max(j)),
                    (v, None) | (None, v) => v,
                }
            }
            Expression::Neg(a)
            | Expression::Pow(a, _)
            | Expression::Sin(a)
            | Expression::Cos(a)
            | Expression::Exp(a)
            | Expression::Abs(a) => a.max_var(),
            Expression::Max(args) | Expression::Min(args) | Expression::Norm2(args) => {
                args.iter().filter_map(|e| e.max_var()).max()
            }
        }
    }

    /// True when the tree contains no `abs`/`max`/`min`/`norm2` node, i.e.
    /// the expression is differentiable everywhere.
    pub fn is_smooth_tree(&self) -> bool {
        match self {
            Expression::Const(_) | Expression::Var(_) => true,
            Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
                a.is_smooth_tree() && b.is_smooth_tree()
            }
            Expression::Neg(a)
            | Expression::Pow(a, _)
            | Expression::Sin(a)
            | Expression::Cos(a)
            | Expression::Exp(a) => a.is_smooth_tree(),
            Expression::Abs(_)
            | Expression::Max(_)
            | Expression::Min(_)
            | Expression::Norm2(_) => false,
        }
    }

    /// Evaluate at `x`. The caller is responsible for `x` covering every
    /// variable index (checked in debug builds).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expression::Const(c) => *c,
            Expression::Var(i) => {
                debug_assert!(*i < x.len(), "variable x{} out of range", i + 1);
                x[*i]
            }
            Expression::Add(a, b) => a.eval(x) + b.eval(x),
            Expression::Sub(a, b) => a.eval(x) - b.eval(x),
            Expression::Mul(a, b) => a.eval(x) * b.eval(x),
            Expression::Neg(a) => -a.eval(x),
            Expression::Pow(a, k) => a.eval(x).powi(*k as i32),
            Expression::Sin(a) => a.eval(x).sin(),
            Expression::Cos(a) => a.eval(x).cos(),
            Expression::Exp(a) => a.eval(x).exp(),
            Expression::Abs(a) => a.eval(x).abs(),
            Expression::Max(args) => args
                .iter()
                .map(|e| e.eval(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Expression::Min(args) => args
                .iter()
                .map(|e| e.eval(x))
                .fold(f64::INFINITY, f64::min),
            Expression::Norm2(args) => args
                .iter()
                .map(|e| {
                    let v = e.eval(x);
                    v * v
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Symbolic partial derivative with respect to variable `var`.
    ///
    /// Only defined for smooth trees; hitting `abs`/`max`/`min`/`norm2`
    /// returns [`DslError::NotSmooth`]. The result is lightly simplified
    /// (zero and one folding) but not otherwise normalized.
    pub fn partial(&self, var: usize) -> Result<Expression, DslError> {
        use Expression as E;
        Ok(match self {
            E::Const(_) => E::Const(0.0),
            E::Var(i) => E::Const(if *i == var { 1.0 } else { 0.0 }),
            E::Add(a, b) => add_e(a.partial(var)?, b.partial(var)?),
            E::Sub(a, b) => sub_e(a.partial(var)?, b.partial(var)?),
            E::Mul(a, b) => add_e(
                mul_e(a.partial(var)?, (**b).clone()),
                mul_e((**a).clone(), b.partial(var)?),
            ),
            E::Neg(a) => neg_e(a.partial(var)?),
            E::Pow(a, k) => {
                let inner = a.partial(var)?;
                let power = if *k == 1 {
                    E::Const(1.0)
                } else if *k == 2 {
                    mul_e(E::Const(2.0), (**a).clone())
                } else {
                    mul_e(E::Const(*k as f64), E::Pow(a.clone(), k - 1))
                };
                mul_e(power, inner)
            }
            E::Sin(a) => mul_e(E::Cos(a.clone()), a.partial(var)?),
            E::Cos(a) => neg_e(mul_e(E::Sin(a.clone()), a.partial(var)?)),
            E::Exp(a) => mul_e(E::Exp(a.clone()), a.partial(var)?),
            E::Abs(_) => return Err(DslError::NotSmooth { node: "abs" }),
            E::Max(_) => return Err(DslError::NotSmooth { node: "max" }),
            E::Min(_) => return Err(DslError::NotSmooth { node: "min" }),
            E::Norm2(_) => return Err(DslError::NotSmooth { node: "norm2" }),
        })
    }

    /// Gradient of a smooth tree at `x`, by evaluating the symbolic partials.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, DslError> {
        (0..x.len()).map(|i| Ok(self.partial(i)?.eval(x))).collect()
    }

    /// Substitute `x[var] - delta` for variable `var` (translation along one
    /// coordinate), used to shift smooth constraints of periodic cells.
    pub fn shift_var(&self, var: usize, delta: f64) -> Expression {
        use Expression as E;
        let rec = |e: &Expression| Box::new(e.shift_var(var, delta));
        match self {
            E::Const(c) => E::Const(*c),
            E::Var(i) if *i == var => {
                E::Sub(Box::new(E::Var(*i)), Box::new(E::Const(delta)))
            }
            E::Var(i) => E::Var(*i),
            E::Add(a, b) => E::Add(rec(a), rec(b)),
            E::Sub(a, b) => E::Sub(rec(a), rec(b)),
            E::Mul(a, b) => E::Mul(rec(a), rec(b)),
            E::Neg(a) => E::Neg(rec(a)),
            E::Pow(a, k) => E::Pow(rec(a), *k),
            E::Sin(a) => E::Sin(rec(a)),
            E::Cos(a) => E::Cos(rec(a)),
            E::Exp(a) => E::Exp(rec(a)),
            E::Abs(a) => E::Abs(rec(a)),
            E::Max(args) => E::Max(args.iter().map(|e| e.shift_var(var, delta)).collect()),
            E::Min(args) => E::Min(args.iter().map(|e| e.shift_var(var, delta)).collect()),
            E::Norm2(args) => {
                E::Norm2(args.iter().map(|e| e.shift_var(var, delta)).collect())
            }
        }
    }
}

/// Constant-folding constructors used by differentiation.
fn add_e(a: Expression, b: Expression) -> Expression {
    match (&a, &b) {
        (Expression::Const(x), _) if *x == 0.0 => b,
        (_, Expression::Const(y)) if *y == 0.0 => a,
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x + y),
        _ => Expression::Add(Box::new(a), Box::new(b)),
    }
}

fn sub_e(a: Expression, b: Expression) -> Expression {
    match (&a, &b) {
        (_, Expression::Const(y)) if *y == 0.0 => a,
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x - y),
        (Expression::Const(x), _) if *x == 0.0 => neg_e(b),
        _ => Expression::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul_e(a: Expression, b: Expression) -> Expression {
    match (&a, &b) {
        (Expression::Const(x), _) if *x == 0.0 => Expression::Const(0.0),
        (_, Expression::Const(y)) if *y == 0.0 => Expression::Const(0.0),
        (Expression::Const(x), _) if *x == 1.0 => b,
        (_, Expression::Const(y)) if *y == 1.0 => a,
        (Expression::Const(x), Expression::Const(y)) => Expression::Const(x * y),
        _ => Expression::Mul(Box::new(a), Box::new(b)),
    }
}

fn neg_e(a: Expression) -> Expression {
    match &a {
        Expression::Const(x) => Expression::Const(-x),
        Expression::Neg(inner) => (**inner).clone(),
        _ => Expression::Neg(Box::new(a)),
    }
}

// Precedence levels for printing: additive 1, multiplicative 2, power 3,
// atoms 4. A child is parenthesized when its level is at or below the
// context's binding requirement.
fn level(e: &Expression) -> u8 {
    match e {
        Expression::Add(..) | Expression::Sub(..) => 1,
        Expression::Mul(..) => 2,
        Expression::Neg(..) => 2,
        Expression::Pow(..) => 3,
        _ => 4,
    }
}

fn fmt_child(e: &Expression, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn fmt_args(args: &[Expression], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Expression {
    /// Prints a form that re-parses to a semantically equal expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expression::Var(i) => write!(f, "x{}", i + 1),
            Expression::Add(a, b) => {
                fmt_child(a, f, 1)?;
                write!(f, " + ")?;
                fmt_child(b, f, 2)
            }
            Expression::Sub(a, b) => {
                fmt_child(a, f, 1)?;
                write!(f, " - ")?;
                // Right operand binds tighter to keep a - (b - c) unambiguous.
                fmt_child(b, f, 2)
            }
            Expression::Mul(a, b) => {
                fmt_child(a, f, 2)?;
                write!(f, "*")?;
                fmt_child(b, f, 3)
            }
            Expression::Neg(a) => {
                write!(f, "-")?;
                fmt_child(a, f, 4)
            }
            Expression::Pow(a, k) => {
                fmt_child(a, f, 4)?;
                write!(f, "^{k}")
            }
            Expression::Sin(a) => write!(f, "sin({a})"),
            Expression::Cos(a) => write!(f, "cos({a})"),
            Expression::Exp(a) => write!(f, "exp({a})"),
            Expression::Abs(a) => write!(f, "abs({a})"),
            Expression::Max(args) => {
                write!(f, "max(")?;
                fmt_args(args, f)?;
                write!(f, ")")
            }
            Expression::Min(args) => {
                write!(f, "min(")?;
                fmt_args(args, f)?;
                write!(f, ")")
            }
            Expression::Norm2(args) => {
                write!(f, "norm2(")?;
                fmt_args(args, f)?;
                write!(f, ")")
            }
        }
    }
}

/// An ordered list of objective components sharing one variable space.
#[derive(Debug, Clone)]
pub struct VectorObjective {
    dim: usize,
    components: Vec<Expression>,
}

impl VectorObjective {
    /// Build from components, validating every variable index against `dim`.
    pub fn new(dim: usize, components: Vec<Expression>) -> Result<Self, DslError> {
        for c in &components {
            if let Some(i) = c.max_var() {
                if i >= dim {
                    return Err(DslError::VarOutOfRange { index: i, dim });
                }
            }
        }
        Ok(VectorObjective { dim, components })
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of objective components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// True when there are no components (never the case for parsed problems).
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The component expressions in order.
    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    /// Evaluate every component at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Evaluate the components selected by the 0-based index set `index_set`.
    pub fn eval_subset(&self, index_set: &[usize], x: &[f64]) -> Vec<f64> {
        index_set.iter().map(|&i| self.components[i].eval(x)).collect()
    }

    /// The sub-objective keeping only the components in `index_set`.
    pub fn restrict(&self, index_set: &[usize]) -> VectorObjective {
        VectorObjective {
            dim: self.dim,
            components: index_set
                .iter()
                .map(|&i| self.components[i].clone())
                .collect(),
        }
    }
}
