//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' INT)?
//! atom   := NUMBER | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')' | '-' atom
//! ```
//!
//! `NUMBER` is a decimal literal (`2`, `0.5`, `1e-3`) or an integer fraction
//! (`1/2`). `/` is valid only between two integer literals — the language has
//! no division operator. Errors carry the byte offset of the offending token.

use super::{DslError, Expression};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, int: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number `{value}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

struct Token {
    tok: Tok,
    offset: usize,
}

fn err(offset: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'0'..=b'9' => {
                let mut int = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    int = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        int = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(start, format!("malformed number `{text}`")))?;
                toks.push(Token {
                    tok: Tok::Num { value, int },
                    offset: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            b'+' => {
                toks.push(Token { tok: Tok::Plus, offset: start });
                i += 1;
            }
            b'-' => {
                toks.push(Token { tok: Tok::Minus, offset: start });
                i += 1;
            }
            b'*' => {
                toks.push(Token { tok: Tok::Star, offset: start });
                i += 1;
            }
            b'^' => {
                toks.push(Token { tok: Tok::Caret, offset: start });
                i += 1;
            }
            b'/' => {
                toks.push(Token { tok: Tok::Slash, offset: start });
                i += 1;
            }
            b'(' => {
                toks.push(Token { tok: Tok::LParen, offset: start });
                i += 1;
            }
            b')' => {
                toks.push(Token { tok: Tok::RParen, offset: start });
                i += 1;
            }
            b',' => {
                toks.push(Token { tok: Tok::Comma, offset: start });
                i += 1;
            }
            _ => {
                // Report the whole UTF-8 scalar, not its first byte.
                let ch = src[start..].chars().next().unwrap();
                return Err(err(start, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(toks)
}

/// Which spellings name a variable.
#[derive(Clone, Copy, PartialEq)]
enum VarMode {
    /// `x1..xn`, for objectives and constraints.
    Coordinates,
    /// The single parameter `t`, for probe-path coordinate functions.
    Parameter,
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: usize,
    mode: VarMode,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(err(
                self.offset(),
                format!("expected {what}, found {}", t.describe()),
            )),
            None => Err(err(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expression, DslError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, DslError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expression::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expression, DslError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let off = self.offset();
            match self.bump().map(|t| &t.tok) {
                Some(Tok::Num { value, int: true })
                    if *value >= 1.0 && value.fract() == 0.0 && *value <= u32::MAX as f64 =>
                {
                    return Ok(Expression::Pow(Box::new(base), *value as u32));
                }
                Some(t) => {
                    return Err(err(
                        off,
                        format!("exponent must be a positive integer, found {}", t.describe()),
                    ))
                }
                None => {
                    return Err(err(off, "exponent must be a positive integer, found end of input"))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression, DslError> {
        let off = self.offset();
        match self.bump().map(|t| &t.tok) {
            Some(Tok::Num { value, int }) => {
                let value = *value;
                if *int {
                    if let Some(Tok::Slash) = self.peek() {
                        self.pos += 1;
                        let doff = self.offset();
                        match self.bump().map(|t| &t.tok) {
                            Some(Tok::Num { value: den, int: true }) => {
                                if *den == 0.0 {
                                    return Err(err(doff, "fraction denominator must be nonzero"));
                                }
                                return Ok(Expression::Const(value / *den));
                            }
                            Some(t) => {
                                return Err(err(
                                    doff,
                                    format!(
                                        "fraction denominator must be an integer, found {}",
                                        t.describe()
                                    ),
                                ))
                            }
                            None => {
                                return Err(err(
                                    doff,
                                    "fraction denominator must be an integer, found end of input",
                                ))
                            }
                        }
                    }
                }
                Ok(Expression::Const(value))
            }
            Some(Tok::Ident(name)) => self.ident(name.clone(), off),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                let inner = self.atom()?;
                // Fold a negated literal so `-1/2` is the constant -0.5.
                Ok(match inner {
                    Expression::Const(c) => Expression::Const(-c),
                    other => Expression::Neg(Box::new(other)),
                })
            }
            Some(t) => Err(err(off, format!("expected an expression, found {}", t.describe()))),
            None => Err(err(self.end, "expected an expression, found end of input")),
        }
    }

    fn ident(&mut self, name: String, off: usize) -> Result<Expression, DslError> {
        // Variable spellings first, then function calls.
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                return match self.mode {
                    VarMode::Coordinates => {
                        let idx: usize = rest.parse().map_err(|_| {
                            err(off, format!("variable index `{rest}` is out of range"))
                        })?;
                        if idx == 0 {
                            Err(err(off, "variable indices start at x1"))
                        } else {
                            Ok(Expression::Var(idx - 1))
                        }
                    }
                    VarMode::Parameter => Err(err(
                        off,
                        "probe expressions are written in the parameter `t`, not coordinates",
                    )),
                };
            }
        }
        if name == "t" {
            return match self.mode {
                VarMode::Parameter => Ok(Expression::Var(0)),
                VarMode::Coordinates => Err(err(
                    off,
                    "`t` is only available in probe-path expressions; use x1..xn here",
                )),
            };
        }
        let func = name.as_str();
        match func {
            "sin" | "cos" | "exp" | "abs" | "max" | "min" | "norm2" => {
                self.expect(Tok::LParen, "`(` after function name")?;
                let mut args = vec![self.expr()?];
                while let Some(Tok::Comma) = self.peek() {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)` to close the argument list")?;
                match func {
                    "sin" | "cos" | "exp" | "abs" => {
                        if args.len() != 1 {
                            return Err(err(
                                off,
                                format!("{func} expects exactly one argument, found {}", args.len()),
                            ));
                        }
                        let a = Box::new(args.pop().unwrap());
                        Ok(match func {
                            "sin" => Expression::Sin(a),
                            "cos" => Expression::Cos(a),
                            "exp" => Expression::Exp(a),
                            _ => Expression::Abs(a),
                        })
                    }
                    "max" => Ok(Expression::Max(args)),
                    "min" => Ok(Expression::Min(args)),
                    _ => Ok(Expression::Norm2(args)),
                }
            }
            _ => Err(DslError::UnknownIdentifier { offset: off, name }),
        }
    }
}

fn parse_mode(src: &str, mode: VarMode) -> Result<Expression, DslError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
        mode,
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(err(
            p.offset(),
            format!("unexpected trailing input starting with {}", t.describe()),
        ));
    }
    Ok(e)
}

/// Parse an expression over coordinate variables `x1..xn`.
pub fn parse(src: &str) -> Result<Expression, DslError> {
    parse_mode(src, VarMode::Coordinates)
}

/// Parse a probe-path coordinate function over the single parameter `t`
/// (represented as `Var(0)` in the resulting tree).
pub fn parse_param(src: &str) -> Result<Expression, DslError> {
    parse_mode(src, VarMode::Parameter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_structure() {
        let e = parse("1 + 2*x1^2").unwrap();
        assert!((e.eval(&[3.0]) - 19.0).abs() < 1e-15);
        // Unary minus binds the whole power per the grammar: -x1^2 = (-x1)^2.
        let m = parse("-x1^2").unwrap();
        assert_eq!(m.eval(&[3.0]), 9.0);
        let m2 = parse("-(x1^2)").unwrap();
        assert_eq!(m2.eval(&[3.0]), -9.0);
    }

    #[test]
    fn fraction_literals() {
        assert_eq!(parse("1/2").unwrap(), Expression::Const(0.5));
        assert_eq!(parse("-3/4").unwrap(), Expression::Const(-0.75));
        // `/` between non-integers is rejected: there is no division.
        let e = parse("1.5/2").unwrap_err();
        assert!(matches!(e, DslError::Syntax { .. }), "{e}");
        let e = parse("x1/2").unwrap_err();
        assert!(matches!(e, DslError::Syntax { .. }), "{e}");
        let e = parse("1/0").unwrap_err();
        assert!(e.to_string().contains("denominator"), "{e}");
    }

    #[test]
    fn variables_are_one_based() {
        assert_eq!(parse("x1").unwrap(), Expression::Var(0));
        assert_eq!(parse("x12").unwrap(), Expression::Var(11));
        let e = parse("x0").unwrap_err();
        assert!(e.to_string().contains("start at x1"), "{e}");
    }

    #[test]
    fn functions_and_arity() {
        let e = parse("max(x1, -x1, 1/4)").unwrap();
        assert_eq!(e.eval(&[0.1]), 0.25);
        let e = parse("norm2(x1, x2)").unwrap();
        assert!((e.eval(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        let bad = parse("sin(x1, x2)").unwrap_err();
        assert!(bad.to_string().contains("exactly one argument"), "{bad}");
        let bad = parse("sqrt(x1)").unwrap_err();
        assert!(matches!(bad, DslError::UnknownIdentifier { ref name, .. } if name == "sqrt"));
    }

    #[test]
    fn exponent_must_be_positive_integer() {
        for src in ["x1^0", "x1^2.5", "x1^-2", "x1^x2", "x1^"] {
            let e = parse(src).unwrap_err();
            assert!(
                e.to_string().contains("positive integer"),
                "`{src}` gave: {e}"
            );
        }
    }

    #[test]
    fn error_offsets_point_at_the_problem() {
        match parse("x1 + @").unwrap_err() {
            DslError::Syntax { offset, .. } => assert_eq!(offset, 5),
            other => panic!("unexpected error {other:?}"),
        }
        match parse("x1 + sop(x2)").unwrap_err() {
            DslError::UnknownIdentifier { offset, name } => {
                assert_eq!(offset, 5);
                assert_eq!(name, "sop");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trailing_input_rejected() {
        let e = parse("x1 x2").unwrap_err();
        assert!(e.to_string().contains("trailing"), "{e}");
        let e = parse("").unwrap_err();
        assert!(e.to_string().contains("end of input"), "{e}");
    }

    #[test]
    fn parameter_mode() {
        let e = parse_param("exp(-t)*cos(t)").unwrap();
        assert!((e.eval(&[0.0]) - 1.0).abs() < 1e-15);
        let bad = parse_param("x1 + t").unwrap_err();
        assert!(bad.to_string().contains("parameter `t`"), "{bad}");
        let bad = parse("t + 1").unwrap_err();
        assert!(bad.to_string().contains("probe-path"), "{bad}");
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(parse("1e-3").unwrap(), Expression::Const(1e-3));
        assert_eq!(parse("2.5E2").unwrap(), Expression::Const(250.0));
    }
}
