//! Expression trees for scalar functions of one variable `x`.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := unary ("^" factor)?          -- right associative
//! unary  := "-" unary | atom
//! atom   := number | "x" | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Builtins: `exp`, `log`, `sqrt`, `abs`, `phi` (standard normal density).
//! Any other identifier is a named parameter and must be bound to a value at
//! parse time. Evaluation is strict about domains: `log`/`sqrt` of negative
//! numbers, division by zero, and non-finite intermediate results are errors
//! rather than silent NaNs.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// 1/sqrt(2*pi), the normalizing constant of `phi`.
pub const INV_SQRT_2PI: f64 = 0.39894228040143267793994605993438;

/// Parameter bindings, ordered for reproducible display.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Exp,
    Log,
    Sqrt,
    Abs,
    Phi,
}

impl Builtin {
    fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Phi => "phi",
        }
    }

    fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "exp" => Some(Builtin::Exp),
            "log" => Some(Builtin::Log),
            "sqrt" => Some(Builtin::Sqrt),
            "abs" => Some(Builtin::Abs),
            "phi" => Some(Builtin::Phi),
            _ => None,
        }
    }
}

/// Abstract syntax tree of a scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(b: Builtin, a: Expr) -> Expr {
        Expr::Call(b, Box::new(a))
    }

    pub fn negate(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// Evaluates at `x` with the given parameter bindings.
    pub fn eval(&self, x: f64, params: &Params) -> Result<f64> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Param(name) => *params.get(name).ok_or_else(|| Error::UnboundParam {
                name: name.clone(),
                position: 0,
            })?,
            Expr::Neg(a) => -a.eval(x, params)?,
            Expr::Bin(op, a, b) => {
                let u = a.eval(x, params)?;
                let w = b.eval(x, params)?;
                match op {
                    BinOp::Add => u + w,
                    BinOp::Sub => u - w,
                    BinOp::Mul => u * w,
                    BinOp::Div => {
                        if w == 0.0 {
                            return Err(Error::MathDomain { op: "division", x });
                        }
                        u / w
                    }
                    BinOp::Pow => libm::pow(u, w),
                }
            }
            Expr::Call(b, a) => {
                let u = a.eval(x, params)?;
                match b {
                    Builtin::Exp => libm::exp(u),
                    Builtin::Log => {
                        if u <= 0.0 {
                            return Err(Error::MathDomain { op: "log", x });
                        }
                        libm::log(u)
                    }
                    Builtin::Sqrt => {
                        if u < 0.0 {
                            return Err(Error::MathDomain { op: "sqrt", x });
                        }
                        libm::sqrt(u)
                    }
                    Builtin::Abs => libm::fabs(u),
                    Builtin::Phi => INV_SQRT_2PI * libm::exp(-0.5 * u * u),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MathDomain { op: "non-finite result", x })
        }
    }

    /// Exact symbolic derivative with respect to `x`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Param(_) => Expr::Num(0.0),
            Expr::Var => Expr::Num(1.0),
            Expr::Neg(a) => Expr::negate(a.differentiate()),
            Expr::Bin(BinOp::Add, a, b) => {
                Expr::bin(BinOp::Add, a.differentiate(), b.differentiate())
            }
            Expr::Bin(BinOp::Sub, a, b) => {
                Expr::bin(BinOp::Sub, a.differentiate(), b.differentiate())
            }
            Expr::Bin(BinOp::Mul, a, b) => Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Mul, a.differentiate(), (**b).clone()),
                Expr::bin(BinOp::Mul, (**a).clone(), b.differentiate()),
            ),
            Expr::Bin(BinOp::Div, a, b) => Expr::bin(
                BinOp::Div,
                Expr::bin(
                    BinOp::Sub,
                    Expr::bin(BinOp::Mul, a.differentiate(), (**b).clone()),
                    Expr::bin(BinOp::Mul, (**a).clone(), b.differentiate()),
                ),
                Expr::bin(BinOp::Mul, (**b).clone(), (**b).clone()),
            ),
            Expr::Bin(BinOp::Pow, a, b) => match &**b {
                // constant exponent: power rule keeps polynomials polynomial
                // and stays valid for negative bases
                Expr::Num(c) => Expr::bin(
                    BinOp::Mul,
                    Expr::bin(
                        BinOp::Mul,
                        Expr::Num(*c),
                        Expr::bin(BinOp::Pow, (**a).clone(), Expr::Num(c - 1.0)),
                    ),
                    a.differentiate(),
                ),
                // general case: u^v = exp(v log u)
                _ => Expr::bin(
                    BinOp::Mul,
                    self.clone(),
                    Expr::bin(
                        BinOp::Add,
                        Expr::bin(
                            BinOp::Mul,
                            b.differentiate(),
                            Expr::call(Builtin::Log, (**a).clone()),
                        ),
                        Expr::bin(
                            BinOp::Div,
                            Expr::bin(BinOp::Mul, (**b).clone(), a.differentiate()),
                            (**a).clone(),
                        ),
                    ),
                ),
            },
            Expr::Call(b, a) => {
                let inner = a.differentiate();
                let outer = match b {
                    Builtin::Exp => Expr::call(Builtin::Exp, (**a).clone()),
                    Builtin::Log => Expr::bin(BinOp::Div, Expr::Num(1.0), (**a).clone()),
                    Builtin::Sqrt => Expr::bin(
                        BinOp::Div,
                        Expr::Num(0.5),
                        Expr::call(Builtin::Sqrt, (**a).clone()),
                    ),
                    // |u|' = u/|u|; undefined at u = 0, which evaluation reports
                    Builtin::Abs => Expr::bin(
                        BinOp::Div,
                        (**a).clone(),
                        Expr::call(Builtin::Abs, (**a).clone()),
                    ),
                    Builtin::Phi => Expr::negate(Expr::bin(
                        BinOp::Mul,
                        (**a).clone(),
                        Expr::call(Builtin::Phi, (**a).clone()),
                    )),
                };
                Expr::bin(BinOp::Mul, outer, inner)
            }
        }
    }

    /// Names of all parameters appearing in the tree.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.collect_params(&mut names);
        names.sort();
        names.dedup();
        names
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(n) => out.push(n.clone()),
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_params(out),
            Expr::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Num(_) | Expr::Var => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var => write!(f, "x"),
            Expr::Param(n) => write!(f, "{}", n),
            Expr::Neg(a) => {
                write!(f, "-")?;
                // unary := "-" unary | atom, so anything below atom level needs parens
                if a.precedence() < 3 || matches!(**a, Expr::Bin(BinOp::Pow, ..)) {
                    write!(f, "({})", a)
                } else {
                    a.write(f)
                }
            }
            Expr::Bin(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                // left child: strictly lower precedence needs parens; for the
                // right child the bar is one higher on left-associative ops
                // and for "^" the left operand must be a unary.
                let left_needs = if *op == BinOp::Pow {
                    // "^" is right associative and binds a unary on the left
                    matches!(**a, Expr::Bin(BinOp::Pow, ..))
                        || (a.precedence() < 4 && !matches!(**a, Expr::Neg(_)))
                } else {
                    a.precedence() < prec
                };
                let right_needs = match op {
                    BinOp::Add | BinOp::Sub => b.precedence() <= 1,
                    BinOp::Mul | BinOp::Div => b.precedence() <= 2,
                    // the exponent slot holds a factor: unary or another "^"
                    BinOp::Pow => b.precedence() <= 2,
                };
                if left_needs {
                    write!(f, "({})", a)?;
                } else {
                    a.write(f)?;
                }
                write!(f, " {} ", sym)?;
                if right_needs {
                    write!(f, "({})", b)
                } else {
                    b.write(f)
                }
            }
            Expr::Call(b, a) => write!(f, "{}({})", b.name(), a),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f)
    }
}

/// Parses an expression, checking that every free parameter is bound.
pub fn parse_expr(text: &str, params: &Params) -> Result<Expr> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        params,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(Error::Syntax {
            position: p.pos,
            message: format!("unexpected `{}`", p.rest_preview()),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    params: &'a Params,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn rest_preview(&self) -> String {
        let rest = &self.bytes[self.pos..];
        let n = rest.len().min(12);
        String::from_utf8_lossy(&rest[..n]).into_owned()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'+' => BinOp::Add,
                b'-' => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'*' => BinOp::Mul,
                b'/' => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::negate(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(Error::Syntax {
                position: self.pos,
                message: format!("expected a value, found `{}`", self.rest_preview()),
            }),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.pos,
                message: format!("expected `{}`", c as char),
            })
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // optional exponent part: e.g. 1e-7
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let mut probe = self.pos + 1;
            if probe < self.bytes.len() && matches!(self.bytes[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax {
                position: start,
                message: format!("invalid number `{}`", text),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();
        if name == "x" {
            return Ok(Expr::Var);
        }
        if let Some(builtin) = Builtin::from_name(&name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::call(builtin, arg));
        }
        if self.params.contains_key(&name) {
            Ok(Expr::Param(name))
        } else {
            Err(Error::UnboundParam { name, position: start })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn no_params() -> Params {
        Params::new()
    }

    fn ev(text: &str, x: f64) -> f64 {
        parse_expr(text, &no_params()).unwrap().eval(x, &no_params()).unwrap()
    }

    #[test]
    fn parses_weight_of_first_worked_example() {
        assert_eq!(ev("x - 1", 2.0), 1.0);
        assert_eq!(ev("x", 0.5), 0.5);
    }

    #[test]
    fn phi_at_zero_is_normalizing_constant() {
        let mut params = Params::new();
        params.insert("z".to_string(), 2.0);
        let e = parse_expr("(1 + z*x)*phi(x)", &params).unwrap();
        let got = e.eval(0.0, &params).unwrap();
        assert!((got - 0.3989422804014327).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_right_associative_pow() {
        assert_eq!(ev("2 + 3 * 4", 0.0), 14.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(ev("2 - 1 - 1", 0.0), 0.0);
        // grammar: factor := unary ("^" factor)?, so -x^2 is (-x)^2
        assert_eq!(ev("-x^2", 3.0), 9.0);
        assert_eq!(ev("12*x^3", 2.0), 96.0);
    }

    #[test]
    fn cubic_link_derivative_matches_stated_form() {
        let q = parse_expr("2 - x + 12*x^2 - 12*x^3", &no_params()).unwrap();
        let dq = q.differentiate();
        let expect = parse_expr("-1 + 24*x - 36*x^2", &no_params()).unwrap();
        for i in 0..50 {
            let x = -1.0 + 0.06 * i as f64;
            let a = dq.eval(x, &no_params()).unwrap();
            let b = expect.eval(x, &no_params()).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = parse_expr("2", &no_params()).unwrap();
        assert_eq!(c.differentiate().eval(7.0, &no_params()).unwrap(), 0.0);
    }

    #[test]
    fn phi_derivative_matches_central_difference() {
        let p = parse_expr("phi(x)", &no_params()).unwrap();
        let dp = p.differentiate();
        let h = 1e-5;
        let x = 1.0;
        let fd = (p.eval(x + h, &no_params()).unwrap() - p.eval(x - h, &no_params()).unwrap())
            / (2.0 * h);
        let ad = dp.eval(x, &no_params()).unwrap();
        assert!((ad - fd).abs() <= 1e-8);
        // closed form -x phi(x)
        let phi1 = p.eval(1.0, &no_params()).unwrap();
        assert!((ad + phi1).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_are_reported_not_nan() {
        let log = parse_expr("log(x)", &no_params()).unwrap();
        assert!(matches!(log.eval(-1.0, &no_params()), Err(Error::MathDomain { .. })));
        let sqrt = parse_expr("sqrt(x)", &no_params()).unwrap();
        assert!(matches!(sqrt.eval(-0.5, &no_params()), Err(Error::MathDomain { .. })));
        let div = parse_expr("1 / x", &no_params()).unwrap();
        assert!(matches!(div.eval(0.0, &no_params()), Err(Error::MathDomain { .. })));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_expr("1 + * 2", &no_params()) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected syntax error, got {:?}", other),
        }
    }

    #[test]
    fn unbound_parameter_is_rejected() {
        match parse_expr("1 + z*x", &no_params()) {
            Err(Error::UnboundParam { name, .. }) => assert_eq!(name, "z"),
            other => panic!("expected unbound param, got {:?}", other),
        }
    }

    #[test]
    fn unparse_reparse_is_identity() {
        let texts = [
            "x - 1",
            "(1 + z*x)*phi(x)",
            "2 - x + 12*x^2 - 12*x^3",
            "-(x + 1) * exp(-x^2 / 2)",
            "x / (1 - x) / 2",
            "x - (1 - x)",
            "2 ^ x ^ 2",
        ];
        let mut params = Params::new();
        params.insert("z".to_string(), 2.0);
        for t in texts {
            let e = parse_expr(t, &params).unwrap();
            let printed = e.to_string();
            let back = parse_expr(&printed, &params).unwrap();
            assert_eq!(e, back, "round trip failed for `{t}` -> `{printed}`");
        }
    }
}
