//! A small expression language for coefficient functions, solutions and
//! generating functions, with plain and truncated-Taylor (jet) evaluation.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | base ("^" integer)?
//! base   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Identifiers must name one of the declared variables or one of the
//! functions `sin`, `cos`, `exp`, `ln`, `sqrt`. Exponents are integers;
//! a general power has to be written through `exp` and `ln`.

mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use jet::{multi_indices, Jet};

/// Variable list used for coefficient functions and generating functions on
/// the five-dimensional Darboux chart.
pub const DARBOUX_VARS: [&str; 5] = ["x1", "x2", "u", "p1", "p2"];

/// Variable list used for candidate solutions `f(x1, x2)`.
pub const PLANE_VARS: [&str; 2] = ["x1", "x2"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> Result<f64, ExprError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Ln if x <= 0.0 => Err(ExprError::Domain(format!("ln of nonpositive value {x}"))),
            Func::Ln => Ok(x.ln()),
            Func::Sqrt if x < 0.0 => Err(ExprError::Domain(format!("sqrt of negative value {x}"))),
            Func::Sqrt => Ok(x.sqrt()),
        }
    }
}

/// Expression tree node. Variables are stored as indices into the owning
/// [`Expr`]'s variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

/// A parsed expression together with the variable list it was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Arc<[String]>,
}

impl Expr {
    /// Parses `text` against the declared variable names.
    pub fn parse<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<Expr, ExprError> {
        let vars: Arc<[String]> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let root = parse::Parser::new(text, &vars).parse()?;
        Ok(Expr { root, vars })
    }

    /// Builds an expression from a tree. Panics if a variable index is out of range.
    pub fn from_node<S: AsRef<str>>(root: Node, vars: &[S]) -> Expr {
        let vars: Arc<[String]> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        assert!(max_var(&root).is_none_or(|m| m < vars.len()), "variable index out of range");
        Expr { root, vars }
    }

    pub fn constant<S: AsRef<str>>(value: f64, vars: &[S]) -> Expr {
        Expr::from_node(Node::Num(value), vars)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Evaluates the expression in IEEE double precision. Domain violations
    /// and non-finite intermediate results are reported as errors.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.check_arity(point.len())?;
        eval_node(&self.root, point)
    }

    /// Truncated Taylor expansion of order `order` at `base`.
    pub fn eval_jet(&self, base: &[f64], order: usize) -> Result<Jet, ExprError> {
        self.check_arity(base.len())?;
        let base: Arc<[f64]> = base.into();
        jet_node(&self.root, &base, order)
    }

    fn check_arity(&self, got: usize) -> Result<(), ExprError> {
        if got != self.nvars() {
            return Err(ExprError::Arity {
                expected: self.nvars(),
                got,
            });
        }
        Ok(())
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Num(_) => None,
        Node::Var(i) => Some(*i),
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => max_var(a),
        Node::Binary(_, a, b) => match (max_var(a), max_var(b)) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        },
    }
}

fn finite(v: f64, what: &str) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain(format!("non-finite result in {what}")))
    }
}

fn eval_node(node: &Node, pt: &[f64]) -> Result<f64, ExprError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var(i) => Ok(pt[*i]),
        Node::Neg(a) => Ok(-eval_node(a, pt)?),
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, pt)?, eval_node(b, pt)?);
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return Err(ExprError::Domain("division by zero".into())),
                BinOp::Div => a / b,
            };
            finite(v, "arithmetic")
        }
        Node::Pow(a, n) => {
            let a = eval_node(a, pt)?;
            if a == 0.0 && *n < 0 {
                return Err(ExprError::Domain(format!("zero raised to negative power {n}")));
            }
            finite(a.powi(*n), "power")
        }
        Node::Call(f, a) => finite(f.apply(eval_node(a, pt)?)?, f.name()),
    }
}

fn jet_node(node: &Node, base: &Arc<[f64]>, order: usize) -> Result<Jet, ExprError> {
    let jet = match node {
        Node::Num(v) => Jet::constant(base.clone(), order, *v),
        Node::Var(i) => Jet::variable(base.clone(), order, *i),
        Node::Neg(a) => -&jet_node(a, base, order)?,
        Node::Binary(op, a, b) => {
            let a = jet_node(a, base, order)?;
            let b = jet_node(b, base, order)?;
            match op {
                BinOp::Add => &a + &b,
                BinOp::Sub => &a - &b,
                BinOp::Mul => &a * &b,
                BinOp::Div => a.div(&b)?,
            }
        }
        Node::Pow(a, e) => jet_node(a, base, order)?.powi(*e)?,
        Node::Call(f, a) => {
            let a = jet_node(a, base, order)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln()?,
                Func::Sqrt => a.sqrt()?,
            }
        }
    };
    jet.check_finite()
}

/// Canonical printer: every compound node is parenthesised, so printing and
/// re-parsing yields an identical tree for any tree the parser can produce.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, &self.vars, f)
    }
}

fn write_node(node: &Node, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Num(v) => write!(f, "{v}"),
        Node::Var(i) => f.write_str(&vars[*i]),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, vars, f)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(a, vars, f)?;
            write!(f, " {} ", op.symbol())?;
            write_node(b, vars, f)?;
            f.write_str(")")
        }
        Node::Pow(a, e) => {
            f.write_str("(")?;
            write_node(a, vars, f)?;
            write!(f, "^{e})")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, vars, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars5() -> Vec<&'static str> {
        DARBOUX_VARS.to_vec()
    }

    #[test]
    fn root_of_sum_is_add() {
        let e = Expr::parse("p1^2 + x1*x2", &vars5()).unwrap();
        assert!(matches!(e.root(), Node::Binary(BinOp::Add, _, _)));
    }

    #[test]
    fn empty_input_is_syntax_error() {
        let err = Expr::parse("", &PLANE_VARS).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 0, .. }));
    }

    #[test]
    fn difference_of_squares() {
        let e = Expr::parse("x1^2 - x2^2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[3.0, 1.0]).unwrap(), 8.0);
        let e = Expr::parse("x1*x2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn unicode_minus_is_accepted() {
        let e = Expr::parse("x1^2 − x2^2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[3.0, 1.0]).unwrap(), 8.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expr::parse("-x1^2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0]).unwrap(), -9.0);
        let e = Expr::parse("2*-x1", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0]).unwrap(), -6.0);
    }

    #[test]
    fn left_associative() {
        let e = Expr::parse("8 - 2 - 1", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 5.0);
        let e = Expr::parse("8 / 2 / 2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn ln_of_zero_is_domain_error() {
        let e = Expr::parse("ln(x1)", &PLANE_VARS).unwrap();
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(ExprError::Domain(_))));
        let e = Expr::parse("1/x1", &PLANE_VARS).unwrap();
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(ExprError::Domain(_))));
        let e = Expr::parse("sqrt(x1)", &PLANE_VARS).unwrap();
        assert!(matches!(e.eval(&[-1.0, 1.0]), Err(ExprError::Domain(_))));
        let e = Expr::parse("exp(exp(exp(x1)))", &PLANE_VARS).unwrap();
        assert!(matches!(e.eval(&[10.0, 1.0]), Err(ExprError::Domain(_))));
    }

    #[test]
    fn pythagorean_identity() {
        let e = Expr::parse("sin(x1)^2 + cos(x1)^2", &PLANE_VARS).unwrap();
        for &x in &[-3.7, -0.2, 0.0, 1.1, 42.0] {
            assert!((e.eval(&[x, 0.0]).unwrap() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match Expr::parse("1+", &PLANE_VARS).unwrap_err() {
            ExprError::Syntax { offset, .. } => assert_eq!(offset, 2),
            e => panic!("unexpected {e:?}"),
        }
        match Expr::parse("x1 + zz", &PLANE_VARS).unwrap_err() {
            ExprError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "zz");
                assert_eq!(offset, 5);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            Expr::parse("x1^2.5", &PLANE_VARS),
            Err(ExprError::NonIntegerExponent { offset: 3 })
        ));
        assert!(matches!(
            Expr::parse("x1^x2", &PLANE_VARS),
            Err(ExprError::NonIntegerExponent { offset: 3 })
        ));
        assert!(matches!(Expr::parse("(x1", &PLANE_VARS), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("sin x1", &PLANE_VARS), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("x1 x2", &PLANE_VARS), Err(ExprError::Syntax { offset: 3, .. })));
    }

    #[test]
    fn negative_exponent() {
        let e = Expr::parse("x1^-2", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0]).unwrap(), 0.25);
        assert!(matches!(e.eval(&[0.0, 0.0]), Err(ExprError::Domain(_))));
    }

    #[test]
    fn arity_is_checked() {
        let e = Expr::parse("x1", &PLANE_VARS).unwrap();
        assert_eq!(e.eval(&[1.0]), Err(ExprError::Arity { expected: 2, got: 1 }));
    }

    #[test]
    fn printer_round_trip() {
        let src = "-(x1 - 2.5e-3)^3 / sqrt(x2 + 1) + exp(-x1*x2) - ln(2)^-1";
        let e = Expr::parse(src, &PLANE_VARS).unwrap();
        let printed = e.to_string();
        assert_eq!(Expr::parse(&printed, &PLANE_VARS).unwrap(), e);
    }
}
