//! Scalar expressions in the variables `x`, `y`, `z`.
//!
//! Grammar accepted by [`parse`]:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := ("-")* power
//! power  := atom ("^" factor)?
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`. Identifiers are the variables `x`, `y`, `z` and the functions
//! `exp`, `log`, `abs`, `sqrt`, `sin`, `cos`.

mod compile;
mod eval;
mod parse;

use std::fmt;

use serde::Serialize;

use crate::scalar::Scalar;

pub use compile::Function;
pub use eval::{DomainErrorKind, EvalError};
pub use parse::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }

    /// 1-based position, which is also the arity implied by this variable.
    pub fn rank(self) -> usize {
        match self {
            Var::X => 1,
            Var::Y => 2,
            Var::Z => 3,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Parsed expression tree. Immutable once built; evaluation is reentrant.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Highest-indexed variable present: 1 for `x` only, 2 if `y` is the
    /// highest, 3 if `z` occurs. Constant expressions report 1.
    pub fn arity(&self) -> usize {
        self.max_var().map_or(1, Var::rank)
    }

    fn max_var(&self) -> Option<Var> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(v) => Some(*v),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, l, r) => l.max_var().max(r.max_var()),
        }
    }
}

/// Fully parenthesised rendering; `parse` of the output rebuilds the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// A point of the ambient space. Lower-arity functions ignore the unused
/// coordinates, which are conventionally 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn get(&self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    pub fn set(&mut self, axis: usize, v: T) {
        match axis {
            0 => self.x = v,
            1 => self.y = v,
            2 => self.z = v,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [
            self.x.to_f64_lossy(),
            self.y.to_f64_lossy(),
            self.z.to_f64_lossy(),
        ]
    }
}

/// Anything that can be evaluated at a point of the box: parsed
/// expressions, or closures wrapped with [`from_fn`].
pub trait Evaluable<T: Scalar>: Sync {
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError>;

    /// Number of leading coordinates the function depends on (1..=3).
    fn arity(&self) -> usize;
}

impl<T: Scalar> Evaluable<T> for Expr {
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError> {
        eval::eval(self, p)
    }

    fn arity(&self) -> usize {
        Expr::arity(self)
    }
}

impl<T: Scalar, E: Evaluable<T> + ?Sized> Evaluable<T> for &E {
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError> {
        (**self).eval(p)
    }

    fn arity(&self) -> usize {
        (**self).arity()
    }
}

pub struct FnEvaluable<F> {
    arity: usize,
    f: F,
}

/// Wraps an infallible closure as an [`Evaluable`] of the given arity.
pub fn from_fn<T, F>(arity: usize, f: F) -> FnEvaluable<F>
where
    T: Scalar,
    F: Fn(&Point3<T>) -> T + Sync,
{
    assert!((1..=3).contains(&arity), "arity must be 1, 2 or 3");
    FnEvaluable { arity, f }
}

impl<T, F> Evaluable<T> for FnEvaluable<F>
where
    T: Scalar,
    F: Fn(&Point3<T>) -> T + Sync,
{
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError> {
        Ok((self.f)(p))
    }

    fn arity(&self) -> usize {
        self.arity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_follows_highest_variable() {
        assert_eq!(parse("x^2").unwrap().arity(), 1);
        assert_eq!(parse("x+z").unwrap().arity(), 3);
        assert_eq!(parse("y").unwrap().arity(), 2);
        assert_eq!(parse("5").unwrap().arity(), 1);
        assert_eq!(parse("exp(y) * 2").unwrap().arity(), 2);
    }

    #[test]
    fn display_is_fully_parenthesised() {
        let e = parse("-x^2 + y*z").unwrap();
        assert_eq!(e.to_string(), "((-(x ^ 2.0)) + (y * z))");
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn closures_wrap_as_evaluable() {
        let f = from_fn(2, |p: &Point3<f64>| p.x * p.y);
        assert_eq!(f.eval(&Point3::new(2.0, 3.0, 9.0)).unwrap(), 6.0);
        assert_eq!(Evaluable::<f64>::arity(&f), 2);
    }
}
