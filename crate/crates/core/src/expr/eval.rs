use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{BinOp, Expr, Func, Point3};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainErrorKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    NegativeBaseFractionalPower,
    NonFiniteResult,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainErrorKind::LogOfNonPositive => "log of a non-positive value",
            DomainErrorKind::SqrtOfNegative => "sqrt of a negative value",
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::NegativeBaseFractionalPower => "non-integer power of a negative base",
            DomainErrorKind::NonFiniteResult => "non-finite result",
        })
    }
}

/// Evaluation left the function's domain. Carries the node where it
/// happened and the evaluation point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{node}` at ({}, {}, {})", .point[0], .point[1], .point[2])]
pub struct EvalError {
    pub kind: DomainErrorKind,
    pub node: String,
    pub point: [f64; 3],
}

impl EvalError {
    pub fn new<T: Scalar>(kind: DomainErrorKind, node: &Expr, p: &Point3<T>) -> Self {
        Self {
            kind,
            node: node.to_string(),
            point: p.to_f64(),
        }
    }
}

pub(super) fn eval<T: Scalar>(e: &Expr, p: &Point3<T>) -> Result<T, EvalError> {
    let fail = |kind| Err(EvalError::new(kind, e, p));
    let v = match e {
        Expr::Const(c) => T::lit(*c),
        Expr::Var(v) => p.get(v.rank() - 1),
        Expr::Neg(inner) => -eval(inner, p)?,
        Expr::Call(func, arg) => {
            let a = eval(arg, p)?;
            match func {
                Func::Exp => a.exp(),
                Func::Log if a <= T::zero() => return fail(DomainErrorKind::LogOfNonPositive),
                Func::Log => a.ln(),
                Func::Abs => a.abs(),
                Func::Sqrt if a < T::zero() => return fail(DomainErrorKind::SqrtOfNegative),
                Func::Sqrt => a.sqrt(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
            }
        }
        Expr::Binary(op, l, r) => {
            let a = eval(l, p)?;
            let b = eval(r, p)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == T::zero() => return fail(DomainErrorKind::DivisionByZero),
                BinOp::Div => a / b,
                BinOp::Pow => match power(a, b) {
                    Ok(v) => v,
                    Err(kind) => return fail(kind),
                },
            }
        }
    };
    if !v.is_finite() {
        return fail(DomainErrorKind::NonFiniteResult);
    }
    Ok(v)
}

pub(super) fn power<T: Scalar>(base: T, exponent: T) -> Result<T, DomainErrorKind> {
    if base == T::zero() && exponent < T::zero() {
        return Err(DomainErrorKind::DivisionByZero);
    }
    let integral = exponent.fract() == T::zero();
    if integral && exponent.abs() <= T::lit(1024.0) {
        // exact repeated multiplication for small integer exponents
        return Ok(base.powi(exponent.to_i32().expect("bounded exponent")));
    }
    if base < T::zero() && !integral {
        return Err(DomainErrorKind::NegativeBaseFractionalPower);
    }
    Ok(base.powf(exponent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Evaluable};

    fn at(src: &str, x: f64, y: f64, z: f64) -> Result<f64, EvalError> {
        parse(src).unwrap().eval(&Point3::new(x, y, z))
    }

    #[test]
    fn arithmetic_and_identities() {
        assert_eq!(at("x^2+y*z", 1.0, 2.0, 3.0).unwrap(), 7.0);
        assert_eq!(at("exp(x)", 0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(at("-x^2", 1.0, 0.0, 0.0).unwrap(), -1.0);
        assert_eq!(at("2^3^2", 0.0, 0.0, 0.0).unwrap(), 512.0);
        assert_eq!(at("(-8)^(1/3*3)", 0.0, 0.0, 0.0).unwrap(), -8.0);
        assert_eq!(at("abs(x) + sqrt(y)", -3.0, 16.0, 0.0).unwrap(), 7.0);
        assert!((at("sin(x)^2 + cos(x)^2", 0.7, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(at("x^0.5", 9.0, 0.0, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn domain_errors_name_the_node_and_point() {
        let err = at("1 + log(x)", 0.0, 0.0, 0.0).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::LogOfNonPositive);
        assert_eq!(err.node, "log(x)");
        assert_eq!(err.point, [0.0, 0.0, 0.0]);

        let kind = |src: &str, x: f64| at(src, x, 0.0, 0.0).unwrap_err().kind;
        assert_eq!(kind("sqrt(x)", -1.0), DomainErrorKind::SqrtOfNegative);
        assert_eq!(kind("1/x", 0.0), DomainErrorKind::DivisionByZero);
        assert_eq!(kind("x^-1", 0.0), DomainErrorKind::DivisionByZero);
        assert_eq!(
            kind("x^0.5", -4.0),
            DomainErrorKind::NegativeBaseFractionalPower
        );
        assert_eq!(kind("exp(x)", 1000.0), DomainErrorKind::NonFiniteResult);
    }

    #[test]
    fn evaluates_in_single_precision() {
        let e = parse("x^2 + y").unwrap();
        let v: f32 = e.eval(&Point3::new(1.5f32, 0.25, 0.0)).unwrap();
        assert_eq!(v, 2.5);
    }
}
