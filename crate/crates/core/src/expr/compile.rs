//! Flat postfix form of an [`Expr`] for the quadrature hot loops.

use super::eval::{DomainErrorKind, EvalError};
use super::{BinOp, Evaluable, Expr, Func, Point3};
use crate::scalar::Scalar;

const STACK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Call(Func),
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    /// `^` with a small integer literal exponent.
    PowI(i32),
}

/// An expression compiled to postfix operations; evaluates to the same bits
/// as the tree walk in [`Expr`]'s own `Evaluable` impl.
#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    expr: Expr,
    ops: Vec<Op>,
    /// Rendering of the subexpression each op computes, for error reports.
    nodes: Vec<String>,
    max_depth: usize,
}

impl Function {
    pub fn new(expr: Expr) -> Self {
        let mut ops = Vec::new();
        let mut nodes = Vec::new();
        let mut max_depth = 0;
        emit(&expr, &mut ops, &mut nodes, 0, &mut max_depth);
        Self {
            expr,
            ops,
            nodes,
            max_depth,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    fn run<T: Scalar>(
        &self,
        p: &Point3<T>,
        stack: &mut [T],
    ) -> Result<T, (usize, DomainErrorKind)> {
        let mut sp = 0;
        for (i, op) in self.ops.iter().enumerate() {
            let fail = |kind| Err((i, kind));
            let v = match *op {
                Op::Const(c) => T::lit(c),
                Op::Var(axis) => p.get(axis),
                Op::Neg => {
                    sp -= 1;
                    -stack[sp]
                }
                Op::Call(func) => {
                    sp -= 1;
                    let a = stack[sp];
                    match func {
                        Func::Exp => a.exp(),
                        Func::Log if a <= T::zero() => {
                            return fail(DomainErrorKind::LogOfNonPositive)
                        }
                        Func::Log => a.ln(),
                        Func::Abs => a.abs(),
                        Func::Sqrt if a < T::zero() => {
                            return fail(DomainErrorKind::SqrtOfNegative)
                        }
                        Func::Sqrt => a.sqrt(),
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                    }
                }
                Op::PowI(n) => {
                    sp -= 1;
                    let a = stack[sp];
                    if a == T::zero() && n < 0 {
                        return fail(DomainErrorKind::DivisionByZero);
                    }
                    a.powi(n)
                }
                bin => {
                    sp -= 2;
                    let (a, b) = (stack[sp], stack[sp + 1]);
                    match bin {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div if b == T::zero() => return fail(DomainErrorKind::DivisionByZero),
                        Op::Div => a / b,
                        Op::Pow => super::eval::power(a, b).or_else(fail)?,
                        _ => unreachable!("unary ops handled above"),
                    }
                }
            };
            if !v.is_finite() {
                return fail(DomainErrorKind::NonFiniteResult);
            }
            stack[sp] = v;
            sp += 1;
        }
        Ok(stack[0])
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>, nodes: &mut Vec<String>, depth: usize, max: &mut usize) {
    *max = (*max).max(depth + 1);
    let op = match e {
        Expr::Const(c) => Op::Const(*c),
        Expr::Var(v) => Op::Var(v.rank() - 1),
        Expr::Neg(inner) => {
            emit(inner, ops, nodes, depth, max);
            Op::Neg
        }
        Expr::Call(func, arg) => {
            emit(arg, ops, nodes, depth, max);
            Op::Call(*func)
        }
        Expr::Binary(BinOp::Pow, base, exp) if small_integer(exp).is_some() => {
            emit(base, ops, nodes, depth, max);
            Op::PowI(small_integer(exp).unwrap())
        }
        Expr::Binary(op, l, r) => {
            emit(l, ops, nodes, depth, max);
            emit(r, ops, nodes, depth + 1, max);
            match op {
                BinOp::Add => Op::Add,
                BinOp::Sub => Op::Sub,
                BinOp::Mul => Op::Mul,
                BinOp::Div => Op::Div,
                BinOp::Pow => Op::Pow,
            }
        }
    };
    ops.push(op);
    nodes.push(e.to_string());
}

/// Integer literal exponents the tree walk also sends through `powi`.
fn small_integer(e: &Expr) -> Option<i32> {
    match e {
        Expr::Const(c) if c.fract() == 0.0 && c.abs() <= 1024.0 => Some(*c as i32),
        _ => None,
    }
}

impl<T: Scalar> Evaluable<T> for Function {
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError> {
        let result = if self.max_depth <= STACK {
            self.run(p, &mut [T::zero(); STACK])
        } else {
            self.run(p, &mut vec![T::zero(); self.max_depth])
        };
        result.map_err(|(i, kind)| EvalError {
            kind,
            node: self.nodes[i].clone(),
            point: p.to_f64(),
        })
    }

    fn arity(&self) -> usize {
        self.expr.arity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn deep_expressions_fall_back_to_a_heap_stack() {
        // right-nested sums need one stack slot per level
        let src = (0..40).map(|_| "(x + ").collect::<String>() + "1" + &")".repeat(40);
        let f = Function::new(parse(&src).unwrap());
        assert!(f.max_depth > STACK);
        assert_eq!(f.eval(&Point3::new(2.0, 0.0, 0.0)).unwrap(), 81.0);
    }

    #[test]
    fn errors_name_the_failing_subexpression() {
        let f = Function::new(parse("x + sqrt(y - 1)").unwrap());
        let err = f.eval(&Point3::new(0.0, 0.5, 0.0)).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::SqrtOfNegative);
        assert_eq!(err.node, "sqrt((y - 1.0))");
        assert_eq!(err.point, [0.0, 0.5, 0.0]);
    }
}
