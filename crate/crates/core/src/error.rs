use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
    #[error("function of arity {arity} cannot be checked on a {dim}-dimensional box (requires {required})")]
    Arity {
        arity: usize,
        dim: usize,
        required: &'static str,
    },
    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),
    #[error("corpus data error: {0}")]
    Corpus(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
