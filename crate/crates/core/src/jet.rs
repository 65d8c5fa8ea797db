//! Nonlinearities `φ(s, ξ₁, ξ₂)` evaluated on a function and its derivative.

use thiserror::Error;

use crate::expr::{EvalError, Expression, ParseError};

/// Variables of a first-jet nonlinearity; `t` is an alias of `s`.
pub const VARS: [&str; 4] = ["s", "t", "xi1", "xi2"];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation failed at (s={s}, xi1={y}, xi2={w}): {source}")]
pub struct JetEvalError {
    pub s: f64,
    pub y: f64,
    pub w: f64,
    #[source]
    pub source: EvalError,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("variable `{0}` is not one of s, t, xi1, xi2")]
    Variable(String),
}

/// `φ` with its partials `p₂ = ∂_{xi1}φ` and `p₃ = ∂_{xi2}φ`.
#[derive(Debug, Clone)]
pub struct JetPhi {
    pub value: Expression,
    pub d_xi1: Expression,
    pub d_xi2: Expression,
}

/// `e` over exactly [`VARS`].
pub fn rebind(e: &Expression) -> Result<Expression, JetError> {
    e.rebind(&VARS).map_err(|err| match err {
        ParseError::UndeclaredVariable { name, .. } => JetError::Variable(name),
        other => other.into(),
    })
}

pub(crate) fn eval_at(e: &Expression, s: f64, y: f64, w: f64) -> Result<f64, JetEvalError> {
    e.eval(&[s, s, y, w])
        .map_err(|source| JetEvalError { s, y, w, source })
}

impl JetPhi {
    pub fn new(phi: &Expression) -> Result<Self, JetError> {
        let value = rebind(phi)?;
        Ok(JetPhi {
            d_xi1: value.differentiate("xi1")?,
            d_xi2: value.differentiate("xi2")?,
            value,
        })
    }

    pub fn parse(text: &str) -> Result<Self, JetError> {
        JetPhi::new(&Expression::parse(text, &VARS)?)
    }

    pub fn eval(&self, s: f64, y: f64, w: f64) -> Result<f64, JetEvalError> {
        eval_at(&self.value, s, y, w)
    }

    pub fn p2(&self, s: f64, y: f64, w: f64) -> Result<f64, JetEvalError> {
        eval_at(&self.d_xi1, s, y, w)
    }

    pub fn p3(&self, s: f64, y: f64, w: f64) -> Result<f64, JetEvalError> {
        eval_at(&self.d_xi2, s, y, w)
    }
}
