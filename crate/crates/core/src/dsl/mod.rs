//! A small expression language for fundamental functions `L(x, y)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the coordinates `x1..xn`, `y1..yn`, named parameters, and
//! the functions `sqrt(e)`, `pow(e, r)`, `dot(u, v)`, `norm2(u)` with
//! `u, v ∈ {x, y}`. Exponents must be constant.

mod ast;
mod parse;

use std::collections::BTreeMap;

use thiserror::Error;

pub use ast::{BinOp, Expr, Vector};
pub use parse::parse_metric;

use crate::diff::{jet_eval, FundamentalFunction, JetRequest};
use crate::error::{Error as CoreError, Result};
use crate::geometry::SamplePoint;
use crate::metric::{Domain, FinslerMetric};
use crate::scalar::Scalar;

/// Parse-time errors, positioned at 1-based `line:col`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },

    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, col: usize, name: String },

    #[error("{line}:{col}: `{name}` takes {expected} argument(s), got {found}")]
    Arity {
        line: usize,
        col: usize,
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("{line}:{col}: `{name}` is out of range for dimension {dimension}")]
    IndexOutOfRange {
        line: usize,
        col: usize,
        name: String,
        dimension: usize,
    },
}

impl DslError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            DslError::Syntax { line, col, .. }
            | DslError::UnknownIdentifier { line, col, .. }
            | DslError::Arity { line, col, .. }
            | DslError::IndexOutOfRange { line, col, .. } => (line, col),
        }
    }
}

/// A metric defined by a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct DslMetric {
    ast: Expr,
    n: usize,
    domain: Domain,
}

impl DslMetric {
    /// Parses `source` with the named parameters bound to constants.
    pub fn new(source: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::Config("dimension must be positive".into()));
        }
        Ok(DslMetric {
            ast: parse_metric(source, n, params)?,
            n,
            domain: Domain::Whole,
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Rejects the metric unless `y·∂L/∂y = L` at every point (relative
    /// tolerance `tol`).
    pub fn check_homogeneity(&self, points: &[SamplePoint], tol: f64) -> Result<()> {
        let field = FundamentalFunction(self);
        for p in points {
            let r = jet_eval(&JetRequest::new(&field, p, 0, 1)?)?;
            let value = r.value();
            let euler: f64 = (0..self.n).map(|i| p.y()[i] * r.get(&[], &[i]).unwrap_or(0.0)).sum();
            if !((euler - value).abs() <= tol * value.abs().max(1e-300)) {
                return Err(CoreError::Homogeneity {
                    euler,
                    value,
                    y: p.y().to_vec(),
                });
            }
        }
        Ok(())
    }
}

impl FinslerMetric for DslMetric {
    fn dimension(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        self.ast.eval(x, y)
    }
}
