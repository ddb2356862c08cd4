use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Scalar};

/// The coordinate vectors available to `dot` and `norm2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vector {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree of a metric. Coordinate indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(Vector, usize),
    Param(String, f64),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `base ^ exponent` with a constant exponent.
    Pow(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Dot(Vector, Vector),
    Norm2(Vector),
}

fn domain_error(expr: &Expr, reason: String) -> Error {
    Error::EvalDomain {
        expr: expr.to_string(),
        reason,
    }
}

impl Expr {
    /// Whether the expression involves no coordinates.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Param(..) => true,
            Expr::Coord(..) | Expr::Dot(..) | Expr::Norm2(_) => false,
            Expr::Neg(e) | Expr::Sqrt(e) => e.is_constant(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let vector = |v: &Vector| match v {
            Vector::X => x,
            Vector::Y => y,
        };
        Ok(match self {
            Expr::Num(v) | Expr::Param(_, v) => S::from_f64(*v),
            Expr::Coord(v, i) => vector(v)[*i].clone(),
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, y)?, b.eval(x, y)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        let d = b.value();
                        if !(d.abs() > 1e-14) {
                            return Err(domain_error(self, format!("division by {d:e}")));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, exponent) => {
                let p = exponent.eval::<f64>(&[], &[])?;
                let b = base.eval(x, y)?;
                if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                    if p < 0.0 && b.value() == 0.0 {
                        return Err(domain_error(self, "negative power of zero".into()));
                    }
                    b.powi(p as i32)
                } else {
                    if !(b.value() > 0.0) {
                        return Err(domain_error(
                            self,
                            format!("non-integer power {p} of non-positive value {:e}", b.value()),
                        ));
                    }
                    b.powf(p)
                }
            }
            Expr::Sqrt(e) => {
                let v = e.eval(x, y)?;
                if v.value() < 0.0 {
                    return Err(domain_error(self, format!("square root of negative value {:e}", v.value())));
                }
                v.sqrt()
            }
            Expr::Dot(u, v) => dot(vector(u), vector(v)),
            Expr::Norm2(u) => norm2(vector(u)),
        })
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vector::X => "x",
            Vector::Y => "y",
        })
    }
}

/// Fully parenthesized source form; parsing it gives back an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Coord(v, i) => write!(f, "{v}{}", i + 1),
            Expr::Param(name, _) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
            Expr::Dot(u, v) => write!(f, "dot({u}, {v})"),
            Expr::Norm2(u) => write!(f, "norm2({u})"),
        }
    }
}
