//! Numeric abstraction shared by plain `f64` evaluation and jet evaluation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real scalar that metric evaluators and tensor algebra can run over.
///
/// Implemented by `f64` and by [`Jet`](crate::jet::Jet). Elementary functions
/// never fail: out-of-domain arguments produce NaN, and callers that need to
/// report the offending expression check [`Scalar::value`] first.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Value at the expansion point (the scalar itself for `f64`).
    fn value(&self) -> f64;

    fn scale(&self, factor: f64) -> Self;
    fn add_f64(&self, c: f64) -> Self;
    fn recip(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Integer power by repeated squaring; negative exponents go through `recip`.
    fn powi(&self, p: i32) -> Self {
        if p < 0 {
            return self.recip().powi(-p);
        }
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, factor: f64) -> Self {
        self * factor
    }
    fn add_f64(&self, c: f64) -> Self {
        self + c
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn powi(&self, p: i32) -> Self {
        f64::powi(*self, p)
    }
}

/// Sum of `a[i] * b[i]`.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (u, v)| acc + u.clone() * v.clone())
}

pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}
