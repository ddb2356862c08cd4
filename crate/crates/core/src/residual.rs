//! Named identity residuals and their normalization.

use serde::Serialize;

use crate::tensor::Tensor;

/// Normalized residual of one identity at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub identity: &'static str,
    pub value: f64,
}

impl Residual {
    pub fn new(identity: &'static str, value: f64) -> Self {
        Residual { identity, value }
    }
}

/// `‖diff‖ / max(‖term‖…, unit)`: the size of a defect relative to the largest
/// term in the identity, floored by the natural unit of the quantity.
pub fn relative(diff: &Tensor<f64>, terms: &[&Tensor<f64>], unit: f64) -> f64 {
    let scale = terms.iter().map(|t| t.frobenius()).fold(unit.abs(), f64::max);
    if scale > 0.0 {
        diff.frobenius() / scale
    } else {
        diff.frobenius()
    }
}

/// Residual of `lhs = rhs`.
pub fn mismatch(lhs: &Tensor<f64>, rhs: &Tensor<f64>, unit: f64) -> f64 {
    relative(&lhs.sub(rhs), &[lhs, rhs], unit)
}

pub(crate) fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}
