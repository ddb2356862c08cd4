//! Sample points, pointwise tensor values, the structural tensors `ℓ, φ, ħ`
//! and the indicatrix projection.

use std::ops::Deref;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{ExpansionOrder, LocalExpansion};
use crate::metric::FinslerMetric;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A point `(x, y)` of the slit tangent bundle in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SamplePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidPoint(format!(
                "x has {} components, y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidPoint("direction y must be nonzero".into()));
        }
        Ok(SamplePoint { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same base point, direction scaled by `lambda > 0`.
    pub fn with_scaled_direction(&self, lambda: f64) -> Result<Self> {
        SamplePoint::new(self.x.clone(), self.y.iter().map(|v| v * lambda).collect())
    }
}

/// Validity flags of a sample point with respect to a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointStatus {
    pub in_domain: bool,
    pub strongly_convex: bool,
}

pub fn point_status<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> PointStatus {
    let in_domain = metric.check_point(p).is_ok();
    let strongly_convex = in_domain && structural_frame(metric, p).is_ok();
    PointStatus {
        in_domain,
        strongly_convex,
    }
}

/// A tensor evaluated at a sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    base: SamplePoint,
    tensor: Tensor<f64>,
}

impl TensorValue {
    pub fn new(base: SamplePoint, tensor: Tensor<f64>) -> Result<Self> {
        if tensor.dim() != base.dim() {
            return Err(Error::Rank(format!(
                "tensor of dimension {} anchored at a point of dimension {}",
                tensor.dim(),
                base.dim()
            )));
        }
        Ok(TensorValue { base, tensor })
    }

    pub fn base(&self) -> &SamplePoint {
        &self.base
    }

    pub fn tensor(&self) -> &Tensor<f64> {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor<f64> {
        self.tensor
    }

    fn rebase(&self, tensor: Tensor<f64>) -> TensorValue {
        TensorValue {
            base: self.base.clone(),
            tensor,
        }
    }
}

impl Deref for TensorValue {
    type Target = Tensor<f64>;
    fn deref(&self) -> &Tensor<f64> {
        &self.tensor
    }
}

/// `L`, the fundamental tensor and the structural tensors at one point.
#[derive(Debug, Clone)]
pub struct StructuralFrame {
    pub l: f64,
    pub g: TensorValue,
    pub g_inv: TensorValue,
    pub ell: TensorValue,
    pub phi: TensorValue,
    pub hbar: TensorValue,
}

pub fn structural_frame<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<StructuralFrame> {
    LocalExpansion::new(metric, p, ExpansionOrder::FRAME)?.frame()
}

/// Fails with [`Error::DegenerateMetric`] unless `g` is positive definite with
/// `λ_min > 1e−9 · λ_max`.
pub fn check_positive_definite(g: &Tensor<f64>) -> Result<()> {
    let n = g.dim();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (g.at(&[i, j]) + g.at(&[j, i])));
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("fundamental tensor".into()));
    }
    let eig = SymmetricEigen::new(m).eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0 && min > 1e-9 * max) {
        return Err(Error::DegenerateMetric {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

/// `𝔄` on covariant slots `a, b` of a pointwise tensor.
pub fn antisymmetrize(omega: &TensorValue, a: usize, b: usize) -> Result<TensorValue> {
    Ok(omega.rebase(omega.tensor.antisymmetrize(a, b)?))
}

/// `𝔖` over covariant slots `a, b, c` of a pointwise tensor.
pub fn cyclic_sum(omega: &TensorValue, a: usize, b: usize, c: usize) -> Result<TensorValue> {
    Ok(omega.rebase(omega.tensor.cyclic_sum(a, b, c)?))
}

pub fn indicatrix_project(omega: &TensorValue, frame: &StructuralFrame) -> Result<TensorValue> {
    Ok(omega.rebase(project(&omega.tensor, &frame.phi.tensor)?))
}

/// The projection `P`: `φ` on every covariant slot and, for `(1,p)` tensors,
/// `φ` on the output as well.
pub fn project<T: Scalar>(omega: &Tensor<T>, phi: &Tensor<T>) -> Result<Tensor<T>> {
    let sig = omega.signature();
    if sig.contra > 1 {
        return Err(Error::Rank(format!(
            "projection is defined for (1,p) and (0,p) tensors, got {sig:?}"
        )));
    }
    let mut out = if sig.contra == 1 {
        omega.apply_contra(0, phi)?
    } else {
        omega.clone()
    };
    for slot in 0..sig.cov {
        out = out.compose_cov(slot, phi)?;
    }
    Ok(out)
}

/// Largest normalized contraction with `y` over the covariant slots (and with
/// `ℓ` on the output of a `(1,p)` tensor): zero for indicatory tensors.
pub fn indicatory_defect(omega: &Tensor<f64>, y: &[f64], ell: &[f64]) -> Result<f64> {
    let norm = omega.frobenius();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let length = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let sig = omega.signature();
    let mut worst: f64 = 0.0;
    for slot in 0..sig.cov {
        worst = worst.max(omega.contract_cov(slot, y)?.frobenius() / (norm * length(y)));
    }
    if sig.contra == 1 {
        let n = omega.dim();
        let tail = n.pow(sig.cov as u32);
        let out: f64 = (0..tail)
            .map(|t| (0..n).map(|i| ell[i] * omega.components()[i * tail + t]).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(out / (norm * length(ell)));
    }
    Ok(worst)
}
