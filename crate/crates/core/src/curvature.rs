//! The (v)h-torsion `R̂`, the h-curvature `R`, the deviation tensor `H` and the
//! identities relating them that hold on every Finsler metric.

use crate::error::Result;
use crate::expansion::{values, ExpansionOrder, LocalExpansion};
use crate::geometry::{SamplePoint, TensorValue};
use crate::metric::FinslerMetric;
use crate::residual::{mismatch, relative, vec_norm, Residual};
use crate::tensor::Tensor;

/// Curvature tensors at one point.
///
/// `rhat^i_{ab}` is `R̂(e_a, e_b)`; `r^i_{abc}` is `R(e_a, e_b) e_c`;
/// `r_lowered_{abcw}` is `g(R(e_a, e_b) e_c, e_w)`.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub rhat: TensorValue,
    pub r: TensorValue,
    pub h: TensorValue,
    pub r_lowered: TensorValue,
}

impl CurvatureBundle {
    pub fn from_expansion(exp: &LocalExpansion) -> Result<Self> {
        let r = exp.h_curvature()?;
        Ok(CurvatureBundle {
            rhat: exp.value_of(exp.vh_torsion()?),
            r: exp.value_of(r),
            h: exp.value_of(exp.deviation()?),
            r_lowered: exp.value_of(&r.lower_into_last(exp.g())?),
        })
    }
}

pub fn vh_torsion<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(2, 4))?;
    Ok(exp.value_of(exp.vh_torsion()?))
}

pub fn deviation<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(2, 4))?;
    Ok(exp.value_of(exp.deviation()?))
}

pub fn h_curvature<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<CurvatureBundle> {
    CurvatureBundle::from_expansion(&LocalExpansion::new(metric, p, ExpansionOrder::CURVATURE)?)
}

/// Normalized norm of the cyclic sum of `D¹R̂` over its three covariant slots.
pub fn bianchi_from(exp: &LocalExpansion) -> Result<f64> {
    let d1 = values(&exp.h_deriv(exp.vh_torsion()?)?);
    Ok(relative(&d1.cyclic_sum(0, 1, 2)?, &[&d1], exp.l().value()))
}

pub fn bianchi_residual<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<f64> {
    bianchi_from(&LocalExpansion::new(metric, p, ExpansionOrder::HORIZONTAL)?)
}

/// `⅓ 𝔄_{X,Y}{(D²H)(X,Y)}` with the derivative direction first.
pub fn reconstruct_vh_torsion(exp: &LocalExpansion) -> Result<Tensor<f64>> {
    let dh = values(&exp.v_deriv(exp.deviation()?)?);
    Ok(dh.permute_cov(&[1, 0])?.antisymmetrize(0, 1)?.scale(1.0 / 3.0))
}

/// Identities valid on every metric, computed from a vertical expansion
/// (order at least [`ExpansionOrder::CURVATURE`]).
pub fn universal_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let y = exp.point().y();
    let l = exp.l().value();
    let rhat = values(exp.vh_torsion()?);
    let h = values(exp.deviation()?);
    let r = values(exp.h_curvature()?);
    let h_eta = h.contract_cov(0, y)?;
    Ok(vec![
        Residual::new(
            "curvature.rhat_antisymmetric",
            mismatch(&rhat, &rhat.permute_cov(&[1, 0])?.scale(-1.0), l),
        ),
        Residual::new(
            "curvature.h_eta",
            relative(&h_eta, &[], h.frobenius().max(l * l) * vec_norm(y)),
        ),
        Residual::new("bianchi.rhat_reconstruction", mismatch(&rhat, &reconstruct_vh_torsion(exp)?, l)),
        Residual::new("bianchi.r_eta", mismatch(&r.contract_cov(2, y)?, &rhat, l)),
    ])
}
