//! Geodesic spray, Berwald nonlinear connection and connection coefficients,
//! horizontal and vertical covariant derivatives.

use crate::error::Result;
use crate::expansion::{values, ExpansionOrder, LocalExpansion};
use crate::geometry::{project, SamplePoint, TensorValue};
use crate::jet::Jet;
use crate::metric::FinslerMetric;
use crate::residual::{mismatch, relative, vec_norm, Residual};
use crate::scalar::Scalar;
use crate::tensor::{Signature, Tensor};

/// `G` (1,0), `N = ∂G/∂y` (1,1) and `Γ = ∂²G/∂y∂y` (1,2) at one point.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    pub spray: TensorValue,
    pub nonlinear: TensorValue,
    pub berwald: TensorValue,
}

impl ConnectionData {
    pub fn from_expansion(exp: &LocalExpansion) -> Result<Self> {
        Ok(ConnectionData {
            spray: exp.value_of(exp.spray()?),
            nonlinear: exp.value_of(exp.nonlinear()?),
            berwald: exp.value_of(exp.berwald()?),
        })
    }
}

pub fn spray<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(1, 3))?;
    Ok(exp.value_of(exp.spray()?))
}

pub fn connection<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<ConnectionData> {
    ConnectionData::from_expansion(&LocalExpansion::new(metric, p, ExpansionOrder::CONNECTION)?)
}

/// A tensor field on the slit tangent bundle, given by a formula generic over
/// the scalar type so that it can be differentiated.
pub trait TensorField: Send + Sync {
    fn signature(&self) -> Signature;

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<Tensor<S>>;
}

fn field_germ<F: TensorField>(exp: &LocalExpansion, field: &F) -> Result<Tensor<Jet>> {
    field.eval(exp.base(), exp.eta())
}

/// `D¹T` at `p`: horizontal covariant derivative, new slot last.
pub fn h_cov_deriv<M: FinslerMetric, F: TensorField>(metric: &M, field: &F, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::CONNECTION)?;
    let t = field_germ(&exp, field)?;
    Ok(exp.value_of(&exp.h_deriv(&t)?))
}

/// `D²T` at `p`: vertical covariant derivative (componentwise `∂/∂y`), new slot last.
pub fn v_cov_deriv<M: FinslerMetric, F: TensorField>(metric: &M, field: &F, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(0, 2))?;
    let t = field_germ(&exp, field)?;
    Ok(exp.value_of(&exp.v_deriv(&t)?))
}

/// Torsion-freeness and the Euler contractions `Γ·y = N`, `N·y = 2G`.
pub fn connection_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let y = exp.point().y();
    let g = values(exp.spray()?);
    let nl = values(exp.nonlinear()?);
    let gamma = values(exp.berwald()?);
    let unit = exp.l().value();
    Ok(vec![
        Residual::new(
            "berwald.gamma_symmetric",
            mismatch(&gamma, &gamma.permute_cov(&[1, 0])?, 1.0),
        ),
        Residual::new("berwald.gamma_eta", mismatch(&gamma.contract_cov(1, y)?, &nl, unit)),
        Residual::new("berwald.nonlinear_eta", mismatch(&nl.contract_cov(0, y)?, &g.scale(2.0), unit * unit)),
    ])
}

/// Ingredients of the structural identities, computed by either backend.
#[derive(Debug, Clone)]
pub struct StructuralParts {
    pub y: Vec<f64>,
    pub l: f64,
    pub ell: Tensor<f64>,
    pub phi: Tensor<f64>,
    pub hbar: Tensor<f64>,
    /// `∂L/∂x`, for scaling `D¹L`.
    pub dl_x: Tensor<f64>,
    pub dl_h: Tensor<f64>,
    /// `∂ℓ/∂x`, for scaling `D¹ℓ`.
    pub dell_x: Tensor<f64>,
    pub dell_h: Tensor<f64>,
    pub dl_v: Tensor<f64>,
    pub dell_v: Tensor<f64>,
    pub dphi_v: Tensor<f64>,
}

impl StructuralParts {
    pub fn from_expansion(exp: &LocalExpansion) -> Result<Self> {
        let l = exp.l();
        let ell = exp.ell();
        let dl_x = Tensor::try_from_fn(exp.dim(), Signature::new(0, 1), |i| Ok(l.d_x(i[0])?.value()))?;
        let dell_x = Tensor::try_from_fn(exp.dim(), Signature::new(0, 2), |ij| {
            Ok(ell.at(&[ij[0]]).d_x(ij[1])?.value())
        })?;
        Ok(StructuralParts {
            y: exp.point().y().to_vec(),
            l: l.value(),
            ell: values(ell),
            phi: values(exp.phi()),
            hbar: values(exp.hbar()),
            dl_x,
            dl_h: values(&exp.h_deriv_scalar(l)?),
            dell_x,
            dell_h: values(&exp.h_deriv(ell)?),
            dl_v: values(&exp.v_deriv_scalar(l)?),
            dell_v: values(&exp.v_deriv(ell)?),
            dphi_v: values(&exp.v_deriv(exp.phi())?),
        })
    }
}

/// Structural identities of `ℓ, φ, ħ` and their covariant derivatives.
pub fn structural_residuals(s: &StructuralParts) -> Result<Vec<Residual>> {
    let n = s.phi.dim();
    let y = &s.y;
    let ylen = vec_norm(y);
    let l = s.l;
    let ell_eta: f64 = s.ell.components().iter().zip(y).map(|(a, b)| a * b).sum();
    let hbar_over_l = s.hbar.scale(1.0 / l);
    let dphi_expected = Tensor::from_fn(n, Signature::new(1, 2), |idx| {
        let (i, j, c) = (idx[0], idx[1], idx[2]);
        -(s.hbar.at(&[c, j]) * y[i] + l * s.phi.at(&[i, c]) * s.ell.at(&[j])) / (l * l)
    });
    let p_ell = project(&s.ell, &s.phi)?;
    let p_hbar = project(&s.hbar, &s.phi)?;
    Ok(vec![
        Residual::new("lemma21.a.ell_eta", (ell_eta - l).abs() / l),
        Residual::new(
            "lemma21.a.phi_eta",
            relative(&s.phi.contract_cov(0, y)?, &[], s.phi.frobenius() * ylen),
        ),
        Residual::new(
            "lemma21.a.hbar_eta",
            relative(&s.hbar.contract_cov(0, y)?, &[], s.hbar.frobenius() * ylen),
        ),
        Residual::new("lemma21.b.d1_l", relative(&s.dl_h, &[&s.dl_x], l)),
        Residual::new("lemma21.b.d1_ell", relative(&s.dell_h, &[&s.dell_x], s.ell.frobenius())),
        Residual::new("lemma21.c.d2_l", mismatch(&s.dl_v, &s.ell, 1.0)),
        Residual::new("lemma21.c.d2_ell", mismatch(&s.dell_v, &hbar_over_l, 1.0 / l)),
        Residual::new("lemma21.d.d2_phi", mismatch(&s.dphi_v, &dphi_expected, 1.0 / l)),
        Residual::new("lemma21.e.p_ell", relative(&p_ell, &[], s.ell.frobenius())),
        Residual::new("lemma21.e.p_hbar", mismatch(&p_hbar, &s.hbar, 1.0)),
    ])
}

/// [`structural_residuals`] evaluated with the jet backend.
pub fn lemma21_residuals<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<Vec<Residual>> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::CONNECTION)?;
    structural_residuals(&StructuralParts::from_expansion(&exp)?)
}
