//! Scalar flag curvature `k`, the tensors `C, B, A, N, F`, the characterization
//! identities of scalar and constant curvature, and classification.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Verdict;
use crate::diff::Backend;
use crate::error::{Error, Result};
use crate::expansion::{values, ExpansionOrder, LocalExpansion};
use crate::fd_pipeline::FdPipeline;
use crate::geometry::{project, SamplePoint, TensorValue};
use crate::metric::FinslerMetric;
use crate::residual::{mismatch, relative, vec_norm, Residual};
use crate::sampling::{sample_points, SamplingSpec};
use crate::tensor::{Signature, Tensor};

/// `k` and the derived tensors at one point.
#[derive(Debug, Clone)]
pub struct ScalarData {
    pub k: f64,
    pub c: TensorValue,
    pub b: TensorValue,
    pub a: TensorValue,
    pub n_tensor: TensorValue,
    pub f: TensorValue,
}

impl ScalarData {
    /// Needs an expansion of order [`ExpansionOrder::VERTICAL`].
    pub fn from_expansion(exp: &LocalExpansion) -> Result<Self> {
        let (n_tensor, f) = nf_tensors(exp)?;
        Ok(ScalarData {
            k: exp.scalar_k()?.value(),
            c: exp.value_of(exp.tensor_c()?),
            b: exp.value_of(exp.tensor_b()?),
            a: exp.value_of(exp.tensor_a()?),
            n_tensor: exp.value_of_f64(n_tensor),
            f: exp.value_of_f64(f),
        })
    }
}

pub fn extract_k<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<f64> {
    Ok(LocalExpansion::new(metric, p, ExpansionOrder::new(2, 4))?.scalar_k()?.value())
}

/// `‖H − kL²φ‖ / max(‖H‖, L²)`.
pub fn isotropy_from(exp: &LocalExpansion) -> Result<f64> {
    let h = values(exp.deviation()?);
    let l = exp.l().value();
    let k = exp.scalar_k()?.value();
    let iso = values(exp.phi()).scale(k * l * l);
    Ok(relative(&h.sub(&iso), &[&h], l * l))
}

pub fn isotropy_residual<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<f64> {
    isotropy_from(&LocalExpansion::new(metric, p, ExpansionOrder::new(2, 4))?)
}

pub fn tensor_c<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::CURVATURE)?;
    Ok(exp.value_of(exp.tensor_c()?))
}

pub fn tensor_b<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(2, 6))?;
    Ok(exp.value_of(exp.tensor_b()?))
}

pub fn tensor_a<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<TensorValue> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::VERTICAL)?;
    Ok(exp.value_of(exp.tensor_a()?))
}

/// `N = k(g + ℓ⊗ℓ) + ⅓(B + 2ℓ⊗C + 2C⊗ℓ)` and `F = ⅓(B + 2C⊗ℓ)`.
fn nf_tensors(exp: &LocalExpansion) -> Result<(Tensor<f64>, Tensor<f64>)> {
    let k = exp.scalar_k()?.value();
    let g = values(exp.g());
    let ell = values(exp.ell());
    let c = values(exp.tensor_c()?);
    let b = values(exp.tensor_b()?);
    let ell_c = ell.outer(&c);
    let c_ell = c.outer(&ell);
    let n = g
        .add(&ell.outer(&ell))
        .scale(k)
        .add(&b.add(&ell_c.scale(2.0)).add(&c_ell.scale(2.0)).scale(1.0 / 3.0));
    let f = b.add(&c_ell.scale(2.0)).scale(1.0 / 3.0);
    Ok((n, f))
}

pub fn tensor_nf<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<(TensorValue, TensorValue)> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::new(2, 6))?;
    let (n, f) = nf_tensors(&exp)?;
    Ok((exp.value_of_f64(n), exp.value_of_f64(f)))
}

/// `a = kℓ + ⅓C`.
fn a_form(k: f64, ell: &Tensor<f64>, c: &Tensor<f64>) -> Tensor<f64> {
    ell.scale(k).add(&c.scale(1.0 / 3.0))
}

/// `R̂(X,Y) = 𝔄{Lφ(Y) a(X)}` and the h-curvature form
/// `R(X,Y)Z = 𝔄{φ(Y)[ℓ(Z)a(X) + ⅓B(Z,X) + ⅔ℓ(X)C(Z) + kħ(Z,X)] + ⅓ℓ(X)C(Y)φ(Z) + L⁻¹ħ(X,Z)η a(Y)}`.
pub fn theorem21_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let n = exp.dim();
    let y = exp.point().y();
    let l = exp.l().value();
    let k = exp.scalar_k()?.value();
    let ell = values(exp.ell());
    let phi = values(exp.phi());
    let hbar = values(exp.hbar());
    let c = values(exp.tensor_c()?);
    let b = values(exp.tensor_b()?);
    let a = a_form(k, &ell, &c);
    let rhat = values(exp.vh_torsion()?);
    let r = values(exp.h_curvature()?);
    let (el, cc, aa) = (|i| ell.at(&[i]), |i| c.at(&[i]), |i| a.at(&[i]));
    let rhat_form = Tensor::from_fn(n, Signature::new(1, 2), |idx| l * phi.at(&[idx[0], idx[2]]) * aa(idx[1]))
        .antisymmetrize(0, 1)?;
    let hc = Tensor::from_fn(n, Signature::new(1, 3), |idx| {
        let (i, x, yy, z) = (idx[0], idx[1], idx[2], idx[3]);
        phi.at(&[i, yy])
            * (el(z) * aa(x) + b.at(&[z, x]) / 3.0 + 2.0 / 3.0 * el(x) * cc(z) + k * hbar.at(&[z, x]))
            + el(x) * cc(yy) * phi.at(&[i, z]) / 3.0
            + hbar.at(&[x, z]) * y[i] * aa(yy) / l
    })
    .antisymmetrize(0, 1)?;
    Ok(vec![
        Residual::new("theorem21.isotropy", isotropy_from(exp)?),
        Residual::new("theorem21.vh_torsion", mismatch(&rhat, &rhat_form, l)),
        Residual::new("theorem21.h_curvature", mismatch(&r, &hc, 1.0)),
    ])
}

/// Symmetric and antisymmetric parts of the lowered h-curvature in its last
/// two slots, expressed through `N` and `F`.
pub fn corollary21_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let n = exp.dim();
    let hbar = values(exp.hbar());
    let r_low = values(&exp.h_curvature()?.lower_into_last(exp.g())?);
    let swapped = r_low.permute_cov(&[0, 1, 3, 2])?;
    let (nt, f) = nf_tensors(exp)?;
    let h = |a: usize, b: usize| hbar.at(&[a, b]);
    let rhs_a = Tensor::from_fn(n, Signature::new(0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        h(z, x) * nt.at(&[w, y]) + h(w, y) * nt.at(&[z, x])
    })
    .antisymmetrize(0, 1)?;
    let rhs_b = Tensor::from_fn(n, Signature::new(0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        h(w, y) * f.at(&[z, x]) + h(z, y) * f.at(&[w, x]) + h(w, z) * f.at(&[y, x])
    })
    .antisymmetrize(0, 1)?;
    Ok(vec![
        Residual::new("corollary21.a", mismatch(&r_low.sub(&swapped), &rhs_a, 1.0)),
        Residual::new("corollary21.b", mismatch(&r_low.add(&swapped), &rhs_b, 1.0)),
    ])
}

/// Norms of `P·R` and `P·N` and the residual of the projected h-curvature formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop21 {
    pub pr_norm: f64,
    pub pn_norm: f64,
    pub projected: f64,
}

impl Prop21 {
    /// Whether `P·R` and `P·N` vanish together at tolerance `tol`.
    pub fn biconditional_holds(&self, tol: f64) -> bool {
        (self.pr_norm < tol) == (self.pn_norm < tol)
    }
}

pub fn prop21_from(exp: &LocalExpansion) -> Result<Prop21> {
    let n = exp.dim();
    let k = exp.scalar_k()?.value();
    let phi = values(exp.phi());
    let hbar = values(exp.hbar());
    let b = values(exp.tensor_b()?);
    let r_low = values(&exp.h_curvature()?.lower_into_last(exp.g())?);
    let (nt, _) = nf_tensors(exp)?;
    let pr = project(&r_low, &phi)?;
    let pn = project(&nt, &phi)?;
    let rhs = Tensor::from_fn(n, Signature::new(0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        hbar.at(&[y, w]) * (b.at(&[z, x]) / 3.0 + k * hbar.at(&[z, x]))
    })
    .antisymmetrize(0, 1)?;
    Ok(Prop21 {
        pr_norm: pr.frobenius() / r_low.frobenius().max(1.0),
        pn_norm: pn.frobenius() / nt.frobenius().max(1.0),
        projected: mismatch(&pr, &rhs, 1.0),
    })
}

/// Residuals of the proposition at tolerance `tol` for the biconditional.
pub fn prop21_residuals(exp: &LocalExpansion, tol: f64) -> Result<Vec<Residual>> {
    let p = prop21_from(exp)?;
    Ok(vec![
        Residual::new("prop21.projected_curvature", p.projected),
        Residual::new("prop21.biconditional", if p.biconditional_holds(tol) { 0.0 } else { 1.0 }),
    ])
}

/// `𝔄_{X,Y}{A(X,Y,Z) + C(X)ħ(Y,Z)} = 0` and the expansion
/// `A(X,Y,Z) = L(D²B)(X,Y,Z) + ℓ(Z)B(X,Y) + ℓ(Y)B(X,Z)`.
pub fn lemma31_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let n = exp.dim();
    let l = exp.l().value();
    let ell = values(exp.ell());
    let hbar = values(exp.hbar());
    let c = values(exp.tensor_c()?);
    let b = values(exp.tensor_b()?);
    let a = values(exp.tensor_a()?);
    let c_hbar = c.outer(&hbar);
    let alt = a.add(&c_hbar).antisymmetrize(0, 1)?;
    let d2b = values(&exp.v_deriv(exp.tensor_b()?)?).permute_cov(&[1, 2, 0])?;
    let a_expansion = Tensor::from_fn(n, Signature::new(0, 3), |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        l * d2b.at(i) + ell.at(&[z]) * b.at(&[x, y]) + ell.at(&[y]) * b.at(&[x, z])
    });
    Ok(vec![
        Residual::new("lemma31.antisymmetric", relative(&alt, &[&a, &c_hbar], 1.0)),
        Residual::new("lemma31.a_expansion", mismatch(&a, &a_expansion, 1.0)),
    ])
}

/// Properties of `C`.
pub fn lemma22_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let y = exp.point().y();
    let ylen = vec_norm(y);
    let l = exp.l().value();
    let phi = values(exp.phi());
    let c = values(exp.tensor_c()?);
    let dc = values(&exp.v_deriv(exp.tensor_c()?)?);
    let c_scale = c.frobenius().max(1.0);
    Ok(vec![
        Residual::new("lemma22.a", relative(&c.contract_cov(0, y)?, &[], c_scale * ylen)),
        Residual::new("lemma22.b", mismatch(&project(&c, &phi)?, &c, 1.0)),
        Residual::new(
            "lemma22.c",
            relative(&dc.contract_cov(1, y)?, &[], dc.frobenius().max(1.0 / l) * ylen),
        ),
        Residual::new("lemma22.d", mismatch(&dc.contract_cov(0, y)?, &c.scale(-1.0), 1.0)),
    ])
}

/// Properties of `B`.
pub fn lemma23_residuals(exp: &LocalExpansion) -> Result<Vec<Residual>> {
    let y = exp.point().y();
    let ylen = vec_norm(y);
    let l = exp.l().value();
    let phi = values(exp.phi());
    let ell = values(exp.ell());
    let c = values(exp.tensor_c()?);
    let b = values(exp.tensor_b()?);
    let dc = values(&exp.v_deriv(exp.tensor_c()?)?);
    let db = values(&exp.v_deriv(exp.tensor_b()?)?);
    let b_scale = b.frobenius().max(1.0);
    let minus_b = b.scale(-1.0);
    let d = dc.permute_cov(&[1, 0])?.scale(l).add(&c.outer(&ell));
    Ok(vec![
        Residual::new("lemma23.a", relative(&b.contract_cov(0, y)?, &[], b_scale * ylen)),
        Residual::new("lemma23.b", mismatch(&project(&b, &phi)?, &b, 1.0)),
        Residual::new(
            "lemma23.c",
            relative(&db.contract_cov(2, y)?, &[], db.frobenius().max(1.0 / l) * ylen),
        ),
        Residual::new("lemma23.d", mismatch(&b, &d, 1.0)),
        Residual::new("lemma23.e", mismatch(&b, &b.permute_cov(&[1, 0])?, 1.0)),
        Residual::new(
            "lemma23.f.eta_second",
            mismatch(&db.contract_cov(0, y)?.permute_cov(&[1, 0])?, &minus_b, 1.0),
        ),
        Residual::new(
            "lemma23.f.eta_third",
            mismatch(&db.contract_cov(1, y)?.permute_cov(&[1, 0])?, &minus_b, 1.0),
        ),
    ])
}

/// `P·F = ⅓B`.
pub fn corollary31_residual(exp: &LocalExpansion) -> Result<Residual> {
    let (_, f) = nf_tensors(exp)?;
    let b = values(exp.tensor_b()?);
    let pf = project(&f, &values(exp.phi()))?;
    Ok(Residual::new("corollary31.pf", mismatch(&pf, &b.scale(1.0 / 3.0), 1.0)))
}

/// `‖D¹k‖ / max(|k|, 1)`; needs order [`ExpansionOrder::HORIZONTAL`].
pub fn d1k_from(exp: &LocalExpansion) -> Result<f64> {
    let k = exp.scalar_k()?;
    let d1k = values(&exp.h_deriv_scalar(k)?);
    Ok(d1k.frobenius() / k.value().abs().max(1.0))
}

/// Per-sample quantities behind a classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleClass {
    pub point: SamplePoint,
    pub k: f64,
    pub isotropy: f64,
    pub c_norm: f64,
    pub b_norm: Option<f64>,
    pub a_norm: Option<f64>,
    pub d1k: Option<f64>,
}

pub fn sample_class_jet<M: FinslerMetric>(metric: &M, p: &SamplePoint) -> Result<SampleClass> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::VERTICAL)?;
    let horizontal = LocalExpansion::new(metric, p, ExpansionOrder::HORIZONTAL)?;
    Ok(SampleClass {
        point: p.clone(),
        k: exp.scalar_k()?.value(),
        isotropy: isotropy_from(&exp)?,
        c_norm: values(exp.tensor_c()?).frobenius(),
        b_norm: Some(values(exp.tensor_b()?).frobenius()),
        a_norm: Some(values(exp.tensor_a()?).frobenius()),
        d1k: Some(d1k_from(&horizontal)?),
    })
}

pub fn sample_class_fd<M: FinslerMetric>(fd: &FdPipeline<M>, p: &SamplePoint) -> Result<SampleClass> {
    let geo = fd.geometry(p)?;
    Ok(SampleClass {
        point: p.clone(),
        k: geo.k,
        isotropy: geo.isotropy(),
        c_norm: fd.tensor_c(p)?.frobenius(),
        b_norm: None,
        a_norm: None,
        d1k: None,
    })
}

/// Default pass threshold of identity residuals for a backend.
pub fn default_tolerance(backend: Backend) -> f64 {
    match backend {
        Backend::Jet => 1e-7,
        Backend::Fd => 1e-3,
    }
}

/// Largest observed value of a classification criterion and its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: f64,
}

/// Outcome of [`classify`]; the verdict holds at the sampled points only.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub dimension: usize,
    pub verdict: Verdict,
    pub scope: &'static str,
    pub backend: Backend,
    pub seed: u64,
    pub count: usize,
    pub k_mean: f64,
    pub k_std: f64,
    pub k_samples: Vec<KSample>,
    pub residuals: BTreeMap<&'static str, Criterion>,
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// Classifies `metric` as generic, scalar or constant curvature at the points
/// drawn by `spec`.
///
/// Scalar iff the isotropy residual is below `tol` everywhere; constant iff in
/// addition `‖C‖ < tol` and the spread of `k` is negligible. With the jet
/// backend the `B` and `A` criteria must agree with the `C` criterion, and
/// `D¹k` must vanish on a constant verdict; any disagreement is an
/// [`Error::InternalInconsistency`].
pub fn classify<M: FinslerMetric>(
    metric: &M,
    name: &str,
    spec: &SamplingSpec,
    backend: Backend,
    tol: Option<f64>,
) -> Result<ClassificationReport> {
    let n = metric.dimension();
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    let tol = tol.unwrap_or_else(|| default_tolerance(backend));
    let points = sample_points(n, spec)?;
    let samples: Vec<SampleClass> = match backend {
        Backend::Jet => points
            .par_iter()
            .enumerate()
            .map(|(i, p)| sample_class_jet(metric, p).map_err(|e| e.at_sample(i, p)))
            .collect::<Result<_>>()?,
        Backend::Fd => {
            let fd = FdPipeline::new(metric);
            points
                .par_iter()
                .enumerate()
                .map(|(i, p)| sample_class_fd(&fd, p).map_err(|e| e.at_sample(i, p)))
                .collect::<Result<_>>()?
        }
    };
    summarize(name, n, spec, backend, tol, samples)
}

fn summarize(
    name: &str,
    n: usize,
    spec: &SamplingSpec,
    backend: Backend,
    tol: f64,
    samples: Vec<SampleClass>,
) -> Result<ClassificationReport> {
    let count = samples.len() as f64;
    let k_mean = samples.iter().map(|s| s.k).sum::<f64>() / count;
    let k_var = samples.iter().map(|s| (s.k - k_mean).powi(2)).sum::<f64>() / count;
    let k_std = k_var.sqrt();
    let std_tol = 1e-6 * (1.0 + k_mean.abs());

    let iso = max_of(samples.iter().map(|s| s.isotropy));
    let c = max_of(samples.iter().map(|s| s.c_norm));
    let mut residuals = BTreeMap::new();
    let crit = |value| Criterion { value, tolerance: tol };
    residuals.insert("isotropy", crit(iso));
    residuals.insert("c_norm", crit(c));
    residuals.insert("k_std", Criterion { value: k_std, tolerance: std_tol });

    let scalar = iso < tol;
    let c_small = c < tol;
    let constant = scalar && c_small;
    if scalar {
        for (key, get) in [
            ("b_norm", (|s: &SampleClass| s.b_norm) as fn(&SampleClass) -> Option<f64>),
            ("a_norm", |s: &SampleClass| s.a_norm),
        ] {
            let vals: Option<Vec<f64>> = samples.iter().map(get).collect();
            if let Some(vals) = vals {
                let m = max_of(vals.into_iter());
                residuals.insert(key, crit(m));
                if (m < tol) != c_small {
                    return Err(Error::InternalInconsistency(format!(
                        "{key} criterion ({m:e}) disagrees with the C criterion ({c:e}) at tolerance {tol:e}"
                    )));
                }
            }
        }
        if constant {
            if k_std >= std_tol {
                return Err(Error::InternalInconsistency(format!(
                    "C vanishes but k varies across samples (stdev {k_std:e})"
                )));
            }
            let d1k: Option<Vec<f64>> = samples.iter().map(|s| s.d1k).collect();
            if let Some(d1k) = d1k {
                let m = max_of(d1k.into_iter());
                residuals.insert("d1k", crit(m));
                if m >= tol {
                    return Err(Error::InternalInconsistency(format!(
                        "C vanishes but the horizontal derivative of k does not ({m:e})"
                    )));
                }
            }
        }
    }
    let verdict = if constant {
        Verdict::Constant
    } else if scalar {
        Verdict::Scalar
    } else {
        Verdict::Generic
    };
    Ok(ClassificationReport {
        metric: name.to_string(),
        dimension: n,
        verdict,
        scope: "at sampled points",
        backend,
        seed: spec.seed,
        count: samples.len(),
        k_mean,
        k_std,
        k_samples: samples
            .iter()
            .map(|s| KSample {
                x: s.point.x().to_vec(),
                y: s.point.y().to_vec(),
                k: s.k,
            })
            .collect(),
        residuals,
    })
}
