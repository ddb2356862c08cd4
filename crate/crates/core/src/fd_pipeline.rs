//! Finite-difference evaluation of the connection and curvature pipeline.
//!
//! Shares no derivative code with the jet backend: every derivative is a
//! Richardson-extrapolated central difference of plain `f64` evaluations of
//! `L`, nested through the spray, and linear algebra goes through `nalgebra`.
//! Used as an oracle for the jet pipeline and as the `fd` backend.

use nalgebra::DMatrix;

use crate::berwald::StructuralParts;
use crate::diff::richardson_partial;
use crate::error::{Error, Result};
use crate::geometry::{check_positive_definite, SamplePoint};
use crate::metric::FinslerMetric;
use crate::residual::relative;
use crate::tensor::{Signature, Tensor};

/// Relative accuracy assumed for spray values when differencing them again.
const SPRAY_NOISE: f64 = 1e-9;
/// Relative accuracy assumed for `k` values when differencing them again.
const K_NOISE: f64 = 1e-6;

/// Connection and curvature at one point, by finite differences.
#[derive(Debug, Clone)]
pub struct FdGeometry {
    pub l: f64,
    pub g: Tensor<f64>,
    pub g_inv: Tensor<f64>,
    pub phi: Tensor<f64>,
    pub spray: Tensor<f64>,
    pub nonlinear: Tensor<f64>,
    pub berwald: Tensor<f64>,
    pub rhat: Tensor<f64>,
    pub deviation: Tensor<f64>,
    pub k: f64,
}

impl FdGeometry {
    /// `‖H − kL²φ‖ / max(‖H‖, L²)`.
    pub fn isotropy(&self) -> f64 {
        let iso = self.phi.scale(self.k * self.l * self.l);
        relative(&self.deviation.sub(&iso), &[&self.deviation], self.l * self.l)
    }
}

/// Finite-difference pipeline with relative steps `step` for derivatives of
/// `L` and `outer_step` for derivatives of derived quantities.
#[derive(Debug, Clone)]
pub struct FdPipeline<M> {
    metric: M,
    step: f64,
    outer_step: f64,
}

impl<M: FinslerMetric> FdPipeline<M> {
    pub fn new(metric: M) -> Self {
        Self::with_steps(metric, 1e-3, 1e-2)
    }

    pub fn with_steps(metric: M, step: f64, outer_step: f64) -> Self {
        FdPipeline {
            metric,
            step,
            outer_step,
        }
    }

    fn n(&self) -> usize {
        self.metric.dimension()
    }

    fn stack(&self, p: &SamplePoint) -> Result<Vec<f64>> {
        self.metric.check_point(p)?;
        Ok(p.x().iter().chain(p.y()).copied().collect())
    }

    fn l_at(&self, z: &[f64]) -> Result<f64> {
        let n = self.n();
        let l: f64 = self.metric.eval(&z[..n], &z[n..])?;
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("L at {z:?}")));
        }
        Ok(l)
    }

    fn l_partial(&self, z: &[f64], vars: &[usize]) -> Result<f64> {
        let f = |z: &[f64]| Ok(vec![self.l_at(z)?]);
        Ok(richardson_partial(&f, z, vars, self.step, f64::EPSILON)?[0])
    }

    fn e_partial(&self, z: &[f64], vars: &[usize]) -> Result<f64> {
        let f = |z: &[f64]| Ok(vec![0.5 * self.l_at(z)?.powi(2)]);
        Ok(richardson_partial(&f, z, vars, self.step, f64::EPSILON)?[0])
    }

    fn metric_at(&self, z: &[f64]) -> Result<Tensor<f64>> {
        let n = self.n();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.e_partial(z, &[n + i, n + j])?;
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        let g = Tensor::new(n, Signature::new(0, 2), g)?;
        check_positive_definite(&g)?;
        Ok(g)
    }

    fn inverse(g: &Tensor<f64>) -> Result<Tensor<f64>> {
        let n = g.dim();
        let m = DMatrix::from_row_slice(n, n, g.components());
        let inv = m.try_inverse().ok_or(Error::DegenerateMetric {
            min_eigenvalue: 0.0,
            max_eigenvalue: f64::NAN,
        })?;
        Tensor::new(n, Signature::new(2, 0), inv.transpose().as_slice().to_vec())
    }

    fn spray_at(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let g_inv = Self::inverse(&self.metric_at(z)?)?;
        let mut rhs = Vec::with_capacity(n);
        for h in 0..n {
            let mut acc = -self.e_partial(z, &[h])?;
            for k in 0..n {
                acc += z[n + k] * self.e_partial(z, &[k, n + h])?;
            }
            rhs.push(acc);
        }
        Ok((0..n)
            .map(|i| 0.5 * (0..n).map(|h| g_inv.at(&[i, h]) * rhs[h]).sum::<f64>())
            .collect())
    }

    fn spray_partial(&self, z: &[f64], vars: &[usize]) -> Result<Vec<f64>> {
        let f = |z: &[f64]| self.spray_at(z);
        richardson_partial(&f, z, vars, self.outer_step, SPRAY_NOISE)
    }

    fn geometry_at(&self, z: &[f64]) -> Result<FdGeometry> {
        let n = self.n();
        let y = &z[n..];
        let l = self.l_at(z)?;
        let g = self.metric_at(z)?;
        let g_inv = Self::inverse(&g)?;
        let spray = Tensor::new(n, Signature::new(1, 0), self.spray_at(z)?)?;

        let mut nl = Tensor::zeros(n, Signature::new(1, 1)).into_components();
        for j in 0..n {
            let d = self.spray_partial(z, &[n + j])?;
            for i in 0..n {
                nl[i * n + j] = d[i];
            }
        }
        let nonlinear = Tensor::new(n, Signature::new(1, 1), nl)?;

        let mut gamma = vec![0.0; n * n * n];
        for j in 0..n {
            for k in j..n {
                let d = self.spray_partial(z, &[n + j, n + k])?;
                for i in 0..n {
                    gamma[(i * n + j) * n + k] = d[i];
                    gamma[(i * n + k) * n + j] = d[i];
                }
            }
        }
        let berwald = Tensor::new(n, Signature::new(1, 2), gamma)?;

        // ∂N^i_j/∂x^k
        let mut dxn = vec![0.0; n * n * n];
        for j in 0..n {
            for k in 0..n {
                let d = self.spray_partial(z, &[k, n + j])?;
                for i in 0..n {
                    dxn[(i * n + j) * n + k] = d[i];
                }
            }
        }
        let delta_n = Tensor::from_fn(n, Signature::new(1, 2), |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            dxn[(i * n + j) * n + k]
                - (0..n).map(|m| nonlinear.at(&[m, k]) * berwald.at(&[i, j, m])).sum::<f64>()
        });
        let rhat = delta_n.antisymmetrize(0, 1)?;
        let deviation = rhat.contract_cov(0, y)?;
        let trace: f64 = (0..n).map(|i| deviation.at(&[i, i])).sum();
        let k = trace / ((n - 1) as f64 * l * l);

        let ell: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g.at(&[i, j]) * y[j]).sum::<f64>() / l)
            .collect();
        let phi = Tensor::from_fn(n, Signature::new(1, 1), |ij| {
            let delta = if ij[0] == ij[1] { 1.0 } else { 0.0 };
            delta - y[ij[0]] * ell[ij[1]] / l
        });
        Ok(FdGeometry {
            l,
            g,
            g_inv,
            phi,
            spray,
            nonlinear,
            berwald,
            rhat,
            deviation,
            k,
        })
    }

    pub fn geometry(&self, p: &SamplePoint) -> Result<FdGeometry> {
        self.geometry_at(&self.stack(p)?)
    }

    /// `C = L ∂k/∂y`.
    pub fn tensor_c(&self, p: &SamplePoint) -> Result<Tensor<f64>> {
        let z = self.stack(p)?;
        let n = self.n();
        let l = self.l_at(&z)?;
        let f = |z: &[f64]| Ok(vec![self.geometry_at(z)?.k]);
        Tensor::try_from_fn(n, Signature::new(0, 1), |i| {
            Ok(l * richardson_partial(&f, &z, &[n + i[0]], self.outer_step, K_NOISE)?[0])
        })
    }

    /// Inputs of the structural identities, with every derivative of `L`
    /// taken by finite differences.
    pub fn structural_parts(&self, p: &SamplePoint) -> Result<StructuralParts> {
        let z = self.stack(p)?;
        let n = self.n();
        let geo = self.geometry_at(&z)?;
        let y = p.y();
        let l = geo.l;
        let ell = Tensor::from_fn(n, Signature::new(0, 1), |i| {
            (0..n).map(|j| geo.g.at(&[i[0], j]) * y[j]).sum::<f64>() / l
        });
        let hbar = Tensor::from_fn(n, Signature::new(0, 2), |ij| {
            geo.g.at(ij) - ell.at(&[ij[0]]) * ell.at(&[ij[1]])
        });
        let dl_x = Tensor::try_from_fn(n, Signature::new(0, 1), |i| self.l_partial(&z, &[i[0]]))?;
        let dl_v = Tensor::try_from_fn(n, Signature::new(0, 1), |i| self.l_partial(&z, &[n + i[0]]))?;
        // ℓ_i = ∂L/∂yⁱ, differentiated once more.
        let dell_x = Tensor::try_from_fn(n, Signature::new(0, 2), |ik| self.l_partial(&z, &[ik[1], n + ik[0]]))?;
        let dell_v =
            Tensor::try_from_fn(n, Signature::new(0, 2), |ic| self.l_partial(&z, &[n + ik_sorted(ic).0, n + ik_sorted(ic).1]))?;
        let nl = &geo.nonlinear;
        let dl_h = Tensor::from_fn(n, Signature::new(0, 1), |k| {
            dl_x.at(k) - (0..n).map(|m| nl.at(&[m, k[0]]) * dl_v.at(&[m])).sum::<f64>()
        });
        let dell_h = Tensor::from_fn(n, Signature::new(0, 2), |ik| {
            let (i, k) = (ik[0], ik[1]);
            dell_x.at(ik)
                - (0..n).map(|m| nl.at(&[m, k]) * dell_v.at(&[i, m])).sum::<f64>()
                - (0..n).map(|m| geo.berwald.at(&[m, i, k]) * dl_v.at(&[m])).sum::<f64>()
        });
        // ∂φ^i_j/∂y^c by the product rule on φ = δ − y ⊗ ∂L/∂y / L.
        let dphi_v = Tensor::from_fn(n, Signature::new(1, 2), |idx| {
            let (i, j, c) = (idx[0], idx[1], idx[2]);
            let delta = if i == c { 1.0 } else { 0.0 };
            -delta * dl_v.at(&[j]) / l - y[i] * dell_v.at(&[j, c]) / l + y[i] * dl_v.at(&[j]) * dl_v.at(&[c]) / (l * l)
        });
        Ok(StructuralParts {
            y: y.to_vec(),
            l,
            ell,
            phi: geo.phi,
            hbar,
            dl_x,
            dl_h,
            dell_x,
            dell_h,
            dl_v,
            dell_v,
            dphi_v,
        })
    }
}

fn ik_sorted(ic: &[usize]) -> (usize, usize) {
    (ic[0].min(ic[1]), ic[0].max(ic[1]))
}
