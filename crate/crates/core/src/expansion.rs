//! Local Taylor expansion of the whole Berwald pipeline about one sample point.
//!
//! `L` is expanded as a [`Jet`] in `(x, y)`; every derived quantity (`g`, `g⁻¹`,
//! `G`, `N`, `Γ`, `R̂`, `H`, `k`, `C`, `B`, `A`, …) is then computed as a germ
//! by truncated polynomial arithmetic, so vertical and horizontal covariant
//! derivatives are exact polynomial derivatives rather than re-evaluations.
//!
//! The expansion order fixes how deep the pipeline can go. Each accessor needs
//! a minimum order; asking for more than the order supports yields
//! [`Error::OrderUnsupported`].
//!
//! Slot convention: covariant derivatives append the differentiation slot
//! LAST, i.e. `(D²T)_{…c} = ∂T_{…}/∂y^c`. The written form `(D²T)(X, …)`
//! with the direction first corresponds to our `DT[…, X]`.

use std::cell::OnceCell;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{check_positive_definite, project, SamplePoint, StructuralFrame, TensorValue};
use crate::jet::{Jet, JetSpace};
use crate::metric::FinslerMetric;
use crate::scalar::Scalar;
use crate::tensor::{Signature, Tensor};

/// Truncation box `(deg_x ≤ x, deg_y ≤ y)` of the expansion of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionOrder {
    pub x: u8,
    pub y: u8,
}

impl ExpansionOrder {
    pub const fn new(x: u8, y: u8) -> Self {
        ExpansionOrder { x, y }
    }

    /// `g`, `ℓ`, `φ`, `ħ`.
    pub const FRAME: Self = Self::new(0, 2);
    /// `G`, `N`, `Γ`, `D¹L`, `D¹ℓ`, `D²φ`.
    pub const CONNECTION: Self = Self::new(1, 4);
    /// `R̂`, `H`, `k`, `C`, `R`, `D²H`.
    pub const CURVATURE: Self = Self::new(2, 5);
    /// Everything vertical: `B`, `A`, `D²C`, `D²B`.
    pub const VERTICAL: Self = Self::new(2, 7);
    /// Horizontal derivatives of curvature: `D¹R̂`, `D¹k`.
    pub const HORIZONTAL: Self = Self::new(3, 5);
}

fn cached<'a, T>(cell: &'a OnceCell<T>, f: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

pub fn values(t: &Tensor<Jet>) -> Tensor<f64> {
    t.map(|j| j.value())
}

fn scalar_tensor(n: usize, v: Jet) -> Tensor<Jet> {
    Tensor::from_fn(n, Signature::new(0, 0), |_| v.clone())
}

/// Germs of the Berwald pipeline at one point of the slit tangent bundle.
pub struct LocalExpansion {
    point: SamplePoint,
    order: ExpansionOrder,
    n: usize,
    x: Vec<Jet>,
    y: Vec<Jet>,
    l: Jet,
    e_y: Vec<Jet>,
    e: Jet,
    g: Tensor<Jet>,
    g_inv: Tensor<Jet>,
    ell: Tensor<Jet>,
    phi: Tensor<Jet>,
    hbar: Tensor<Jet>,
    spray: OnceCell<Tensor<Jet>>,
    nonlinear: OnceCell<Tensor<Jet>>,
    berwald: OnceCell<Tensor<Jet>>,
    rhat: OnceCell<Tensor<Jet>>,
    deviation: OnceCell<Tensor<Jet>>,
    k: OnceCell<Jet>,
    c: OnceCell<Tensor<Jet>>,
    b: OnceCell<Tensor<Jet>>,
    a: OnceCell<Tensor<Jet>>,
    h_curvature: OnceCell<Tensor<Jet>>,
}

impl LocalExpansion {
    pub fn new<M: FinslerMetric>(metric: &M, point: &SamplePoint, order: ExpansionOrder) -> Result<Self> {
        metric.check_point(point)?;
        if order.y < 2 {
            return Err(Error::OrderUnsupported {
                requested: (0, 2),
                available: (order.x as usize, order.y as usize),
            });
        }
        let n = point.dim();
        let space: Arc<JetSpace> = JetSpace::get(n, order.x, order.y);
        let x: Vec<Jet> = (0..n).map(|i| Jet::variable_x(&space, i, point.x()[i])).collect();
        let y: Vec<Jet> = (0..n).map(|i| Jet::variable_y(&space, i, point.y()[i])).collect();
        let l = metric.eval(&x, &y)?;
        let lv = l.value();
        if !lv.is_finite() || lv <= 0.0 {
            return Err(Error::NonFinite(format!(
                "fundamental function must be positive and finite, got L = {lv} at {point:?}"
            )));
        }
        let e = l.square().scale(0.5);
        let e_y: Vec<Jet> = (0..n).map(|i| e.d_y(i)).collect::<Result<_>>()?;
        let mut gd: Vec<Option<Jet>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let gij = e_y[i].d_y(j)?;
                gd[j * n + i] = Some(gij.clone());
                gd[i * n + j] = Some(gij);
            }
        }
        let g = Tensor::new(n, Signature::new(0, 2), gd.into_iter().map(Option::unwrap).collect())?;
        check_positive_definite(&values(&g))?;
        let g_inv = invert(&g)?;
        let inv_l = l.recip();
        let ell = Tensor::from_fn(n, Signature::new(0, 1), |i| {
            let mut acc = Jet::constant(0.0);
            for j in 0..n {
                acc = acc + g.at(&[i[0], j]).clone() * y[j].clone();
            }
            acc * inv_l.clone()
        });
        let phi = Tensor::from_fn(n, Signature::new(1, 1), |ij| {
            let delta = if ij[0] == ij[1] { 1.0 } else { 0.0 };
            (-(y[ij[0]].clone() * ell.at(&[ij[1]]).clone() * inv_l.clone())).add_f64(delta)
        });
        let hbar = Tensor::from_fn(n, Signature::new(0, 2), |ij| {
            g.at(ij).clone() - ell.at(&[ij[0]]).clone() * ell.at(&[ij[1]]).clone()
        });
        Ok(LocalExpansion {
            point: point.clone(),
            order,
            n,
            x,
            y,
            l,
            e_y,
            e,
            g,
            g_inv,
            ell,
            phi,
            hbar,
            spray: OnceCell::new(),
            nonlinear: OnceCell::new(),
            berwald: OnceCell::new(),
            rhat: OnceCell::new(),
            deviation: OnceCell::new(),
            k: OnceCell::new(),
            c: OnceCell::new(),
            b: OnceCell::new(),
            a: OnceCell::new(),
            h_curvature: OnceCell::new(),
        })
    }

    pub fn point(&self) -> &SamplePoint {
        &self.point
    }

    pub fn order(&self) -> ExpansionOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The base coordinates `xⁱ` as germs.
    pub fn base(&self) -> &[Jet] {
        &self.x
    }

    /// The fibre coordinates `yⁱ` as germs (the fundamental vector `η`).
    pub fn eta(&self) -> &[Jet] {
        &self.y
    }

    pub fn l(&self) -> &Jet {
        &self.l
    }

    pub fn energy(&self) -> &Jet {
        &self.e
    }

    pub fn g(&self) -> &Tensor<Jet> {
        &self.g
    }

    pub fn g_inv(&self) -> &Tensor<Jet> {
        &self.g_inv
    }

    pub fn ell(&self) -> &Tensor<Jet> {
        &self.ell
    }

    pub fn phi(&self) -> &Tensor<Jet> {
        &self.phi
    }

    pub fn hbar(&self) -> &Tensor<Jet> {
        &self.hbar
    }

    /// Pointwise value of a germ tensor, anchored at this expansion's point.
    pub fn value_of(&self, t: &Tensor<Jet>) -> TensorValue {
        TensorValue::new(self.point.clone(), values(t)).expect("germ dimension matches point")
    }

    pub fn value_of_f64(&self, t: Tensor<f64>) -> TensorValue {
        TensorValue::new(self.point.clone(), t).expect("tensor dimension matches point")
    }

    pub fn frame(&self) -> Result<StructuralFrame> {
        Ok(StructuralFrame {
            l: self.l.value(),
            g: self.value_of(&self.g),
            g_inv: self.value_of(&self.g_inv),
            ell: self.value_of(&self.ell),
            phi: self.value_of(&self.phi),
            hbar: self.value_of(&self.hbar),
        })
    }

    /// Spray coefficients `Gⁱ = ½ g^{ih} (y^k ∂²E/∂y^h∂x^k − ∂E/∂x^h)`, `E = ½L²`.
    pub fn spray(&self) -> Result<&Tensor<Jet>> {
        cached(&self.spray, || {
            let n = self.n;
            let mut rhs = Vec::with_capacity(n);
            for h in 0..n {
                let mut acc = -self.e.d_x(h)?;
                for k in 0..n {
                    acc = acc + self.y[k].clone() * self.e_y[h].d_x(k)?;
                }
                rhs.push(acc);
            }
            Ok(Tensor::from_fn(n, Signature::new(1, 0), |i| {
                let mut acc = Jet::constant(0.0);
                for (h, r) in rhs.iter().enumerate() {
                    acc = acc + self.g_inv.at(&[i[0], h]).clone() * r.clone();
                }
                acc.scale(0.5)
            }))
        })
    }

    /// `N^i_j = ∂Gⁱ/∂y^j`.
    pub fn nonlinear(&self) -> Result<&Tensor<Jet>> {
        cached(&self.nonlinear, || {
            let spray = self.spray()?;
            Tensor::try_from_fn(self.n, Signature::new(1, 1), |ij| spray.at(&[ij[0]]).d_y(ij[1]))
        })
    }

    /// Berwald coefficients `Γ^i_{jk} = ∂²Gⁱ/∂y^j∂y^k`.
    pub fn berwald(&self) -> Result<&Tensor<Jet>> {
        cached(&self.berwald, || self.v_deriv(self.nonlinear()?))
    }

    /// Vertical covariant derivative: componentwise `∂/∂y^c`, new slot last.
    pub fn v_deriv(&self, t: &Tensor<Jet>) -> Result<Tensor<Jet>> {
        let sig = t.signature();
        let rank = sig.rank();
        Tensor::try_from_fn(self.n, Signature::new(sig.contra, sig.cov + 1), |idx| {
            t.at(&idx[..rank]).d_y(idx[rank])
        })
    }

    /// Componentwise `∂/∂x^c`, new slot last.
    fn x_deriv(&self, t: &Tensor<Jet>) -> Result<Tensor<Jet>> {
        let sig = t.signature();
        let rank = sig.rank();
        Tensor::try_from_fn(self.n, Signature::new(sig.contra, sig.cov + 1), |idx| {
            t.at(&idx[..rank]).d_x(idx[rank])
        })
    }

    /// Horizontal covariant derivative of the Berwald connection, new slot last:
    /// `δ_c T + Γ^i_{mc} T^{…m…} − Γ^m_{jc} T_{…m…}` with `δ_c = ∂_{x^c} − N^m_c ∂_{y^m}`.
    pub fn h_deriv(&self, t: &Tensor<Jet>) -> Result<Tensor<Jet>> {
        let n = self.n;
        let sig = t.signature();
        let rank = sig.rank();
        let nl = self.nonlinear()?;
        let gamma = self.berwald()?;
        let vt = self.v_deriv(t)?;
        let xt = self.x_deriv(t)?;
        let mut src = vec![0; rank];
        let mut vidx = vec![0; rank + 1];
        Ok(Tensor::from_fn(n, Signature::new(sig.contra, sig.cov + 1), |idx| {
            let c = idx[rank];
            let mut acc = xt.at(idx).clone();
            vidx[..rank].copy_from_slice(&idx[..rank]);
            for m in 0..n {
                vidx[rank] = m;
                acc = acc - nl.at(&[m, c]).clone() * vt.at(&vidx).clone();
            }
            for slot in 0..rank {
                let contra = slot < sig.contra;
                for m in 0..n {
                    src.copy_from_slice(&idx[..rank]);
                    src[slot] = m;
                    if contra {
                        acc = acc + gamma.at(&[idx[slot], m, c]).clone() * t.at(&src).clone();
                    } else {
                        acc = acc - gamma.at(&[m, idx[slot], c]).clone() * t.at(&src).clone();
                    }
                }
            }
            acc
        }))
    }

    pub fn h_deriv_scalar(&self, f: &Jet) -> Result<Tensor<Jet>> {
        self.h_deriv(&scalar_tensor(self.n, f.clone()))
    }

    pub fn v_deriv_scalar(&self, f: &Jet) -> Result<Tensor<Jet>> {
        self.v_deriv(&scalar_tensor(self.n, f.clone()))
    }

    /// `(v)h`-torsion `R̂^i_{jk} = δ_k N^i_j − δ_j N^i_k`.
    pub fn vh_torsion(&self) -> Result<&Tensor<Jet>> {
        cached(&self.rhat, || {
            let n = self.n;
            let nl = self.nonlinear()?;
            let gamma = self.berwald()?;
            let delta_n = Tensor::try_from_fn(n, Signature::new(1, 2), |idx| {
                let (i, j, k) = (idx[0], idx[1], idx[2]);
                let mut acc = nl.at(&[i, j]).d_x(k)?;
                for m in 0..n {
                    acc = acc - nl.at(&[m, k]).clone() * gamma.at(&[i, j, m]).clone();
                }
                Ok(acc)
            })?;
            delta_n.antisymmetrize(0, 1)
        })
    }

    /// Deviation tensor `H^i_j = y^k R̂^i_{kj}`.
    pub fn deviation(&self) -> Result<&Tensor<Jet>> {
        cached(&self.deviation, || self.vh_torsion()?.contract_cov(0, &self.y))
    }

    /// `k = tr H / ((n − 1) L²)`.
    pub fn scalar_k(&self) -> Result<&Jet> {
        cached(&self.k, || {
            let h = self.deviation()?;
            let mut tr = Jet::constant(0.0);
            for i in 0..self.n {
                tr = tr + h.at(&[i, i]).clone();
            }
            Ok(tr / self.l.square().scale((self.n - 1) as f64))
        })
    }

    /// `C = L · D²k`.
    pub fn tensor_c(&self) -> Result<&Tensor<Jet>> {
        cached(&self.c, || Ok(self.v_deriv_scalar(self.scalar_k()?)?.scale_by(&self.l)))
    }

    /// `B(X,Y) = L (P·D²C)(X,Y)`.
    pub fn tensor_b(&self) -> Result<&Tensor<Jet>> {
        cached(&self.b, || {
            let dc = self.v_deriv(self.tensor_c()?)?;
            Ok(project(&dc, &self.phi)?.permute_cov(&[1, 0])?.scale_by(&self.l))
        })
    }

    /// `A(X,Y,Z) = L (P·D²B)(X,Y,Z)`.
    pub fn tensor_a(&self) -> Result<&Tensor<Jet>> {
        cached(&self.a, || {
            let db = self.v_deriv(self.tensor_b()?)?;
            Ok(project(&db, &self.phi)?.permute_cov(&[1, 2, 0])?.scale_by(&self.l))
        })
    }

    /// h-curvature `R^i_{abc}` = `R(e_a, e_b) e_c` = `∂R̂^i_{ab}/∂y^c`.
    pub fn h_curvature(&self) -> Result<&Tensor<Jet>> {
        cached(&self.h_curvature, || self.v_deriv(self.vh_torsion()?))
    }
}

/// Gauss–Jordan inversion over germs, pivoting on base-point values.
fn invert(m: &Tensor<Jet>) -> Result<Tensor<Jet>> {
    let n = m.dim();
    let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| m.at(&[i, j]).clone()).collect()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].value().abs().total_cmp(&a[q][col].value().abs()))
            .unwrap_or(col);
        if a[pivot][col].value() == 0.0 {
            return Err(Error::DegenerateMetric {
                min_eigenvalue: 0.0,
                max_eigenvalue: f64::NAN,
            });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p_inv = a[col][col].recip();
        for j in 0..n {
            inv[col][j] = inv[col][j].clone() * p_inv.clone();
            if j > col {
                a[col][j] = a[col][j].clone() * p_inv.clone();
            }
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col].clone();
            if f.is_constant() && f.value() == 0.0 {
                continue;
            }
            for j in col + 1..n {
                a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
            }
            for j in 0..n {
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Tensor::new(n, Signature::new(2, 0), inv.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn germ_inverse_is_inverse() {
        let space = JetSpace::get(2, 1, 3);
        let y0 = Jet::variable_y(&space, 0, 1.2);
        let x1 = Jet::variable_x(&space, 1, 0.3);
        let m = Tensor::new(
            2,
            Signature::new(0, 2),
            vec![
                y0.clone() * y0.clone() + Jet::constant(1.0),
                x1.clone(),
                x1.clone(),
                y0.exp(),
            ],
        )
        .unwrap();
        let inv = invert(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Jet::constant(0.0);
                for k in 0..2 {
                    acc = acc + m.at(&[i, k]).clone() * inv.at(&[k, j]).clone();
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - want).abs() < 1e-14);
                for d in 0..2 {
                    assert!(acc.partial(&[], &[0, 0][..d + 1]).unwrap().abs() < 1e-12);
                }
                assert!(acc.partial(&[1], &[0]).unwrap().abs() < 1e-12);
            }
        }
    }
}
