//! Dense multi-index arrays with a `(contravariant, covariant)` signature.
//!
//! Components are stored row-major with contravariant indices first, so a
//! `(1,2)` tensor `T^i_{jk}` lives at `data[(i * n + j) * n + k]`. Covariant
//! slot numbers used by the slot operations below count covariant slots only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub contra: usize,
    pub cov: usize,
}

impl Signature {
    pub const fn new(contra: usize, cov: usize) -> Self {
        Signature { contra, cov }
    }

    pub fn rank(&self) -> usize {
        self.contra + self.cov
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    n: usize,
    sig: Signature,
    data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn new(n: usize, sig: Signature, data: Vec<T>) -> Result<Self> {
        let want = n.pow(sig.rank() as u32);
        if data.len() != want {
            return Err(Error::Rank(format!(
                "{} components supplied for a {:?} tensor in dimension {n} (expected {want})",
                data.len(),
                sig
            )));
        }
        Ok(Tensor { n, sig, data })
    }

    pub fn from_fn(n: usize, sig: Signature, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = n.pow(sig.rank() as u32);
        let mut idx = vec![0; sig.rank()];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unravel(flat, n, &mut idx);
            data.push(f(&idx));
        }
        Tensor { n, sig, data }
    }

    pub fn try_from_fn(n: usize, sig: Signature, mut f: impl FnMut(&[usize]) -> Result<T>) -> Result<Self> {
        let len = n.pow(sig.rank() as u32);
        let mut idx = vec![0; sig.rank()];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unravel(flat, n, &mut idx);
            data.push(f(&idx)?);
        }
        Ok(Tensor { n, sig, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn components(&self) -> &[T] {
        &self.data
    }

    pub fn into_components(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.sig.rank());
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn at(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            n: self.n,
            sig: self.sig,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U>(&self, f: impl FnMut(&T) -> Result<U>) -> Result<Tensor<U>> {
        Ok(Tensor {
            n: self.n,
            sig: self.sig,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    fn check_cov_slot(&self, slot: usize) -> Result<usize> {
        if slot >= self.sig.cov {
            return Err(Error::Rank(format!(
                "covariant slot {slot} out of range for signature {:?}",
                self.sig
            )));
        }
        Ok(self.sig.contra + slot)
    }
}

fn unravel(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(n: usize, sig: Signature) -> Self {
        Tensor::from_fn(n, sig, |_| T::zero())
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v.scale(factor))
    }

    pub fn scale_by(&self, factor: &T) -> Self {
        self.map(|v| v.clone() * factor.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch in tensor sum");
        Tensor {
            n: self.n,
            sig: self.sig,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch in tensor difference");
        Tensor {
            n: self.n,
            sig: self.sig,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    /// `out(…, X, …, Y, …) = ω(…, X, …, Y, …) − ω(…, Y, …, X, …)` on covariant slots `a`, `b`.
    pub fn antisymmetrize(&self, a: usize, b: usize) -> Result<Self> {
        let (pa, pb) = (self.check_cov_slot(a)?, self.check_cov_slot(b)?);
        if pa == pb {
            return Err(Error::Rank("antisymmetrization needs two distinct slots".into()));
        }
        let mut swapped = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, self.sig, |idx| {
            swapped.copy_from_slice(idx);
            swapped.swap(pa, pb);
            self.at(idx).clone() - self.at(&swapped).clone()
        }))
    }

    /// Sum over the three cyclic permutations of covariant slots `a`, `b`, `c`.
    pub fn cyclic_sum(&self, a: usize, b: usize, c: usize) -> Result<Self> {
        let p = [self.check_cov_slot(a)?, self.check_cov_slot(b)?, self.check_cov_slot(c)?];
        if p[0] == p[1] || p[1] == p[2] || p[0] == p[2] {
            return Err(Error::Rank("cyclic sum needs three distinct slots".into()));
        }
        let mut i1 = vec![0; self.sig.rank()];
        let mut i2 = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, self.sig, |idx| {
            i1.copy_from_slice(idx);
            i2.copy_from_slice(idx);
            // (X,Y,Z) → (Y,Z,X) → (Z,X,Y)
            i1[p[0]] = idx[p[1]];
            i1[p[1]] = idx[p[2]];
            i1[p[2]] = idx[p[0]];
            i2[p[0]] = idx[p[2]];
            i2[p[1]] = idx[p[0]];
            i2[p[2]] = idx[p[1]];
            self.at(idx).clone() + self.at(&i1).clone() + self.at(&i2).clone()
        }))
    }

    /// Reorders covariant slots: `out(j₀, …, j_{s−1}) = ω(j_{p₀}, …, j_{p_{s−1}})`.
    pub fn permute_cov(&self, p: &[usize]) -> Result<Self> {
        let s = self.sig.cov;
        let mut seen = vec![false; s];
        if p.len() != s || p.iter().any(|&k| k >= s || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Rank(format!("{p:?} is not a permutation of {s} covariant slots")));
        }
        let r = self.sig.contra;
        let mut src = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, self.sig, |idx| {
            src[..r].copy_from_slice(&idx[..r]);
            for (k, &pk) in p.iter().enumerate() {
                src[r + k] = idx[r + pk];
            }
            self.at(&src).clone()
        }))
    }

    /// Inserts vector `v` into covariant slot `slot`, removing that slot.
    pub fn contract_cov(&self, slot: usize, v: &[T]) -> Result<Self> {
        let pos = self.check_cov_slot(slot)?;
        let sig = Signature::new(self.sig.contra, self.sig.cov - 1);
        let mut full = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, sig, |idx| {
            full[..pos].copy_from_slice(&idx[..pos]);
            full[pos + 1..].copy_from_slice(&idx[pos..]);
            let mut acc = T::zero();
            for (m, vm) in v.iter().enumerate() {
                full[pos] = m;
                acc = acc + self.at(&full).clone() * vm.clone();
            }
            acc
        }))
    }

    /// Applies the `(1,1)` tensor `phi` to the contravariant slot `slot`:
    /// `out^{…i…} = φ^i_m ω^{…m…}`.
    pub fn apply_contra(&self, slot: usize, phi: &Tensor<T>) -> Result<Self> {
        if slot >= self.sig.contra || phi.sig != Signature::new(1, 1) {
            return Err(Error::Rank(format!(
                "cannot apply a {:?} map to contravariant slot {slot} of {:?}",
                phi.sig, self.sig
            )));
        }
        let mut src = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, self.sig, |idx| {
            src.copy_from_slice(idx);
            let mut acc = T::zero();
            for m in 0..self.n {
                src[slot] = m;
                acc = acc + phi.at(&[idx[slot], m]).clone() * self.at(&src).clone();
            }
            acc
        }))
    }

    /// Precomposes covariant slot `slot` with `phi`: `out_{…j…} = ω_{…m…} φ^m_j`.
    pub fn compose_cov(&self, slot: usize, phi: &Tensor<T>) -> Result<Self> {
        let pos = self.check_cov_slot(slot)?;
        if phi.sig != Signature::new(1, 1) {
            return Err(Error::Rank(format!("expected a (1,1) map, got {:?}", phi.sig)));
        }
        let mut src = vec![0; self.sig.rank()];
        Ok(Tensor::from_fn(self.n, self.sig, |idx| {
            src.copy_from_slice(idx);
            let mut acc = T::zero();
            for m in 0..self.n {
                src[pos] = m;
                acc = acc + self.at(&src).clone() * phi.at(&[m, idx[pos]]).clone();
            }
            acc
        }))
    }

    /// `out_{…, w} = g_{iw} ω^{i}_{…}` for a `(1,s)` tensor: lowers the index into the last slot.
    pub fn lower_into_last(&self, g: &Tensor<T>) -> Result<Self> {
        if self.sig.contra != 1 || g.sig != Signature::new(0, 2) {
            return Err(Error::Rank(format!("cannot lower a {:?} tensor", self.sig)));
        }
        let s = self.sig.cov;
        let mut src = vec![0; s + 1];
        Ok(Tensor::from_fn(self.n, Signature::new(0, s + 1), |idx| {
            src[1..].copy_from_slice(&idx[..s]);
            let w = idx[s];
            let mut acc = T::zero();
            for i in 0..self.n {
                src[0] = i;
                acc = acc + g.at(&[i, w]).clone() * self.at(&src).clone();
            }
            acc
        }))
    }

    /// Tensor product, slots of `self` first within each variance group.
    pub fn outer(&self, other: &Self) -> Self {
        let sig = Signature::new(self.sig.contra + other.sig.contra, self.sig.cov + other.sig.cov);
        let (r1, s1) = (self.sig.contra, self.sig.cov);
        let r2 = other.sig.contra;
        let mut a = vec![0; self.sig.rank()];
        let mut b = vec![0; other.sig.rank()];
        Tensor::from_fn(self.n, sig, |idx| {
            a[..r1].copy_from_slice(&idx[..r1]);
            b[..r2].copy_from_slice(&idx[r1..r1 + r2]);
            a[r1..].copy_from_slice(&idx[r1 + r2..r1 + r2 + s1]);
            b[r2..].copy_from_slice(&idx[r1 + r2 + s1..]);
            self.at(&a).clone() * other.at(&b).clone()
        })
    }
}

impl Tensor<f64> {
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
