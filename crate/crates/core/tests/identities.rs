mod common;

use common::catalog;
use finsler_core::berwald::{h_cov_deriv, lemma21_residuals, v_cov_deriv, TensorField};
use finsler_core::catalog::{euclidean, funk, perturbed_riemannian, randers_pflat, riemannian_space_form};
use finsler_core::curvature::{bianchi_residual, h_curvature, universal_residuals};
use finsler_core::geometry::structural_frame;
use finsler_core::sampling::sample_points;
use finsler_core::scalar_class::{
    d1k_from, extract_k, lemma22_residuals, lemma23_residuals, lemma31_residuals, prop21_from, tensor_b, tensor_c,
    tensor_nf, theorem21_residuals, corollary21_residuals, corollary31_residual,
};
use finsler_core::{
    ExpansionOrder, FinslerMetric, LocalExpansion, Result, SamplePoint, SamplingSpec, Scalar, Signature, Tensor,
};

fn points(count: usize, seed: u64) -> Vec<SamplePoint> {
    sample_points(3, &SamplingSpec::new(count, seed)).unwrap()
}

/// `L` as a rank-zero field.
struct FundamentalField<'a, M>(&'a M);

impl<M: FinslerMetric> TensorField for FundamentalField<'_, M> {
    fn signature(&self) -> Signature {
        Signature::new(0, 0)
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<Tensor<S>> {
        Tensor::new(x.len(), Signature::new(0, 0), vec![self.0.eval(x, y)?])
    }
}

/// A field depending on `x` only.
struct XOnly;

impl TensorField for XOnly {
    fn signature(&self) -> Signature {
        Signature::new(1, 1)
    }
    fn eval<S: Scalar>(&self, x: &[S], _y: &[S]) -> Result<Tensor<S>> {
        Tensor::try_from_fn(x.len(), Signature::new(1, 1), |ij| Ok(x[ij[0]].clone() * x[ij[1]].sin()))
    }
}

/// A field with constant components.
struct Constant;

impl TensorField for Constant {
    fn signature(&self) -> Signature {
        Signature::new(0, 2)
    }
    fn eval<S: Scalar>(&self, x: &[S], _y: &[S]) -> Result<Tensor<S>> {
        Ok(Tensor::from_fn(x.len(), Signature::new(0, 2), |ij| S::from_f64((ij[0] + 2 * ij[1]) as f64)))
    }
}

#[test]
fn structural_identities_on_every_catalog_metric() {
    for metric in catalog() {
        for p in points(20, 31) {
            for r in lemma21_residuals(&metric, &p).unwrap() {
                assert!(r.value < 1e-7, "{}: {} = {:e}", metric.name(), r.identity, r.value);
            }
        }
    }
}

#[test]
fn covariant_derivatives_of_l() {
    for metric in catalog() {
        for p in points(5, 32) {
            let d1 = h_cov_deriv(&metric, &FundamentalField(&metric), &p).unwrap();
            assert!(d1.tensor().frobenius() < 1e-12, "{}", metric.name());
            let d2 = v_cov_deriv(&metric, &FundamentalField(&metric), &p).unwrap();
            let ell = structural_frame(&metric, &p).unwrap().ell;
            assert!(d2.tensor().sub(ell.tensor()).frobenius() < 1e-13, "{}", metric.name());
        }
    }
}

#[test]
fn trivial_covariant_derivatives() {
    let p = SamplePoint::new(vec![0.2, -0.1, 0.3], vec![1.0, 0.5, -0.4]).unwrap();
    assert_eq!(h_cov_deriv(&euclidean(3), &Constant, &p).unwrap().tensor().frobenius(), 0.0);
    assert_eq!(v_cov_deriv(&funk(3), &XOnly, &p).unwrap().tensor().frobenius(), 0.0);
}

#[test]
fn euclidean_curvature_blocks_vanish() {
    for p in points(10, 33) {
        let b = h_curvature(&euclidean(3), &p).unwrap();
        assert!(b.rhat.tensor().max_abs() < 1e-12);
        assert!(b.h.tensor().max_abs() < 1e-12);
        assert!(b.r.tensor().max_abs() < 1e-12);
        assert!(extract_k(&euclidean(3), &p).unwrap().abs() < 1e-12);
        let (nt, f) = tensor_nf(&euclidean(3), &p).unwrap();
        assert!(nt.tensor().max_abs() < 1e-12 && f.tensor().max_abs() < 1e-12);
        assert!(bianchi_residual(&euclidean(3), &p).unwrap() == 0.0);
    }
}

#[test]
fn universal_identities_hold_on_the_non_scalar_control() {
    let metric = perturbed_riemannian(3, 1);
    for p in points(20, 34) {
        let exp = LocalExpansion::new(&metric, &p, ExpansionOrder::CURVATURE).unwrap();
        for r in universal_residuals(&exp).unwrap() {
            assert!(r.value < 1e-6, "{} = {:e}", r.identity, r.value);
        }
        assert!(bianchi_residual(&metric, &p).unwrap() < 1e-6);
    }
}

#[test]
fn bianchi_cyclic_sum_vanishes_on_funk_and_sphere() {
    for metric in [funk(3), riemannian_space_form(3, 1.0)] {
        for p in points(20, 35) {
            assert!(bianchi_residual(&metric, &p).unwrap() < 1e-6, "{}", metric.name());
        }
    }
}

#[test]
fn sphere_satisfies_constant_curvature_forms() {
    let kappa = 1.0;
    let metric = riemannian_space_form(3, kappa);
    for p in points(10, 36) {
        let f = structural_frame(&metric, &p).unwrap();
        let b = h_curvature(&metric, &p).unwrap();
        let (l, ell, phi) = (f.l, f.ell.tensor(), f.phi.tensor());
        let rhat_form = Tensor::from_fn(3, Signature::new(1, 2), |i| {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            kappa * l * (ell.at(&[i[1]]) * d(i[0], i[2]) - ell.at(&[i[2]]) * d(i[0], i[1]))
        });
        assert!(b.rhat.tensor().sub(&rhat_form).frobenius() < 1e-10 * l);
        let iso = phi.scale(kappa * l * l);
        assert!(b.h.tensor().sub(&iso).frobenius() < 1e-10 * l * l);

        let (nt, ft) = tensor_nf(&metric, &p).unwrap();
        let g_ll = f.g.tensor().add(&ell.outer(ell));
        assert!(nt.tensor().sub(&g_ll).frobenius() < 1e-9);
        assert!(ft.tensor().frobenius() < 1e-9);

        let exp = LocalExpansion::new(&metric, &p, ExpansionOrder::VERTICAL).unwrap();
        let prop = prop21_from(&exp).unwrap();
        assert!(prop.pr_norm > 1e-2 && prop.pn_norm > 1e-2);
        assert!(prop.projected < 1e-7);
    }
}

#[test]
fn d1k_vanishes_on_constant_metrics_only() {
    for (metric, constant) in [(funk(3), true), (riemannian_space_form(3, 1.0), true), (randers_pflat(3), false)] {
        let worst = points(10, 37)
            .iter()
            .map(|p| d1k_from(&LocalExpansion::new(&metric, p, ExpansionOrder::HORIZONTAL).unwrap()).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(worst < 1e-8, constant, "{}: {worst:e}", metric.name());
    }
}

/// Central difference of a tensor-valued function of `y`.
fn y_derivative(f: impl Fn(&SamplePoint) -> Tensor<f64>, p: &SamplePoint, c: usize) -> Tensor<f64> {
    let h = 1e-4;
    let shift = |s: f64| {
        let mut y = p.y().to_vec();
        y[c] += s * h;
        f(&SamplePoint::new(p.x().to_vec(), y).unwrap())
    };
    let (p1, m1, p2, m2) = (shift(1.0), shift(-1.0), shift(2.0), shift(-2.0));
    p1.sub(&m1).scale(8.0).sub(&p2.sub(&m2)).scale(1.0 / (12.0 * h))
}

#[test]
fn randers_c_and_b_against_difference_quotients() {
    let metric = randers_pflat(3);
    for p in points(10, 38) {
        let l = structural_frame(&metric, &p).unwrap().l;
        let ell = structural_frame(&metric, &p).unwrap().ell.into_tensor();
        let c = tensor_c(&metric, &p).unwrap().into_tensor();
        let k_of = |q: &SamplePoint| Tensor::new(3, Signature::new(0, 0), vec![extract_k(&metric, q).unwrap()]).unwrap();
        let fd_c = Tensor::from_fn(3, Signature::new(0, 1), |i| l * y_derivative(k_of, &p, i[0]).components()[0]);
        assert!(c.sub(&fd_c).frobenius() < 1e-7 * c.frobenius().max(1.0));
        assert!(c.frobenius() > 1e-3);

        // B(X,Y) = L ∂C_Y/∂y^X + C(X)ℓ(Y): the direction comes first.
        let b = tensor_b(&metric, &p).unwrap().into_tensor();
        let c_of = |q: &SamplePoint| tensor_c(&metric, q).unwrap().into_tensor();
        let dc: Vec<Tensor<f64>> = (0..3).map(|j| y_derivative(c_of, &p, j)).collect();
        let oracle = Tensor::from_fn(3, Signature::new(0, 2), |i| {
            l * dc[i[0]].at(&[i[1]]) + c.at(&[i[0]]) * ell.at(&[i[1]])
        });
        assert!(b.sub(&oracle).frobenius() < 1e-6 * b.frobenius().max(1.0));
    }
}

#[test]
fn scalar_class_lemmas_on_randers() {
    let metric = randers_pflat(3);
    for p in points(20, 39) {
        let exp = LocalExpansion::new(&metric, &p, ExpansionOrder::VERTICAL).unwrap();
        let mut all = lemma22_residuals(&exp).unwrap();
        all.extend(lemma23_residuals(&exp).unwrap());
        all.extend(lemma31_residuals(&exp).unwrap());
        all.extend(theorem21_residuals(&exp).unwrap());
        all.extend(corollary21_residuals(&exp).unwrap());
        all.push(corollary31_residual(&exp).unwrap());
        for r in all {
            assert!(r.value < 1e-7, "{} = {:e}", r.identity, r.value);
        }
        let prop = prop21_from(&exp).unwrap();
        assert!(prop.biconditional_holds(1e-7) && prop.projected < 1e-7);
    }
}

#[test]
fn theorem21_fails_on_the_perturbed_control() {
    let metric = perturbed_riemannian(3, 1);
    let worst = points(10, 40)
        .iter()
        .map(|p| {
            let exp = LocalExpansion::new(&metric, p, ExpansionOrder::VERTICAL).unwrap();
            theorem21_residuals(&exp).unwrap()[1].value
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst:e}");
}

#[test]
fn randers_is_projectively_flat() {
    let metric = randers_pflat(3);
    for p in points(10, 41) {
        let g = finsler_core::berwald::spray(&metric, &p).unwrap();
        let (g, y) = (g.tensor(), p.y());
        for i in 0..3 {
            for j in 0..3 {
                let wedge = g.at(&[i]) * y[j] - g.at(&[j]) * y[i];
                assert!(wedge.abs() < 1e-12 * g.frobenius().max(1.0));
            }
        }
    }
}
