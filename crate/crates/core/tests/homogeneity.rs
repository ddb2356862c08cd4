mod common;

use common::{catalog, metric_index, point};
use finsler_core::berwald::{connection, connection_residuals};
use finsler_core::diff::{jet_eval, FundamentalFunction, JetRequest};
use finsler_core::expansion::values;
use finsler_core::{ExpansionOrder, LocalExpansion, Tensor};
use proptest::prelude::*;

fn close(a: &Tensor<f64>, b: &Tensor<f64>, tol: f64) -> bool {
    a.sub(b).frobenius() <= tol * a.frobenius().max(b.frobenius()).max(1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euler_check_for_every_catalog_metric(m in metric_index(), p in point()) {
        let metric = &catalog()[m];
        let r = jet_eval(&JetRequest::new(&FundamentalFunction(metric), &p, 0, 1).unwrap()).unwrap();
        let euler: f64 = (0..3).map(|i| p.y()[i] * r.get(&[], &[i]).unwrap()).sum();
        prop_assert!((euler - r.value()).abs() < 1e-13 * r.value());
    }

    #[test]
    fn degree_ladder(m in metric_index(), p in point(), lambda in 0.3..3.0f64) {
        let metric = &catalog()[m];
        let q = p.with_scaled_direction(lambda).unwrap();
        let a = LocalExpansion::new(metric, &p, ExpansionOrder::CURVATURE).unwrap();
        let b = LocalExpansion::new(metric, &q, ExpansionOrder::CURVATURE).unwrap();
        prop_assert!((b.l().value() - lambda * a.l().value()).abs() < 1e-13 * b.l().value());
        prop_assert!(close(&values(b.g()), &values(a.g()), 1e-12));
        prop_assert!(close(&values(b.spray().unwrap()), &values(a.spray().unwrap()).scale(lambda * lambda), 1e-11));
        prop_assert!(close(&values(b.nonlinear().unwrap()), &values(a.nonlinear().unwrap()).scale(lambda), 1e-11));
        prop_assert!(close(&values(b.berwald().unwrap()), &values(a.berwald().unwrap()), 1e-11));
        let (ka, kb) = (a.scalar_k().unwrap().value(), b.scalar_k().unwrap().value());
        prop_assert!((ka - kb).abs() < 1e-10 * ka.abs().max(1.0));
    }

    #[test]
    fn connection_invariants(m in metric_index(), p in point()) {
        let metric = &catalog()[m];
        let exp = LocalExpansion::new(metric, &p, ExpansionOrder::CONNECTION).unwrap();
        for r in connection_residuals(&exp).unwrap() {
            prop_assert!(r.value < 1e-10, "{} = {}", r.identity, r.value);
        }
    }
}

#[test]
fn euclidean_connection_vanishes_and_funk_spray_is_quadratic() {
    let p = finsler_core::SamplePoint::new(vec![0.1, 0.2, -0.3], vec![0.5, -1.0, 0.25]).unwrap();
    let c = connection(&finsler_core::catalog::euclidean(3), &p).unwrap();
    assert_eq!(c.spray.tensor().frobenius(), 0.0);
    assert_eq!(c.nonlinear.tensor().frobenius(), 0.0);
    assert_eq!(c.berwald.tensor().frobenius(), 0.0);
    let funk = finsler_core::catalog::funk(3);
    let g1 = finsler_core::berwald::spray(&funk, &p).unwrap();
    let g2 = finsler_core::berwald::spray(&funk, &p.with_scaled_direction(2.0).unwrap()).unwrap();
    assert!(close(g2.tensor(), &g1.tensor().scale(4.0), 1e-12));
}
