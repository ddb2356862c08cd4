#![allow(dead_code)]

pub mod riemann;

use finsler_core::catalog::{euclidean, funk, perturbed_riemannian, randers_pflat, riemannian_space_form, CatalogMetric};
use finsler_core::SamplePoint;
use proptest::prelude::*;

/// Every catalog metric in dimension 3.
pub fn catalog() -> Vec<CatalogMetric> {
    vec![
        euclidean(3),
        riemannian_space_form(3, 1.0),
        riemannian_space_form(3, -1.0),
        funk(3),
        randers_pflat(3),
        perturbed_riemannian(3, 1),
    ]
}

/// Points with `|x| < 0.4` and `0.3 < |y| < 3`.
pub fn point() -> impl Strategy<Value = SamplePoint> {
    (prop::array::uniform3(-0.23..0.23f64), prop::array::uniform3(-1.7..1.7f64))
        .prop_filter("|y| bounded away from zero", |(_, y)| y.iter().map(|c| c * c).sum::<f64>() > 0.09)
        .prop_map(|(x, y)| SamplePoint::new(x.to_vec(), y.to_vec()).unwrap())
}

pub fn metric_index() -> impl Strategy<Value = usize> {
    0..catalog().len()
}
