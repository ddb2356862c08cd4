mod common;

use common::catalog;
use finsler_core::catalog::{euclidean, funk, perturbed_riemannian, randers_pflat, Verdict};
use finsler_core::sampling::sample_points;
use finsler_core::scalar_class::{classify, isotropy_residual};
use finsler_core::{Backend, Error, SamplingSpec};

#[test]
fn catalog_verdicts_and_curvatures_are_reproduced() {
    for metric in catalog() {
        let entry = metric.entry();
        let report = classify(&metric, entry.name, &SamplingSpec::new(20, 51), Backend::Jet, None).unwrap();
        assert_eq!(report.verdict, entry.expected_verdict, "{}", entry.name);
        assert_eq!(report.scope, "at sampled points");
        assert_eq!(report.count, 20);
        if let Some(k) = entry.expected_k {
            assert!((report.k_mean - k).abs() < 1e-6, "{}: {}", entry.name, report.k_mean);
            assert!(report.k_std < 1e-6);
        }
    }
}

#[test]
fn randers_is_scalar_with_nonvanishing_c() {
    let report = classify(&randers_pflat(3), "randers_pflat", &SamplingSpec::new(20, 52), Backend::Jet, None).unwrap();
    assert_eq!(report.verdict, Verdict::Scalar);
    assert!(report.residuals["c_norm"].value > 1e-3);
    assert!(report.residuals["b_norm"].value > 1e-7);
    assert!(report.residuals["a_norm"].value > 1e-7);
}

#[test]
fn constant_reports_carry_every_witness() {
    let report = classify(&funk(3), "funk", &SamplingSpec::new(10, 53), Backend::Jet, None).unwrap();
    for key in ["isotropy", "c_norm", "b_norm", "a_norm", "k_std", "d1k"] {
        let c = report.residuals[key];
        assert!(c.value < c.tolerance, "{key}");
    }
}

#[test]
fn perturbed_control_is_generic_and_anisotropic() {
    let metric = perturbed_riemannian(3, 1);
    let report = classify(&metric, "perturbed_riemannian", &SamplingSpec::new(20, 54), Backend::Jet, None).unwrap();
    assert_eq!(report.verdict, Verdict::Generic);
    let pts = sample_points(3, &SamplingSpec::new(50, 54)).unwrap();
    let large = pts.iter().filter(|p| isotropy_residual(&metric, p).unwrap() > 1e-2).count();
    assert!(large * 2 > pts.len(), "{large} of {}", pts.len());
}

#[test]
fn fd_backend_agrees_on_verdicts() {
    for (metric, want) in [(funk(3), Verdict::Constant), (perturbed_riemannian(3, 2), Verdict::Generic)] {
        let report = classify(&metric, metric.name(), &SamplingSpec::new(5, 55), Backend::Fd, None).unwrap();
        assert_eq!(report.verdict, want, "{}", metric.name());
        assert!(!report.residuals.contains_key("b_norm"));
    }
}

#[test]
fn classification_requires_dimension_three() {
    let r = classify(&euclidean(2), "euclidean", &SamplingSpec::new(5, 0), Backend::Jet, None);
    assert!(matches!(r, Err(Error::DimensionTooSmall(2))));
}

#[test]
fn zero_samples_is_a_config_error() {
    let r = classify(&euclidean(3), "euclidean", &SamplingSpec::new(0, 0), Backend::Jet, None);
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn classification_is_deterministic() {
    let spec = SamplingSpec::new(8, 56);
    let a = classify(&randers_pflat(3), "r", &spec, Backend::Jet, None).unwrap();
    let b = classify(&randers_pflat(3), "r", &spec, Backend::Jet, None).unwrap();
    assert_eq!(a.k_mean.to_bits(), b.k_mean.to_bits());
    assert_eq!(a.k_std.to_bits(), b.k_std.to_bits());
}
