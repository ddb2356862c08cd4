//! Acceptance criteria C1–C9. Each test prints one PASS/FAIL line.

#[path = "../../core/tests/common/riemann.rs"]
#[allow(dead_code)]
mod riemann;

use std::fs;
use std::process::Command;

use finsler_core::berwald::lemma21_residuals;
use finsler_core::catalog::{
    euclidean, funk, perturbed_riemannian, randers_pflat, riemannian_space_form, CatalogMetric, Verdict,
};
use finsler_core::curvature::{bianchi_from, universal_residuals};
use finsler_core::expansion::values;
use finsler_core::fd_pipeline::FdPipeline;
use finsler_core::sampling::sample_points;
use finsler_core::scalar_class::{
    classify, corollary31_residual, lemma22_residuals, lemma23_residuals, prop21_from, sample_class_jet,
    theorem21_residuals,
};
use finsler_core::{Backend, ExpansionOrder, LocalExpansion, SamplePoint, SamplingSpec, Tensor};
use rayon::prelude::*;

const SAMPLES: usize = 100;

fn catalog() -> Vec<CatalogMetric> {
    vec![
        euclidean(3),
        riemannian_space_form(3, 1.0),
        riemannian_space_form(3, 0.0),
        riemannian_space_form(3, -1.0),
        funk(3),
        randers_pflat(3),
        perturbed_riemannian(3, 1),
    ]
}

fn label(m: &CatalogMetric) -> String {
    match m.entry().params.get("kappa") {
        Some(k) => format!("{}(kappa={k})", m.name()),
        None => m.name().to_string(),
    }
}

fn points(seed: u64) -> Vec<SamplePoint> {
    sample_points(3, &SamplingSpec::new(SAMPLES, seed)).unwrap()
}

/// Evaluates `f` on the expansion at every point, in parallel and in order.
fn per_point<T: Send>(
    m: &CatalogMetric,
    pts: &[SamplePoint],
    order: ExpansionOrder,
    f: impl Fn(&LocalExpansion) -> T + Sync,
) -> Vec<T> {
    pts.par_iter().map(|p| f(&LocalExpansion::new(m, p, order).unwrap())).collect()
}

/// Prints the criterion line and fails the test on FAIL.
fn report(id: &str, title: &str, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("[acceptance] {id} {title}: {status}");
    for f in failures {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "{id} failed:\n{}", failures.join("\n"));
}

#[test]
fn c1_structural_identities() {
    let mut failures = Vec::new();
    for m in catalog() {
        let pts = points(101);
        let worst = pts
            .par_iter()
            .flat_map_iter(|p| lemma21_residuals(&m, p).unwrap())
            .map(|r| (r.value, r.identity))
            .reduce(|| (0.0, ""), |a, b| if a.0 >= b.0 { a } else { b });
        if !(worst.0 < 1e-7) {
            failures.push(format!("{}: {} = {:e}", label(&m), worst.1, worst.0));
        }
    }
    report("C1", "structural identities < 1e-7 on every catalog metric", &failures);
}

#[test]
fn c2_universal_curvature_identities() {
    let mut failures = Vec::new();
    for m in catalog() {
        let pts = points(102);
        let mut worst = [("bianchi.rhat_reconstruction", 0.0f64), ("bianchi.r_eta", 0.0), ("bianchi.cyclic", 0.0)];
        let per = per_point(&m, &pts, ExpansionOrder::HORIZONTAL, |exp| {
            let mut rs = universal_residuals(exp).unwrap();
            rs.push(finsler_core::Residual::new("bianchi.cyclic", bianchi_from(exp).unwrap()));
            rs
        });
        for r in per.into_iter().flatten() {
            if let Some(w) = worst.iter_mut().find(|w| w.0 == r.identity) {
                w.1 = w.1.max(r.value);
            }
        }
        for (id, v) in worst {
            if !(v < 1e-6) {
                failures.push(format!("{}: {id} = {v:e}", label(&m)));
            }
        }
    }
    report("C2", "universal curvature identities < 1e-6 on every catalog metric", &failures);
}

#[test]
fn c3_known_curvature_oracles() {
    let mut failures = Vec::new();
    let pts = points(103);
    for kappa in [-1.0, 0.0, 1.0] {
        let m = riemannian_space_form(3, kappa);
        let a = riemann::space_form(kappa);
        let ks = per_point(&m, &pts, ExpansionOrder::CURVATURE, |exp| exp.scalar_k().unwrap().value());
        for (i, (p, k)) in pts.iter().zip(ks).enumerate() {
            let riem = riemann::riemann(&a, 3, p.x());
            let oracle = riemann::sectional(&riem, &a(p.x()), 3, &[0.2, 0.9, -0.4], p.y());
            if !((oracle - kappa).abs() < 1e-6 && (k - oracle).abs() < 1e-6) {
                failures.push(format!("space form kappa={kappa}, sample {i}: k={k}, oracle={oracle}"));
            }
        }
    }
    let report_funk = classify(&funk(3), "funk", &SamplingSpec::new(SAMPLES, 103), Backend::Jet, None).unwrap();
    if report_funk.verdict != Verdict::Constant {
        failures.push(format!("funk verdict {}", report_funk.verdict));
    }
    for s in &report_funk.k_samples {
        if !((s.k + 0.25).abs() < 1e-6) {
            failures.push(format!("funk k = {} at x={:?}", s.k, s.x));
        }
    }
    let e = euclidean(3);
    let flat = per_point(&e, &pts, ExpansionOrder::VERTICAL, |exp| {
        let blocks = [
            ("rhat", values(exp.vh_torsion().unwrap())),
            ("h", values(exp.deviation().unwrap())),
            ("r", values(exp.h_curvature().unwrap())),
            ("c", values(exp.tensor_c().unwrap())),
            ("b", values(exp.tensor_b().unwrap())),
            ("a", values(exp.tensor_a().unwrap())),
        ];
        let mut worst: Vec<(&str, f64)> = blocks.iter().map(|(name, t)| (*name, t.max_abs())).collect();
        worst.push(("k", exp.scalar_k().unwrap().value().abs()));
        worst
    });
    for (name, v) in flat.into_iter().flatten() {
        if !(v < 1e-12) {
            failures.push(format!("euclidean {name} = {v:e}"));
        }
    }
    report("C3", "space forms k = kappa, funk k = -1/4 constant, euclidean flat", &failures);
}

#[test]
fn c4_theorem21_equivalence() {
    let mut failures = Vec::new();
    for m in catalog() {
        let pts = points(104);
        let res: Vec<Vec<f64>> = per_point(&m, &pts, ExpansionOrder::VERTICAL, |exp| {
            theorem21_residuals(exp).unwrap().iter().map(|r| r.value).collect()
        });
        let isotropic = res.iter().all(|r| r[0] < 1e-7);
        if isotropic {
            for (i, r) in res.iter().enumerate() {
                if !(r[1] < 1e-6 && r[2] < 1e-6) {
                    failures.push(format!("{} sample {i}: rhat_form {:e}, h-curvature {:e}", label(&m), r[1], r[2]));
                }
            }
        }
        if m.name() == "perturbed_riemannian" {
            let anisotropic = res.iter().filter(|r| r[0] > 1e-2).count();
            let vh_torsion_max = res.iter().map(|r| r[1]).fold(0.0, f64::max);
            if anisotropic * 5 < res.len() * 4 {
                failures.push(format!("perturbed: isotropy > 1e-2 at only {anisotropic} of {}", res.len()));
            }
            if !(vh_torsion_max > 1e-2) {
                failures.push(format!("perturbed: rhat_form residual only {vh_torsion_max:e}"));
            }
        } else if !isotropic {
            failures.push(format!("{} unexpectedly anisotropic", label(&m)));
        }
    }
    report("C4", "isotropy residuals vanish on scalar metrics, negative control fails", &failures);
}

#[test]
fn c5_four_way_agreement() {
    let tol = 1e-7;
    let mut failures = Vec::new();
    for m in catalog() {
        let spec = SamplingSpec::new(SAMPLES, 105);
        let verdict = classify(&m, m.name(), &spec, Backend::Jet, None).unwrap().verdict;
        let constant = verdict == Verdict::Constant;
        let pts = sample_points(3, &spec).unwrap();
        let samples: Vec<_> = pts.par_iter().map(|p| sample_class_jet(&m, p).unwrap()).collect();
        for (i, s) in samples.iter().enumerate() {
            let preds = [constant, s.c_norm < tol, s.b_norm.unwrap() < tol, s.a_norm.unwrap() < tol];
            if preds.iter().any(|&b| b != preds[0]) {
                failures.push(format!("{} sample {i}: {preds:?}", label(&m)));
            }
        }
    }
    let r = randers_pflat(3);
    let pf = per_point(&r, &points(105), ExpansionOrder::VERTICAL, |exp| corollary31_residual(exp).unwrap().value);
    for (i, v) in pf.into_iter().enumerate() {
        if !(v < 1e-7) {
            failures.push(format!("randers sample {i}: P·F - B/3 = {v:e}"));
        }
    }
    report("C5", "constant verdict, C, B, A agree; P·F = B/3 on randers", &failures);
}

#[test]
fn c6_scalar_not_constant_witness() {
    let mut failures = Vec::new();
    let m = randers_pflat(3);
    let spec = SamplingSpec::new(SAMPLES, 106);
    let rep = classify(&m, "randers_pflat", &spec, Backend::Jet, None).unwrap();
    if rep.verdict != Verdict::Scalar {
        failures.push(format!("verdict {}", rep.verdict));
    }
    let c = rep.residuals["c_norm"].value;
    if !(c > 1e-3) {
        failures.push(format!("max |C| = {c:e}"));
    }
    let lemmas = per_point(&m, &sample_points(3, &spec).unwrap(), ExpansionOrder::VERTICAL, |exp| {
        let mut all = lemma22_residuals(exp).unwrap();
        all.extend(lemma23_residuals(exp).unwrap());
        all
    });
    {
        for r in lemmas.into_iter().flatten() {
            if !(r.value < 1e-6) {
                failures.push(format!("{} = {:e}", r.identity, r.value));
            }
        }
    }
    report("C6", "randers_pflat scalar, max |C| > 1e-3, lemma22/lemma23 < 1e-6", &failures);
}

#[test]
fn c7_prop21_biconditional() {
    let mut failures = Vec::new();
    for m in catalog() {
        let spec = SamplingSpec::new(SAMPLES, 107);
        if classify(&m, m.name(), &spec, Backend::Jet, None).unwrap().verdict == Verdict::Generic {
            continue;
        }
        let props = per_point(&m, &sample_points(3, &spec).unwrap(), ExpansionOrder::VERTICAL, |exp| {
            prop21_from(exp).unwrap()
        });
        for (i, p) in props.into_iter().enumerate() {
            if !p.biconditional_holds(1e-7) || !(p.projected < 1e-6) {
                failures.push(format!("{} sample {i}: {p:?}", label(&m)));
            }
        }
    }
    report("C7", "P·R = 0 iff P·N = 0, hv-curvature identity < 1e-6 on scalar metrics", &failures);
}

fn rel(a: &Tensor<f64>, b: &Tensor<f64>, unit: f64) -> f64 {
    a.sub(b).frobenius() / a.frobenius().max(b.frobenius()).max(unit)
}

#[test]
fn c8_backend_cross_validation() {
    let mut failures = Vec::new();
    let m = funk(3);
    let fd = FdPipeline::new(&m);
    let pts = sample_points(3, &SamplingSpec::new(20, 108)).unwrap();
    let jets = per_point(&m, &pts, ExpansionOrder::CURVATURE, |exp| {
        (
            values(exp.g()),
            values(exp.spray().unwrap()),
            values(exp.nonlinear().unwrap()),
            values(exp.vh_torsion().unwrap()),
            values(exp.deviation().unwrap()),
            exp.scalar_k().unwrap().value(),
        )
    });
    for (i, (g, spray, nonlinear, rhat, deviation, k)) in jets.into_iter().enumerate() {
        let geo = fd.geometry(&pts[i]).unwrap();
        // Relative errors, floored at the natural scale L^r of a degree-r quantity.
        let (l, l2) = (geo.l, geo.l * geo.l);
        let checks = [
            ("g", rel(&g, &geo.g, 1.0)),
            ("G", rel(&spray, &geo.spray, l2)),
            ("N", rel(&nonlinear, &geo.nonlinear, l)),
            ("Rhat", rel(&rhat, &geo.rhat, l)),
            ("H", rel(&deviation, &geo.deviation, l2)),
            ("k", (k - geo.k).abs() / k.abs().max(geo.k.abs())),
        ];
        for (name, v) in checks {
            if !(v < 1e-4) {
                failures.push(format!("sample {i}: {name} differs by {v:e}"));
            }
        }
    }
    report("C8", "jet and FD backends agree within 1e-4 on funk", &failures);
}

#[test]
fn c9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "suites = [\"lemma21\", \"theorem21\", \"prop21\", \"bianchi\", \"classify\"]\n\
         [metric]\ncatalog = \"randers_pflat\"\n[sampling]\ncount = 20\nseed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("report.jsonl");
    let run = |keep: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_finsler"))
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        let kept = dir.path().join(keep);
        fs::rename(&out, &kept).ok();
        (status.code(), fs::read(kept).unwrap_or_default())
    };
    let (c1, a) = run("a.jsonl");
    let (c2, b) = run("b.jsonl");
    let mut failures = Vec::new();
    if c1 != Some(0) || c2 != Some(0) {
        failures.push(format!("exit codes {c1:?}, {c2:?}"));
    }
    if a.is_empty() || a != b {
        failures.push(format!("reports differ ({} vs {} bytes)", a.len(), b.len()));
    }
    report("C9", "identical verify runs give byte-identical reports", &failures);
}
