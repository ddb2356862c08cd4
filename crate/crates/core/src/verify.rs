//! Identity suites evaluated over sampled points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::berwald::{connection_residuals, lemma21_residuals, structural_residuals};
use crate::curvature::{bianchi_from, universal_residuals};
use crate::diff::Backend;
use crate::error::{Error, Result};
use crate::expansion::{ExpansionOrder, LocalExpansion};
use crate::fd_pipeline::FdPipeline;
use crate::geometry::SamplePoint;
use crate::metric::FinslerMetric;
use crate::residual::Residual;
use crate::sampling::{sample_points, SamplingSpec};
use crate::scalar_class::{
    classify, corollary21_residuals, corollary31_residual, default_tolerance, lemma22_residuals, lemma23_residuals,
    lemma31_residuals, prop21_residuals, theorem21_residuals, ClassificationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemma21,
    Lemma22,
    Lemma23,
    Theorem21,
    Corollary21,
    Prop21,
    Lemma31,
    Bianchi,
    Classify,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Lemma21,
        Suite::Lemma22,
        Suite::Lemma23,
        Suite::Theorem21,
        Suite::Corollary21,
        Suite::Prop21,
        Suite::Lemma31,
        Suite::Bianchi,
        Suite::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma21 => "lemma21",
            Suite::Lemma22 => "lemma22",
            Suite::Lemma23 => "lemma23",
            Suite::Theorem21 => "theorem21",
            Suite::Corollary21 => "corollary21",
            Suite::Prop21 => "prop21",
            Suite::Lemma31 => "lemma31",
            Suite::Bianchi => "bianchi",
            Suite::Classify => "classify",
        }
    }

    /// Whether `backend` can evaluate this suite.
    pub fn supported_by(self, backend: Backend) -> bool {
        match backend {
            Backend::Jet => true,
            Backend::Fd => matches!(self, Suite::Lemma21 | Suite::Classify),
        }
    }

    fn needs_expansion(self) -> bool {
        !matches!(self, Suite::Lemma21 | Suite::Classify)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Pass thresholds: an identity key overrides its suite name, which
/// overrides `default`, which overrides the backend default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub default: Option<f64>,
    #[serde(flatten)]
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = self.default.iter().map(|v| ("default", *v));
        for (key, v) in all.chain(self.overrides.iter().map(|(k, v)| (k.as_str(), *v))) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance `{key}` must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, suite: Suite, identity: &str, backend: Backend) -> f64 {
        self.overrides
            .get(identity)
            .or_else(|| self.overrides.get(suite.name()))
            .copied()
            .or(self.default)
            .unwrap_or_else(|| default_tolerance(backend))
    }
}

/// One residual of one identity at one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub suite: Suite,
    pub identity: &'static str,
    pub sample: Option<usize>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Largest residual of an identity over all samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySummary {
    pub suite: Suite,
    pub identity: &'static str,
    pub max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub records: Vec<ResidualRecord>,
    pub summary: Vec<IdentitySummary>,
    pub classification: Option<ClassificationReport>,
    pub passed: bool,
}

/// Residuals of the per-point suites at one sample.
pub fn sample_residuals<M: FinslerMetric>(
    metric: &M,
    p: &SamplePoint,
    suites: &[Suite],
    backend: Backend,
    prop21_tol: f64,
) -> Result<Vec<(Suite, Residual)>> {
    let mut out = Vec::new();
    if backend == Backend::Fd {
        if suites.contains(&Suite::Lemma21) {
            let parts = FdPipeline::new(metric).structural_parts(p)?;
            out.extend(structural_residuals(&parts)?.into_iter().map(|r| (Suite::Lemma21, r)));
        }
        return Ok(out);
    }
    let exp = if suites.iter().any(|s| s.needs_expansion()) {
        Some(LocalExpansion::new(metric, p, ExpansionOrder::VERTICAL)?)
    } else {
        None
    };
    for &suite in suites {
        let tag = |rs: Vec<Residual>| rs.into_iter().map(move |r| (suite, r));
        if suite == Suite::Lemma21 {
            out.extend(tag(lemma21_residuals(metric, p)?));
            let conn = match &exp {
                Some(exp) => connection_residuals(exp)?,
                None => connection_residuals(&LocalExpansion::new(metric, p, ExpansionOrder::CONNECTION)?)?,
            };
            out.extend(tag(conn));
            continue;
        }
        let Some(exp) = exp.as_ref() else { continue };
        match suite {
            Suite::Lemma22 => out.extend(tag(lemma22_residuals(exp)?)),
            Suite::Lemma23 => out.extend(tag(lemma23_residuals(exp)?)),
            Suite::Theorem21 => out.extend(tag(theorem21_residuals(exp)?)),
            Suite::Corollary21 => out.extend(tag(corollary21_residuals(exp)?)),
            Suite::Prop21 => out.extend(tag(prop21_residuals(exp, prop21_tol)?)),
            Suite::Lemma31 => {
                out.extend(tag(lemma31_residuals(exp)?));
                out.push((suite, corollary31_residual(exp)?));
            }
            Suite::Bianchi => {
                out.extend(tag(universal_residuals(exp)?));
                let horizontal = LocalExpansion::new(metric, p, ExpansionOrder::HORIZONTAL)?;
                out.push((suite, Residual::new("bianchi.cyclic", bianchi_from(&horizontal)?)));
            }
            Suite::Lemma21 | Suite::Classify => {}
        }
    }
    Ok(out)
}

/// Runs `suites` on the points drawn by `spec`. Identity failures are part
/// of the report; evaluation errors abort the run.
pub fn verify<M: FinslerMetric>(
    metric: &M,
    name: &str,
    spec: &SamplingSpec,
    backend: Backend,
    suites: &[Suite],
    tolerances: &Tolerances,
) -> Result<VerifyReport> {
    if suites.is_empty() {
        return Err(Error::Config("no suites selected".into()));
    }
    tolerances.validate()?;
    if let Some(s) = suites.iter().find(|s| !s.supported_by(backend)) {
        return Err(Error::Config(format!("suite `{s}` is not available with the {backend} backend")));
    }
    let mut suites = suites.to_vec();
    suites.sort();
    suites.dedup();

    let points = sample_points(metric.dimension(), spec)?;
    let prop21_tol = tolerances.get(Suite::Prop21, "prop21.biconditional", backend);
    let per_sample: Vec<Vec<(Suite, Residual)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| sample_residuals(metric, p, &suites, backend, prop21_tol).map_err(|e| e.at_sample(i, p)))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (i, residuals) in per_sample.into_iter().enumerate() {
        for (suite, r) in residuals {
            let tolerance = tolerances.get(suite, r.identity, backend);
            records.push(ResidualRecord {
                suite,
                identity: r.identity,
                sample: Some(i),
                value: r.value,
                tolerance,
                pass: r.value < tolerance,
            });
        }
    }

    let mut classification = None;
    if suites.contains(&Suite::Classify) {
        let tol = tolerances.overrides.get(Suite::Classify.name()).copied().or(tolerances.default);
        let value = match classify(metric, name, spec, backend, tol) {
            Ok(report) => {
                classification = Some(report);
                0.0
            }
            Err(Error::InternalInconsistency(_)) => 1.0,
            Err(e) => return Err(e),
        };
        records.push(ResidualRecord {
            suite: Suite::Classify,
            identity: "classify.consistency",
            sample: None,
            value,
            tolerance: 0.5,
            pass: value < 0.5,
        });
    }

    let mut summary: Vec<IdentitySummary> = Vec::new();
    for r in &records {
        match summary.iter_mut().find(|s| s.identity == r.identity) {
            Some(s) => {
                s.max = s.max.max(r.value);
                s.pass &= r.pass;
            }
            None => summary.push(IdentitySummary {
                suite: r.suite,
                identity: r.identity,
                max: r.value,
                tolerance: r.tolerance,
                pass: r.pass,
            }),
        }
    }
    let passed = summary.iter().all(|s| s.pass);
    Ok(VerifyReport {
        records,
        summary,
        classification,
        passed,
    })
}
