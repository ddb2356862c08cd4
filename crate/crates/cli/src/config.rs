use std::collections::BTreeMap;
use std::path::PathBuf;

use finsler_core::catalog::CatalogMetric;
use finsler_core::dsl::DslMetric;
use finsler_core::verify::{Suite, Tolerances};
use finsler_core::{Backend, Domain, Error, FinslerMetric, Result, SamplingSpec, Scalar};
use serde::{Deserialize, Serialize};

/// A run configuration as read from TOML, after command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub suites: Option<Vec<Suite>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub catalog: Option<String>,
    pub dsl: Option<String>,
    pub name: Option<String>,
    pub dimension: Option<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Chart of a DSL metric: the ball `|x| < domain_radius`, or all of Rⁿ.
    pub domain_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub count: usize,
    pub seed: u64,
    pub radius: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let d = SamplingSpec::default();
        SamplingConfig {
            count: d.count,
            seed: d.seed,
            radius: d.radius,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.metric;
        if m.catalog.is_some() == m.dsl.is_some() {
            return Err(Error::Config("exactly one of metric.catalog and metric.dsl must be given".into()));
        }
        if m.dsl.is_some() && m.dimension.is_none() {
            return Err(Error::Config("metric.dimension is required for a DSL metric".into()));
        }
        if m.catalog.is_some() && m.domain_radius.is_some() {
            return Err(Error::Config("metric.domain_radius applies to DSL metrics only".into()));
        }
        if let Some(r) = m.domain_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("metric.domain_radius must be positive, got {r}")));
            }
        }
        if self.sampling.count == 0 {
            return Err(Error::Config("sampling.count must be at least 1".into()));
        }
        if !(self.sampling.radius > 0.0 && self.sampling.radius.is_finite()) {
            return Err(Error::Config(format!("sampling.radius must be positive, got {}", self.sampling.radius)));
        }
        if self.suites.as_ref().is_some_and(Vec::is_empty) {
            return Err(Error::Config("suites must not be empty".into()));
        }
        self.tolerances.validate()
    }

    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or(Backend::Jet)
    }

    pub fn spec(&self) -> SamplingSpec {
        SamplingSpec {
            count: self.sampling.count,
            seed: self.sampling.seed,
            radius: self.sampling.radius,
        }
    }

    /// The configured suites, or every suite the backend supports.
    pub fn suites(&self) -> Vec<Suite> {
        match &self.suites {
            Some(s) => s.clone(),
            None => Suite::ALL.into_iter().filter(|s| s.supported_by(self.backend())).collect(),
        }
    }

    pub fn metric_name(&self) -> String {
        let m = &self.metric;
        m.name.clone().or_else(|| m.catalog.clone()).unwrap_or_else(|| "dsl".to_string())
    }

    pub fn load_metric(&self) -> Result<LoadedMetric> {
        let m = &self.metric;
        if let Some(key) = &m.catalog {
            return Ok(LoadedMetric::Catalog(CatalogMetric::from_key(key, m.dimension.unwrap_or(3), &m.params)?));
        }
        let source = m.dsl.as_deref().unwrap_or_default();
        let n = m.dimension.unwrap_or_default();
        let mut dsl = DslMetric::new(source, n, &m.params)?;
        if let Some(radius) = m.domain_radius {
            dsl = dsl.with_domain(Domain::Ball { radius });
        }
        Ok(LoadedMetric::Dsl(dsl))
    }
}

/// Either kind of configured metric.
#[derive(Debug, Clone)]
pub enum LoadedMetric {
    Catalog(CatalogMetric),
    Dsl(DslMetric),
}

impl FinslerMetric for LoadedMetric {
    fn dimension(&self) -> usize {
        match self {
            LoadedMetric::Catalog(m) => m.dimension(),
            LoadedMetric::Dsl(m) => m.dimension(),
        }
    }

    fn domain(&self) -> Domain {
        match self {
            LoadedMetric::Catalog(m) => m.domain(),
            LoadedMetric::Dsl(m) => m.domain(),
        }
    }

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        match self {
            LoadedMetric::Catalog(m) => m.eval(x, y),
            LoadedMetric::Dsl(m) => m.eval(x, y),
        }
    }
}
