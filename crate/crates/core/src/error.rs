use thiserror::Error;

use crate::dsl::DslError;
use crate::geometry::SamplePoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point x={x:?} lies outside the chart domain ({domain})")]
    Domain { x: Vec<f64>, domain: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid sample point: {0}")]
    InvalidPoint(String),

    #[error("fundamental tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    DegenerateMetric { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("rank error: {0}")]
    Rank(String),

    #[error("derivative order {requested:?} (x, y) exceeds the available order {available:?}")]
    OrderUnsupported {
        requested: (usize, usize),
        available: (usize, usize),
    },

    #[error("finite-difference step too small: Richardson sequence is not converging ({0})")]
    StepTooSmall(String),

    #[error(transparent)]
    Dsl(#[from] DslError),

    #[error("evaluation outside the domain of `{expr}`: {reason}")]
    EvalDomain { expr: String, reason: String },

    #[error("fundamental function is not positively 1-homogeneous: y·∂L/∂y = {euler:e} but L = {value:e} at y={y:?}")]
    Homogeneity { euler: f64, value: f64, y: Vec<f64> },

    #[error("classification requires dimension n ≥ 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("sample {index} (x={x:?}, y={y:?}): {source}")]
    AtSample {
        index: usize,
        x: Vec<f64>,
        y: Vec<f64>,
        source: Box<Error>,
    },
}

impl Error {
    /// Attaches the offending sample to an error.
    pub fn at_sample(self, index: usize, p: &SamplePoint) -> Self {
        Error::AtSample {
            index,
            x: p.x().to_vec(),
            y: p.y().to_vec(),
            source: Box::new(self),
        }
    }

    /// The underlying error, with sample context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSample { source, .. } => source.root(),
            e => e,
        }
    }
}
