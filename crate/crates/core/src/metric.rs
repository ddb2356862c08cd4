//! The fundamental-function abstraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::SamplePoint;
use crate::scalar::Scalar;

/// Open region of the chart on which a metric is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Whole,
    /// Open ball `|x| < radius` about the origin.
    Ball { radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Whole => x.iter().all(|v| v.is_finite()),
            Domain::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Domain::Whole => "all of Rⁿ".to_string(),
            Domain::Ball { radius } => format!("|x| < {radius}"),
        }
    }
}

/// A Finsler fundamental function `L(x, y)` on a single chart.
///
/// `eval` must be generic so that the same formula runs over `f64` and over
/// jets. It is only ever called with `y ≠ 0` and `x` inside [`Self::domain`].
pub trait FinslerMetric: Send + Sync {
    fn dimension(&self) -> usize;

    fn domain(&self) -> Domain;

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S>;

    fn check_point(&self, p: &SamplePoint) -> Result<()> {
        if p.dim() != self.dimension() {
            return Err(Error::InvalidPoint(format!(
                "point has dimension {} but the metric has dimension {}",
                p.dim(),
                self.dimension()
            )));
        }
        let domain = self.domain();
        if !domain.contains(p.x()) {
            return Err(Error::Domain {
                x: p.x().to_vec(),
                domain: domain.describe(),
            });
        }
        Ok(())
    }
}

impl<M: FinslerMetric> FinslerMetric for &M {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        (**self).eval(x, y)
    }
}
