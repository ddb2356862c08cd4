//! Numerical Finsler geometry: Berwald connection, curvature, and scalar flag
//! curvature classification, evaluated on Taylor germs of the fundamental
//! function.

pub mod berwald;
pub mod catalog;
pub mod curvature;
pub mod diff;
pub mod dsl;
pub mod error;
pub mod expansion;
pub mod fd_pipeline;
pub mod geometry;
pub mod jet;
pub mod metric;
pub mod residual;
pub mod sampling;
pub mod scalar;
pub mod scalar_class;
pub mod tensor;
pub mod verify;

pub use diff::Backend;
pub use error::{Error, Result};
pub use expansion::{ExpansionOrder, LocalExpansion};
pub use geometry::{SamplePoint, StructuralFrame, TensorValue};
pub use metric::{Domain, FinslerMetric};
pub use residual::Residual;
pub use sampling::SamplingSpec;
pub use scalar::Scalar;
pub use tensor::{Signature, Tensor};
