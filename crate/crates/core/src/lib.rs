//! Geometry, operators and projection algorithms in CAT(0) (Hadamard)
//! spaces, with a randomized certifier for the underlying inequalities.
//!
//! Three concrete models are provided: Euclidean space, the hyperboloid
//! model of hyperbolic space and finite metric trees, closed under products.

pub mod barycenter;
pub mod certifier;
pub mod diagnostics;
pub mod error;
pub mod hyperboloid;
pub mod iteration;
pub mod operators;
pub mod sampling;
pub mod sets;
pub mod space;
pub mod tolerance;
pub mod tree;

pub use barycenter::{frechet_mean, BarycenterConfig, WeightedPoints};
pub use certifier::{run_check, run_suite, CertificateReport, CheckKind, CheckSpec};
pub use error::{Error, Result};
pub use iteration::{IterationTrace, StopReason, StopRule};
pub use operators::Operator;
pub use sets::ConvexSet;
pub use space::{Point, Space, SpaceModel};
pub use tolerance::ToleranceConfig;
pub use tree::MetricTree;
