//! Variation calculus, path-sampling sparsification and bound calculators for
//! deep ramp networks with nonnegative weights.
//!
//! The network, variation and sampling code is generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix it to `f64`.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod matrix_bounds;
pub mod network;
pub mod packing;
pub mod scalar;
pub mod spectral;
pub mod variation;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use markov::{MarkovMeasure, PathCounts, RefinedBound, SigmaMode, SparseCoverElement};
pub use network::{random_network, uniform_points, InputPoint, NetworkSpec, RampNetwork};
pub use scalar::Scalar;
pub use variation::{LinkSelector, RescaleReport, VariationMode, VariationSummary};

pub type Network = RampNetwork<f64>;
pub type Point = InputPoint<f64>;
pub type Summary = VariationSummary<f64>;
pub type Mat = Matrix<f64>;
pub type Measure = MarkovMeasure<f64>;
pub type CoverElement = SparseCoverElement<f64>;
