//! Projection-free first-order methods for `min_x f(Ax) + h(x)` built only on
//! oracles for `∂f`, `∂h*`, `A` and `A*`.
//!
//! Three methods share one iteration core: generalized conditional
//! subgradient, generalized mirror descent and a primal-dual hybrid. Each
//! run maintains a recursively updated upper bound on the duality gap, and
//! every iterate comes with a dual certificate.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod duality;
pub mod engine;
pub mod error;
pub mod extended;
pub mod ledger;
pub mod library;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod step;

pub use error::{Error, Result};
pub use extended::ExtReal;
pub use scalar::Scalar;

pub type Point = Vec<f64>;
pub type Problem = oracle::Problem<f64>;
pub type Problem32 = oracle::Problem<f32>;
pub type LinearMap = linalg::LinearMap<f64>;
pub type StepRule = step::StepRule<f64>;
pub type TraceRecord = engine::TraceRecord<f64>;
pub type RunOutput = engine::RunOutput<f64>;
pub type RunOutput32 = engine::RunOutput<f32>;
pub type CurvatureEstimate = diagnostics::CurvatureEstimate<f64>;
