//! Bookkeeping shared by all three methods: the `λ`/`μ` weights, the
//! recursive gap bounds, the aggregated certificates and the identity
//! residuals.

mod aggregate;
mod gaps;
mod residual;
mod weights;

pub use aggregate::{Aggregate, AggregatePolicy};
pub use gaps::{script_d_dual, script_d_primal, GapKind, GapMode, GapState, Increment, StepData};
pub use residual::{residual_gcs, residual_gmd, residual_hybrid, weights_by_product, Residual};
pub use weights::{WeightMode, WeightState};
