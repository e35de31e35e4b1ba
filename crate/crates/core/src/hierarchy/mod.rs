//! Relaxation families over increasing order, and the indicator special case.

mod builders;
mod indicator;
mod runner;
mod theta;

pub use builders::{
    build_trace_completion, build_transport_relaxation, build_weighted_completion,
    objective_vector, relaxation_blocks,
};
pub use indicator::{
    expand_indicator_legendre, expand_indicator_moments, reduced_indicator_matrix,
    reduced_indicator_rows,
};
pub use runner::{run_hierarchy, HierarchyResult, OrderRecord};
pub use theta::{default_c, theta_weights, ThetaMode, ThetaWeights};
