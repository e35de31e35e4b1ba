//! Ground-truth moments of benchmark graphs and reference measures.

mod graph;
mod piecewise;
pub mod quadrature;
mod transport;

pub use graph::{
    graph_known_moments, graph_moments, graph_moments_at, graph_moments_closed_form,
    indicator_moments, marginal_known_moments, marginal_moments, GraphMoments, IntervalUnion,
    OracleOptions,
};
pub use piecewise::{Piece, PiecewiseFunction, ReferenceMeasure};
pub use transport::{
    convex_cost_original_coordinates, transport_cost_exact, transport_instance, TransportInstance,
    TransportTag,
};
