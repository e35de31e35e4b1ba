//! Christoffel-Darboux kernel of a moment matrix and graph extraction.

mod basis;
mod extract;
mod model;

pub use basis::{ortho_basis, OrthoBasis};
pub use extract::{
    argmin_smallest, extract_graph, extract_graph_points, l1_error, level_set_csv, level_set_grid,
    max_error, q_on_column, uniform_grid, SampledGraph, DEFAULT_X_POINTS, DEFAULT_Y_POINTS,
};
pub use model::{cd_polynomial, default_beta, CDModel, PSD_TOL};
