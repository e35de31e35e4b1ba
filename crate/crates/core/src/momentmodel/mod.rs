//! Moment sequences, moment and localizing matrices, domains and known
//! moment data.

mod domain;
mod eigen;
mod known;
mod matrix;
mod sequence;

pub use domain::{Constraint, DomainScaling, SemialgebraicSet};
pub use eigen::{default_psd_tol, psd_check, symmetric_eigen, PsdReport, SymmetricEigen};
pub use known::{KnownMoments, MomentSupport};
pub use matrix::{
    localizing_matrix, localizing_pattern, moment_matrix, order_rows, MatrixPattern, PatternEntry,
    SymMatrix,
};
pub use sequence::{MomentBasis, MomentSequence};
