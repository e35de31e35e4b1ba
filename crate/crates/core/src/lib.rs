#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Graph recovery from partial moment data: moment completion by
//! semidefinite relaxations and graph extraction with the
//! Christoffel-Darboux kernel.

pub mod cdkernel;
pub mod error;
pub mod experiments;
pub mod hierarchy;
pub mod momentmodel;
pub mod oracle;
pub mod polycore;
pub mod sdpsolver;

pub use error::{Error, Result};
