//! Cooperative inference between a teacher and a learner sharing a joint
//! likelihood matrix.
//!
//! Matrices are indexed with data sets as rows and concepts as columns. A
//! learner matrix `L` is row-stochastic (a posterior over concepts for each
//! data set); a teacher matrix `T` is column-stochastic (a distribution over
//! data sets for each concept). Both may carry all-zero lines.
//!
//! Modules:
//! - [`matrix`]: nonnegative matrices, stochastic wrappers, permutations.
//! - [`transmission`]: transmission index, optimality certificate, expected
//!   teaching dimension, Monte Carlo transmission.
//! - [`teaching`]: consistency matrices and classical teaching dimensions.
//! - [`sinkhorn`]: alternating row/column normalization and the cooperative index.
//! - [`structure`]: positive diagonals, permanents, triangularization.
//! - [`qgaussian`]: q-Gaussian noise and the regression phase diagram.
//! - [`io`]: CSV and JSON matrix files.

pub mod error;
pub mod io;
pub mod matrix;
pub mod qgaussian;
pub mod sinkhorn;
pub mod structure;
pub mod teaching;
pub mod transmission;

pub use error::{Error, Result};
pub use matrix::{
    ColumnStochasticMatrix, NonnegativeMatrix, Permutation, RowStochasticMatrix, SpaceIndex,
};
