//! Inference for eigenvectors and eigenvalues of a low-rank symmetric matrix
//! observed under independent heteroscedastic noise.
//!
//! The observed matrix `M = M* + H` is generally asymmetric. Instead of
//! symmetrizing it, the estimators work with the leading right and left
//! eigenvectors of `M` directly, which suppresses the bias a symmetric
//! eigen-decomposition would incur when eigen-gaps are small.

// `!(x >= 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod models;
pub mod quantile;
pub mod uncertainty;

pub use error::{Error, Result};
pub use linalg::{EigenMethod, EigenOptions, EigenTriple};
pub use matrix::DenseMatrix;
