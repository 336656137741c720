//! Dense real linear algebra: nonsymmetric eigen-decomposition, top-r
//! eigentriples with left/right pairing, and truncated SVD.

mod eigen;
mod subspace;
mod svd;
mod symmetric;
mod triples;

pub use eigen::{eigen_decompose, Spectrum, TOL_EIG};
pub use svd::{svd_truncate, truncated_svd, TruncatedSvd};
pub use symmetric::symmetric_eigen;
pub use triples::{top_r_eigentriples, EigenMethod, EigenOptions, EigenTriple, TOL_REAL};
