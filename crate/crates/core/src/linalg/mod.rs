//! Small dense and tridiagonal kernels.

pub mod dense;
pub mod eigen;
pub mod tridiag;

pub use dense::DenseMatrix;
pub use tridiag::{tridiagonal_solve, Tridiagonal, TridiagonalLu};
