//! Linear algebra kernels: banded complex LU with partial pivoting, a dense
//! Hermitian eigensolver (LAPACK via ndarray-linalg), and shift-invert block
//! Lanczos for the smallest eigenvalues of large operators.

mod banded;
mod dense;
mod lanczos;

pub use banded::{BandedLu, BandedMatrix};
pub use dense::hermitian_eig;
pub use lanczos::{smallest_eigenpairs, LanczosOptions, LinearOp};
