//! Dense complex Hermitian linear algebra.

mod eigen;
mod hermitian;
mod matrix;

pub use eigen::Eigen;
pub use hermitian::{
    eig_hermitian, entropy_bits, op_sqrt, trace_norm, DensityMatrix, HermitianOperator,
    ENTROPY_FLOOR, HERMITIAN_TOL, PSD_TOL, SQRT_DOMAIN_TOL, TRACE_TOL,
};
pub use matrix::{partial_trace, tensor, ComplexMatrix};
