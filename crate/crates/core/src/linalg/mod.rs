//! Dense symmetric-matrix primitives.

mod eigen;
mod fd;
mod frame;
mod matrix;
pub mod sample;
mod structure;
mod symfun;

pub(crate) use eigen::block_means;
pub use eigen::{jacobi, reduce_multiplicity, Eigen, MAX_SWEEPS, OFF_DIAG_TOL};
pub use fd::{default_step, finite_diff_hessian};
pub use frame::{trace_over_subspace, Frame};
pub use matrix::{
    characteristic_matrix, dot, norm, projector_onto, projector_perp, radial_hessian, Mat, SymMatrix, UnitVector,
};
pub use sample::{random_frame, random_psd, random_rotation};
pub use structure::{hermitian_part, reduced_eigenvalues, ComplexStructure, QuaternionStructure, Structure};
pub use symfun::{elementary_symmetric, elementary_symmetric_all};

/// Ascending eigenvalues of `a`.
pub fn ordered_eigenvalues(a: &SymMatrix) -> crate::Result<Vec<f64>> {
    a.eigenvalues()
}
