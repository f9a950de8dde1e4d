//! Riesz characteristics and kernels.

mod characteristic;
mod checks;
mod kernel;
mod table;

pub use characteristic::{
    bisection_certificate, characteristic_pair, check_direction_independence, decreasing_characteristic,
    decreasing_test_matrix, default_direction, increasing_characteristic, increasing_test_matrix, BisectionCertificate,
    CharValue, CharacteristicPair, Charx, DEFAULT_TOL, P_MAX,
};
pub use checks::{kernel_hessian, radial_harmonic_check, sandwich_check, SANDWICH_TOL};
pub use kernel::{KernelSpec, Normalization};
pub use table::{charx_residual, closed_form, reference_table, table_specs, TableRow};
