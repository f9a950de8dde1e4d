//! Subequations as margin functions on Sym(ℝⁿ).

mod checks;
mod family;
mod grassmann;
pub mod registry;

pub use checks::{
    check_cone, check_maximum_principle, check_positivity, check_shift_monotonicity, check_st_invariance,
    check_uniform_ellipticity, project_to_boundary, sample_matrix, CONE_SCALES, INVARIANCE_TOL,
};
pub use family::{
    boundary_tol, member_tol, Family, GardingOperator, Invariance, Subequation, BOUNDARY_TOL, MEMBER_TOL,
};
pub use grassmann::{
    default_plane_count, intersection_graph, principal_angles, smallest_principal_angle, transitivity_check,
    GrassmannSample, Transitivity, DEFAULT_ANGLE_TOL,
};
pub use registry::{builtin, resolve, Params};
