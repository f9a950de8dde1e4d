//! Averages, tangential flows, densities and Hölder estimates of scalar
//! fields, with a catalog of certified example fields.

mod average;
pub mod catalog;
mod density;
mod holder;
mod quad;
mod tangent;

pub use average::{
    average, spherical_average, spherical_max, volume_average, AverageCurve, AverageKind, AverageValue, Quadrature,
    CLIP,
};
pub use density::{
    densities, density_decay_check, double_monotonicity, harnack_constant, harnack_phi, mass_density, quotient_density,
    scaled_radii, unit_ball_volume, DecayPoint, DecayReport, DensityEstimate, DensityReport, HarnackCheck,
    MassDensityReport, MAX_CLIPPED_FRACTION, MONOTONE_TOL,
};
pub use holder::{
    flow_holder_bound_check, holder_estimate, infinitesimal_holder, ray_limit_check, sampled_holder_quotient,
    HolderValue,
};
pub use quad::{default_sphere_size, GaussLegendre, QuadSpec, SphereQuadrature, GL_NODES};
pub use tangent::{
    averages_of_tangent_check, field_distance, flowed_field, semigroup_check, stability_check, tangent_experiment,
    tangent_flow, ConvergenceRecord, FlowSpec, Flowed, GridSpec, Metric,
};
