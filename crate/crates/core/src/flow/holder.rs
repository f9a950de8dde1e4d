//! Hölder estimates for 1 ≤ p < 2, where α = 2 − p.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::average::{spherical_max, Quadrature};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::norm;
use crate::linalg::sample::{rng, unit_vec};
use crate::report::PropertyReport;

fn alpha(p: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::Param(format!("Hölder estimates need 1 ≤ p < 2, got {p}")));
    }
    Ok(2.0 - p)
}

fn finite_at(u: &dyn ScalarField, x0: &[f64]) -> Result<f64> {
    let v = u.eval(x0);
    if !v.is_finite() {
        return Err(Error::Domain(format!("{} is not finite at the center", u.name())));
    }
    Ok(v)
}

/// Upper bound [R^α/((R−ρ)^α − ρ^α)]·(M(u, x₀, R) − u(x₀))/R^α for the
/// α-Hölder seminorm of u on B_ρ(x₀), valid for 0 < 3ρ ≤ R.
pub fn holder_estimate(u: &dyn ScalarField, x0: &[f64], rho: f64, big_r: f64, p: f64, q: &Quadrature) -> Result<f64> {
    let a = alpha(p)?;
    if !(rho > 0.0 && 3.0 * rho <= big_r * (1.0 + 1e-12)) {
        return Err(Error::Param(format!("need 0 < 3ρ ≤ R, got ρ={rho}, R={big_r}")));
    }
    if norm(x0) + big_r >= u.domain_radius() {
        return Err(Error::Param(format!("R={big_r} reaches the domain boundary")));
    }
    let m = spherical_max(u, x0, big_r, q)?;
    let u0 = finite_at(u, x0)?;
    let factor = big_r.powf(a) / ((big_r - rho).powf(a) - rho.powf(a));
    Ok(factor * (m.value + m.noise - u0) / big_r.powf(a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderValue {
    pub value: f64,
    pub bracket: f64,
}

/// (M(u, x₀, r) − u(x₀))/r^α at the deepest radius; the bracket is the
/// change from the previous radius plus the max noise.
pub fn infinitesimal_holder(
    u: &dyn ScalarField,
    x0: &[f64],
    p: f64,
    radii: &[f64],
    q: &Quadrature,
) -> Result<HolderValue> {
    let a = alpha(p)?;
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::Param("need at least two positive, strictly decreasing radii".into()));
    }
    let u0 = finite_at(u, x0)?;
    let mut vals = Vec::with_capacity(radii.len());
    let mut noise: f64 = 0.0;
    for &r in radii {
        let m = spherical_max(u, x0, r, q)?;
        noise = m.noise / r.powf(a);
        vals.push((m.value - u0) / r.powf(a));
    }
    let k = vals.len();
    Ok(HolderValue { value: vals[k - 1], bracket: (vals[k - 2] - vals[k - 1]).abs() + noise })
}

/// Largest |u(x) − u(y)|/|x − y|^α over `count` seeded pairs in B_ρ(x₀).
pub fn sampled_holder_quotient(u: &dyn ScalarField, x0: &[f64], rho: f64, a: f64, count: usize, seed: u64) -> f64 {
    let n = x0.len();
    let mut r = rng(seed ^ 0x401d);
    let point = |r: &mut crate::linalg::sample::SeededRng| -> Vec<f64> {
        let w = unit_vec(r, n);
        let t = rho * r.random::<f64>().powf(1.0 / n as f64);
        x0.iter().zip(w).map(|(c, d)| c + t * d).collect()
    };
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let x = point(&mut r);
        // Every fourth pair uses the center, where the quotient peaks for kernels.
        let y = if i % 4 == 0 { x0.to_vec() } else { point(&mut r) };
        let d = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if d > 0.0 {
            worst = worst.max((u.eval(&x) - u.eval(&y)).abs() / d.powf(a));
        }
    }
    worst
}

/// Along the schedule, the seminorm of u_{r_j} on B_ρ stays below
/// [R^α/((R−ρ)^α − ρ^α)]·(M(u, 0, r_jR) − u(0))/(r_jR)^α with R = 3ρ, and
/// the deepest seminorm is at most Θ^M(u, 0) up to its bracket.
pub fn flow_holder_bound_check(
    u: &dyn ScalarField,
    p: f64,
    rho: f64,
    radii: &[f64],
    seminorms: &[f64],
    q: &Quadrature,
) -> Result<PropertyReport> {
    let a = alpha(p)?;
    if seminorms.len() != radii.len() || radii.len() < 2 {
        return Err(Error::Param("need one seminorm per radius and at least two radii".into()));
    }
    let zero = vec![0.0; u.dim()];
    let u0 = finite_at(u, &zero)?;
    let big_r = 3.0 * rho;
    let factor = big_r.powf(a) / ((big_r - rho).powf(a) - rho.powf(a));
    let mut worst: f64 = f64::NEG_INFINITY;
    for (&r, &s) in radii.iter().zip(seminorms) {
        let m = spherical_max(u, &zero, r * big_r, q)?;
        let bound = factor * (m.value + m.noise - u0) / (r * big_r).powf(a);
        worst = worst.max(s - bound * (1.0 + 1e-9) - 1e-12);
    }
    let scaled: Vec<f64> = radii.iter().map(|r| r * rho).collect();
    let theta = infinitesimal_holder(u, &zero, p, &scaled, q)?;
    let last = seminorms[seminorms.len() - 1];
    worst = worst.max(last - theta.value - theta.bracket - 1e-9);
    Ok(PropertyReport::new("flow-holder-bound", u.name(), radii.len() + 1, worst.max(0.0), 0.0)
        .with_note(format!("deepest seminorm {last:.6e}, Theta^M {:.6e} ± {:.1e}", theta.value, theta.bracket)))
}

/// (u(y) − u(0))/|y|^α → Θ along `rays` seeded directions, and u_r → Θ|x|^α
/// uniformly on the unit sphere sample, both at the deepest radius.
#[allow(clippy::too_many_arguments)]
pub fn ray_limit_check(
    u: &dyn ScalarField,
    p: f64,
    theta: f64,
    radii: &[f64],
    rays: usize,
    q: &Quadrature,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let a = alpha(p)?;
    let n = u.dim();
    let zero = vec![0.0; n];
    let u0 = finite_at(u, &zero)?;
    let r = *radii.last().ok_or_else(|| Error::Param("need at least one radius".into()))?;
    let mut g = rng(seed ^ 0x4a75);
    let ray_err = (0..rays)
        .map(|_| {
            let w = unit_vec(&mut g, n);
            let y: Vec<f64> = w.iter().map(|v| r * v).collect();
            ((u.eval(&y) - u0) / r.powf(a) - theta).abs()
        })
        .fold(0.0, f64::max);
    let sphere_err = q
        .sphere
        .points()
        .iter()
        .map(|w| {
            let y: Vec<f64> = w.iter().map(|v| r * v).collect();
            ((u.eval(&y) - u0) / r.powf(a) - theta).abs()
        })
        .fold(0.0, f64::max);
    Ok(PropertyReport::new("ray-limit", u.name(), rays + q.sphere.len(), ray_err.max(sphere_err), tol)
        .with_note(format!("rays {ray_err:.3e}, uniform on sphere {sphere_err:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::catalog::{constant, riesz_kernel};
    use crate::flow::quad::QuadSpec;

    fn quad(n: usize) -> Quadrature {
        Quadrature::new(n, QuadSpec { sphere: 512, radial: 16, seed: 0 }).unwrap()
    }

    #[test]
    fn power_function_has_unit_infinitesimal_norm() {
        let u = riesz_kernel(3, 1.0, 1.5, None).unwrap();
        let h = infinitesimal_holder(u.as_ref(), &[0.0; 3], 1.5, &[0.5, 0.25, 0.125], &quad(3)).unwrap();
        assert!((h.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_bound() {
        let u = constant(3, 4.0);
        assert_eq!(holder_estimate(u.as_ref(), &[0.0; 3], 0.1, 0.3, 1.5, &quad(3)).unwrap(), 0.0);
    }

    #[test]
    fn parameter_errors() {
        let u = constant(3, 0.0);
        assert!(holder_estimate(u.as_ref(), &[0.0; 3], 0.2, 0.3, 1.5, &quad(3)).is_err());
        assert!(holder_estimate(u.as_ref(), &[0.0; 3], 0.1, 0.3, 2.0, &quad(3)).is_err());
    }

    #[test]
    fn sampled_quotients_obey_the_bound() {
        let u = riesz_kernel(3, 1.0, 1.5, None).unwrap();
        let bound = holder_estimate(u.as_ref(), &[0.0; 3], 0.2, 0.6, 1.5, &quad(3)).unwrap();
        let s = sampled_holder_quotient(u.as_ref(), &[0.0; 3], 0.2, 0.5, 1000, 1);
        assert!(s <= bound && s > 0.5, "{s} vs {bound}");
    }
}
