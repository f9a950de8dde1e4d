use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::sample::{rng, unit_vec};
use crate::linalg::{radial_hessian, SymMatrix};
use crate::par;
use crate::report::PropertyReport;
use crate::subeq::{boundary_tol, project_to_boundary, sample_matrix, Subequation, BOUNDARY_TOL};

/// Tolerance for the inclusion checks, relative to 1+‖A‖.
pub const SANDWICH_TOL: f64 = 1e-8;

/// Θ|x|^{−p}(P_{[x]⊥} − (p−1)P_{[x]}), the Hessian of Θ·K̄_p(|x|).
pub fn kernel_hessian(theta: f64, p: f64, x: &[f64]) -> Result<SymMatrix> {
    let r = crate::linalg::norm(x);
    Ok(radial_hessian(r.powf(1.0 - p), (1.0 - p) * r.powf(-p), x)?.scale(theta))
}

/// Checks that kernel Hessians at the given radii lie on ∂F.
pub fn radial_harmonic_check(
    f: &Subequation,
    theta: f64,
    p: f64,
    radii: &[f64],
    directions: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if !(p >= 1.0 && p.is_finite()) || theta < 0.0 {
        return Err(Error::Param("radial harmonic check needs finite p ≥ 1 and Θ ≥ 0".into()));
    }
    let mut r = rng(seed);
    let mut points = Vec::new();
    for &rad in radii {
        if !(rad > 0.0) {
            return Err(Error::Param("radii must be positive".into()));
        }
        for _ in 0..directions {
            points.push(unit_vec(&mut r, f.n).into_iter().map(|v| v * rad).collect::<Vec<f64>>());
        }
    }
    let vals = par::map(&points, |x| -> Result<f64> {
        let h = kernel_hessian(theta, p, x)?;
        Ok(f.margin(&h).abs() / boundary_tol(&h) * BOUNDARY_TOL)
    });
    let mut worst: f64 = 0.0;
    for v in vals {
        worst = worst.max(v?);
    }
    Ok(PropertyReport::new("radial-harmonic", &f.name, points.len(), worst, BOUNDARY_TOL))
}

/// Checks P_p^{min/2} ⊂ F ⊂ P_p^{min/max} on seeded samples, including
/// points pushed onto each of the three boundaries.
pub fn sandwich_check(f: &Subequation, p: f64, count: usize, seed: u64) -> Result<PropertyReport> {
    let inner = Subequation::min2(f.n, p)?;
    let outer = Subequation::min_max(f.n, p)?;
    let mut r = rng(seed);
    let raw: Vec<(SymMatrix, usize)> = (0..count)
        .map(|i| {
            let a = sample_matrix(&mut r, f.n, i);
            (a, r.random_range(0..4usize))
        })
        .collect();
    let vals = par::map(&raw, |(a, which)| {
        let a = match which {
            0 => project_to_boundary(&inner, a),
            1 => project_to_boundary(f, a),
            2 => project_to_boundary(&outer, a),
            _ => a.clone(),
        };
        let s = 1.0 + a.frobenius();
        let mut v: f64 = 0.0;
        if inner.margin(&a) >= 0.0 {
            v = v.max(-f.margin(&a) / s);
        }
        if f.margin(&a) >= 0.0 {
            v = v.max(-outer.margin(&a) / s);
        }
        v
    });
    let worst = vals.into_iter().fold(0.0, f64::max);
    Ok(PropertyReport::new("sandwich", &f.name, count, worst, SANDWICH_TOL).with_note(format!("p = {p}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_kernel_hessian_is_traceless() {
        let x = [0.3, -0.4, 1.1, 0.2, 0.9];
        let h = kernel_hessian(2.0, 5.0, &x).unwrap();
        assert!(h.trace().abs() < 1e-14 * (1.0 + h.frobenius()));
    }

    #[test]
    fn zero_theta_gives_zero_margin_for_cones() {
        let f = Subequation::sigma_k(4, 2).unwrap();
        let rep = radial_harmonic_check(&f, 0.0, 2.0, &[0.1, 1.0, 10.0], 4, 1).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_violation, 0.0);
    }

    #[test]
    fn sandwich_detects_wrong_characteristic() {
        let f = Subequation::p_convex(4, 2.5).unwrap();
        assert!(sandwich_check(&f, 2.5, 300, 1).unwrap().pass);
        for wrong in [2.0, 3.0] {
            let g = Subequation::min_max(4, wrong).unwrap();
            assert!(!sandwich_check(&g, 2.5, 300, 1).unwrap().pass, "p' = {wrong}");
        }
    }
}
