//! Sampled structural checks on subequations.

use rand::Rng;

use super::family::{member_tol, Invariance, Subequation, MEMBER_TOL};
use crate::linalg::sample::{
    gaussian_symmetric, random_psd_with, random_rotation_with, random_structured_rotation, rng,
};
use crate::linalg::{Mat, SymMatrix};
use crate::par;
use crate::report::PropertyReport;

/// Cone scalings used by [`check_cone`].
pub const CONE_SCALES: [f64; 4] = [0.0, 0.5, 2.0, 10.0];
/// Tolerance for |m(gAgᵀ) − m(A)| relative to 1+|m(A)|.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Test matrix number `i` of a seeded stream. Alternates between Gaussian
/// matrices at random scales and rotated spectra with one negative
/// eigenvalue, which sit near the boundaries of the cone families.
pub fn sample_matrix<R: Rng + ?Sized>(r: &mut R, n: usize, i: usize) -> SymMatrix {
    let scale = 10f64.powf(r.random_range(-1.0..1.0));
    match i % 3 {
        0 => gaussian_symmetric(r, n).scale(scale),
        1 => {
            let mut l: Vec<f64> = (0..n).map(|_| r.random_range(0.0..2.0)).collect();
            l[0] = -r.random_range(0.0..(2.0 * n as f64));
            let g = random_rotation_with(r, n);
            SymMatrix::diag(&l).congruence(&g).expect("square").scale(scale)
        }
        _ => {
            let p = random_psd_with(r, n);
            p.shift(-r.random_range(0.0..2.0) * p.trace() / n as f64).scale(scale)
        }
    }
}

/// Moves A along ±Id onto ∂F, returning A + t·Id with m ≥ 0 and t minimal
/// up to bisection accuracy. Returns A unchanged when no boundary point
/// exists on the line.
pub fn project_to_boundary(f: &Subequation, a: &SymMatrix) -> SymMatrix {
    let m = |t: f64| f.margin(&a.shift(t));
    let scale = 1.0 + a.frobenius();
    let (mut lo, mut hi);
    if m(0.0) >= 0.0 {
        hi = 0.0;
        lo = -scale;
        let mut k = 0;
        while m(lo) >= 0.0 {
            lo *= 2.0;
            k += 1;
            if k > 60 {
                return a.clone();
            }
        }
    } else {
        lo = 0.0;
        hi = scale;
        let mut k = 0;
        while m(hi) < 0.0 {
            hi *= 2.0;
            k += 1;
            if k > 60 {
                return a.clone();
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    a.shift(hi)
}

fn boundary_members(f: &Subequation, count: usize, seed: u64) -> Vec<SymMatrix> {
    let mut r = rng(seed);
    let raw: Vec<SymMatrix> = (0..count).map(|i| sample_matrix(&mut r, f.n, i)).collect();
    par::map(&raw, |a| project_to_boundary(f, a))
}

/// m(A) ≥ 0 and P ≥ 0 ⇒ m(A+P) ≥ −1e−9·(1+‖A+P‖).
pub fn check_positivity(f: &Subequation, count: usize, seed: u64) -> PropertyReport {
    let members = boundary_members(f, count, seed);
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let ps: Vec<SymMatrix> =
        (0..count).map(|_| random_psd_with(&mut r, f.n).scale(10f64.powf(r.random_range(-3.0..1.0)))).collect();
    let pairs: Vec<(&SymMatrix, &SymMatrix)> = members.iter().zip(&ps).collect();
    let worst = par::map(&pairs, |(a, p)| {
        let s = *a + *p;
        -f.margin(&s) / (1.0 + s.frobenius())
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new("positivity", &f.name, count, worst, MEMBER_TOL)
}

/// m(A) ≥ 0 ⇒ m(tA) ≥ −1e−9·(1+‖tA‖) for t ∈ {0, ½, 2, 10}.
pub fn check_cone(f: &Subequation, count: usize, seed: u64) -> PropertyReport {
    let members = boundary_members(f, count, seed);
    let worst = par::map(&members, |a| {
        CONE_SCALES
            .iter()
            .map(|&t| {
                let s = a.scale(t);
                -f.margin(&s) / (1.0 + s.frobenius())
            })
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new("cone", &f.name, count * CONE_SCALES.len(), worst, MEMBER_TOL)
}

fn group_element<R: Rng + ?Sized>(f: &Subequation, r: &mut R) -> Option<Mat> {
    match f.invariance {
        Invariance::Orthogonal => Some(random_rotation_with(r, f.n)),
        Invariance::Unitary | Invariance::Symplectic => f.structure().map(|s| random_structured_rotation(r, s)),
        Invariance::SampledSt | Invariance::None => None,
    }
}

/// |m(gAgᵀ) − m(A)| ≤ 1e−8·(1+|m(A)|) for random g in the declared group.
pub fn check_st_invariance(f: &Subequation, count: usize, seed: u64) -> PropertyReport {
    let mut r = rng(seed);
    if f.invariance == Invariance::SampledSt {
        let Some(sample) = f.grassmann_sample() else {
            return PropertyReport::skipped("st-invariance", &f.name, "no plane sample attached");
        };
        let tries: Vec<Mat> = (0..8).map(|_| random_rotation_with(&mut r, f.n)).collect();
        let keep: Vec<Mat> = tries.into_iter().filter(|g| sample.preserved_by(g)).collect();
        if keep.is_empty() {
            return PropertyReport::skipped(
                "st-invariance",
                &f.name,
                "no tested rotation approximately preserves the plane sample",
            );
        }
        let cases: Vec<(SymMatrix, Mat)> =
            (0..count).map(|i| (sample_matrix(&mut r, f.n, i), keep[i % keep.len()].clone())).collect();
        return invariance_report(f, &cases);
    }
    if group_element(f, &mut r).is_none() {
        return PropertyReport::skipped("st-invariance", &f.name, "no declared symmetry group");
    }
    let cases: Vec<(SymMatrix, Mat)> = (0..count)
        .map(|i| {
            let a = sample_matrix(&mut r, f.n, i);
            let g = group_element(f, &mut r).expect("checked above");
            (a, g)
        })
        .collect();
    invariance_report(f, &cases)
}

fn invariance_report(f: &Subequation, cases: &[(SymMatrix, Mat)]) -> PropertyReport {
    let worst = par::map(cases, |(a, g)| {
        let m0 = f.margin(a);
        let m1 = f.margin(&a.congruence(g).expect("square"));
        (m1 - m0).abs() / (1.0 + m0.abs())
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new("st-invariance", &f.name, cases.len(), worst, INVARIANCE_TOL)
}

/// 0 ∉ Int F, i.e. m(0) ≤ 1e−9.
pub fn check_maximum_principle(f: &Subequation) -> PropertyReport {
    let zero = SymMatrix::zeros(f.n);
    let m0 = f.margin(&zero);
    let mut rep = PropertyReport::new("maximum-principle", &f.name, 1, m0.max(0.0), member_tol(&zero));
    if !rep.pass {
        rep.note = Some("0 lies in the interior of F".into());
    }
    rep
}

/// δ·tr P ≤ F(A+P) − F(A) ≤ (1+δ)·tr P for F(A) = λ_min(A) + δ·tr(A).
pub fn check_uniform_ellipticity(f: &Subequation, count: usize, seed: u64) -> PropertyReport {
    let Some(delta) = f.operator_form() else {
        let mut rep = PropertyReport::new("uniform-ellipticity", &f.name, 0, f64::INFINITY, 0.0);
        rep.note = Some("margin is not of the form λ_min + δ·tr".into());
        return rep;
    };
    let mut r = rng(seed);
    let cases: Vec<(SymMatrix, SymMatrix)> = (0..count)
        .map(|i| {
            let a = sample_matrix(&mut r, f.n, i);
            let p = random_psd_with(&mut r, f.n).scale(10f64.powf(r.random_range(-2.0..1.0)));
            (a, p)
        })
        .collect();
    let worst = par::map(&cases, |(a, p)| {
        let diff = f.margin(&(a + p)) - f.margin(a);
        let tp = p.trace();
        let v = (delta * tp - diff).max(diff - (1.0 + delta) * tp).max(0.0);
        v / (1.0 + tp + a.frobenius())
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new("uniform-ellipticity", &f.name, count, worst, MEMBER_TOL).with_note(format!("delta = {delta}"))
}

/// Membership in F is monotone along A + t·Id.
pub fn check_shift_monotonicity(f: &Subequation, count: usize, seed: u64) -> PropertyReport {
    let mut r = rng(seed);
    let mats: Vec<SymMatrix> = (0..count).map(|i| sample_matrix(&mut r, f.n, i)).collect();
    let worst = par::map(&mats, |a| {
        let s = 1.0 + a.frobenius();
        let mut entered = false;
        let mut worst: f64 = 0.0;
        for k in -40..=40 {
            let b = a.shift(s * k as f64 / 20.0);
            let m = f.margin(&b);
            if entered {
                worst = worst.max(-m / (1.0 + b.frobenius()));
            }
            entered |= m >= 0.0;
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new("shift-monotonicity", &f.name, count, worst, MEMBER_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_passes_positivity_cone_and_maximum_principle() {
        let p = Subequation::positive(4).unwrap();
        assert!(check_positivity(&p, 200, 1).pass);
        assert!(check_cone(&p, 200, 1).pass);
        assert!(check_maximum_principle(&p).pass);
        assert!(check_st_invariance(&p, 100, 1).pass);
    }

    #[test]
    fn full_space_fails_maximum_principle() {
        let f = Subequation::full_space(3).unwrap();
        assert!(!check_maximum_principle(&f).pass);
    }

    #[test]
    fn boundary_projection_lands_on_boundary() {
        let f = Subequation::sigma_k(4, 2).unwrap();
        let mut r = rng(4);
        for i in 0..20 {
            let a = sample_matrix(&mut r, 4, i);
            let b = project_to_boundary(&f, &a);
            let m = f.margin(&b);
            assert!(m >= 0.0);
            assert!(f.margin(&b.shift(-1e-9 * (1.0 + b.frobenius()))) < 0.0);
        }
    }

    #[test]
    fn ue_not_applicable_to_sigma_k() {
        let f = Subequation::sigma_k(4, 2).unwrap();
        assert!(!check_uniform_ellipticity(&f, 10, 1).pass);
        let pd = Subequation::p_delta(3, 1.0).unwrap();
        assert!(check_uniform_ellipticity(&pd, 300, 1).pass);
    }

    #[test]
    fn wrong_invariance_is_detected() {
        // A margin depending on a fixed diagonal entry is not O(n)-invariant.
        let f = Subequation::positive(2).unwrap().complex_lift().unwrap();
        let mut g = f.clone();
        g.invariance = Invariance::Orthogonal;
        assert!(check_st_invariance(&f, 100, 3).pass);
        assert!(!check_st_invariance(&g, 100, 3).pass);
    }
}
