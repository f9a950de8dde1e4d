//! Seeded random matrices, frames and group elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::frame::Frame;
use super::matrix::{dot, norm, Mat, SymMatrix};
use super::structure::Structure;
use crate::error::{Error, Result};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let r = norm(&v);
        if r > 1e-8 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Symmetric matrix with independent N(0,1) entries on and above the diagonal.
pub fn gaussian_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(StandardNormal);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    SymMatrix::new(n, a).expect("finite entries")
}

/// Gram–Schmidt orthonormalization of `v` against `basis`, repeated once for
/// stability. Returns None when `v` is numerically in the span.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> Option<()> {
    let r0 = norm(v);
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let r = norm(v);
    if r <= 1e-8 * r0.max(1e-300) {
        return None;
    }
    for x in v.iter_mut() {
        *x /= r;
    }
    Some(())
}

fn gaussian_columns<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    while cols.len() < p {
        let mut v = gaussian_vec(rng, n);
        if orthonormalize(&mut v, &cols).is_some() {
            cols.push(v);
        }
    }
    cols
}

pub fn random_frame_with<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Result<Frame> {
    if p == 0 || p > n {
        return Err(Error::Param(format!("frame needs 1 ≤ p ≤ n, got p={p}, n={n}")));
    }
    Frame::new(Mat::from_columns(&gaussian_columns(rng, n, p)))
}

/// Haar-distributed orthogonal n×n matrix.
pub fn random_rotation_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    Mat::from_columns(&gaussian_columns(rng, n, n))
}

/// GᵀG for a Gaussian n×n matrix G.
pub fn random_psd_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let g = Mat::from_columns(&(0..n).map(|_| gaussian_vec(rng, n)).collect::<Vec<_>>());
    SymMatrix::from_mat(&g.transpose().matmul(&g).expect("square")).expect("square")
}

pub fn random_frame(n: usize, p: usize, seed: u64) -> Result<Frame> {
    random_frame_with(&mut rng(seed), n, p)
}

pub fn random_rotation(n: usize, seed: u64) -> Mat {
    random_rotation_with(&mut rng(seed), n)
}

pub fn random_psd(n: usize, seed: u64) -> SymMatrix {
    random_psd_with(&mut rng(seed), n)
}

/// Random orthogonal matrix commuting with every matrix of `s`: an element
/// of U(n) for a complex structure, of Sp(n) for a quaternionic one.
///
/// The columns are v_i, S₁v_i, S₂v_i, … placed at the positions of e_i,
/// S₁e_i, …, so that g S e_i = S g e_i for every basis vector.
pub fn random_structured_rotation<R: Rng + ?Sized>(rng: &mut R, s: &Structure) -> Mat {
    let dim = s.real_dim();
    let mats = s.matrices();
    let blocks = mats.len() + 1;
    let m = dim / blocks;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut out = Mat::zeros(dim, dim);
    let mut i = 0;
    while i < m {
        let mut v = gaussian_vec(rng, dim);
        if orthonormalize(&mut v, &cols).is_none() {
            continue;
        }
        let images: Vec<Vec<f64>> = mats.iter().map(|j| j.apply(&v)).collect();
        for (r, x) in v.iter().enumerate() {
            out.set(r, i, *x);
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for (j, img) in mats.iter().zip(&images) {
            // S e_i = ±e_c, so column c holds ±S v_i.
            let se = j.apply(&e);
            let c = se.iter().position(|x| x.abs() > 0.5).expect("signed permutation");
            for (r, x) in img.iter().enumerate() {
                out.set(r, c, se[c] * x);
            }
        }
        cols.push(v);
        cols.extend(images);
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexStructure, QuaternionStructure};

    #[test]
    fn seeded_outputs_are_deterministic() {
        assert_eq!(random_rotation(5, 7), random_rotation(5, 7));
        assert_eq!(random_psd(4, 1), random_psd(4, 1));
        assert_ne!(random_psd(4, 1), random_psd(4, 2));
    }

    #[test]
    fn rotations_are_orthogonal_and_psd_is_psd() {
        for seed in 0..10 {
            let g = random_rotation(6, seed);
            let gtg = g.transpose().matmul(&g).unwrap();
            assert!(gtg.max_abs_diff(&Mat::identity(6)) < 1e-10);
            assert!(random_psd(5, seed).eigs()[0] >= -1e-10);
        }
    }

    #[test]
    fn structured_rotations_commute_with_structure() {
        let mut r = rng(3);
        for s in [
            Structure::Complex(ComplexStructure::standard(3)),
            Structure::Quaternionic(QuaternionStructure::standard(2)),
        ] {
            let g = random_structured_rotation(&mut r, &s);
            let d = s.real_dim();
            assert!(g.transpose().matmul(&g).unwrap().max_abs_diff(&Mat::identity(d)) < 1e-10);
            for j in s.matrices() {
                let lhs = g.matmul(j).unwrap();
                let rhs = j.matmul(&g).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            }
        }
    }
}
