//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

use super::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAG_TOL: f64 = 1e-12;

/// Eigen-decomposition A = Q diag(values) Qᵀ with ascending values; the
/// columns of `vectors` are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
    pub sweeps: usize,
}

impl Eigen {
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.values.len();
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.vectors.get(i, k) * self.values[k] * self.vectors.get(j, k)).sum()
        })
    }
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

/// Ascending eigenvalues and eigenvectors of `m`.
pub fn jacobi(m: &SymMatrix) -> Result<Eigen> {
    let n = m.n();
    let mut a = m.as_slice().to_vec();
    let mut v = Mat::identity(n);
    let scale = m.frobenius();
    let mut sweeps = 0;
    if scale > 0.0 {
        loop {
            if off_norm(&a, n) <= OFF_DIAG_TOL * scale {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::Solver(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(Eigen { values, vectors, sweeps })
}

/// Groups an ascending spectrum into consecutive blocks of size `mult` and
/// returns the block means. Fails if a block spreads wider than the
/// clustering tolerance 1e−8·(1+ρ).
pub fn reduce_multiplicity(values: &[f64], mult: usize) -> Result<Vec<f64>> {
    if mult == 0 || !values.len().is_multiple_of(mult) {
        return Err(Error::Domain(format!("spectrum of length {} is not a multiple of {mult}", values.len())));
    }
    let rho = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-8 * (1.0 + rho);
    values
        .chunks(mult)
        .map(|c| {
            let spread = c[c.len() - 1] - c[0];
            if spread > tol {
                Err(Error::Numerical(format!("eigenvalue block spread {spread:e} exceeds clustering tolerance")))
            } else {
                Ok(c.iter().sum::<f64>() / mult as f64)
            }
        })
        .collect()
}

/// Block means without the clustering check.
pub(crate) fn block_means(values: &[f64], mult: usize) -> Vec<f64> {
    values.chunks(mult).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{characteristic_matrix, UnitVector};

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(SymMatrix::identity(3).eigs(), vec![1.0, 1.0, 1.0]);
        assert_eq!(SymMatrix::diag(&[2.0, -1.0, 0.0]).eigs(), vec![-1.0, 0.0, 2.0]);
        assert_eq!(SymMatrix::zeros(4).eigs(), vec![0.0; 4]);
    }

    #[test]
    fn characteristic_matrix_spectrum() {
        let e = UnitVector::normalized(&[1.0, 2.0, -1.0, 0.5]).unwrap();
        let ev = characteristic_matrix(&e, 3.0).eigs();
        let want = [-2.0, 1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b, c]] has eigenvalues (a+c)/2 ± sqrt(((a−c)/2)² + b²).
        let (a, b, c) = (1.5, -0.7, -2.25);
        let m = SymMatrix::new(2, vec![a, b, b, c]).unwrap();
        let h = ((a - c) / 2.0f64).hypot(b);
        let ev = m.eigs();
        assert!((ev[0] - ((a + c) / 2.0 - h)).abs() < 1e-14);
        assert!((ev[1] - ((a + c) / 2.0 + h)).abs() < 1e-14);
    }

    #[test]
    fn reduce_rejects_split_blocks() {
        assert_eq!(reduce_multiplicity(&[1.0, 1.0, 2.0, 2.0], 2).unwrap(), vec![1.0, 2.0]);
        assert!(reduce_multiplicity(&[1.0, 1.5, 2.0, 2.0], 2).is_err());
        assert!(reduce_multiplicity(&[1.0, 1.0, 2.0], 2).is_err());
    }
}
