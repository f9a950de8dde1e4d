use serde::{Deserialize, Serialize};

use super::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};

/// n×p matrix with orthonormal columns spanning a p-plane W ⊂ ℝⁿ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Frame {
    columns: Mat,
}

impl Frame {
    pub const ORTHO_TOL: f64 = 1e-10;

    pub fn new(columns: Mat) -> Result<Self> {
        let gram = columns.transpose().matmul(&columns)?;
        let err = gram.max_abs_diff(&Mat::identity(columns.cols()));
        if err > Self::ORTHO_TOL {
            return Err(Error::Invariant(format!("frame columns not orthonormal (error {err:e})")));
        }
        Ok(Self { columns })
    }

    /// Frame spanned by the given coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let cols: Vec<Vec<f64>> = axes
            .iter()
            .map(|&a| {
                let mut v = vec![0.0; n];
                v[a] = 1.0;
                v
            })
            .collect();
        Self::new(Mat::from_columns(&cols))
    }

    pub fn n(&self) -> usize {
        self.columns.rows()
    }

    pub fn p(&self) -> usize {
        self.columns.cols()
    }

    pub fn columns(&self) -> &Mat {
        &self.columns
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.columns.column(j)
    }

    /// Orthogonal projection of v onto W.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let coeffs = self.columns.transpose().apply(v);
        self.columns.apply(&coeffs)
    }

    /// Euclidean distance from v to W.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let pr = self.project(v);
        v.iter().zip(&pr).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// g·W for an orthogonal g.
    pub fn rotate(&self, g: &Mat) -> Result<Frame> {
        Frame::new(g.matmul(&self.columns)?)
    }
}

/// tr_W(A) = tr(WᵀAW).
pub fn trace_over_subspace(a: &SymMatrix, w: &Frame) -> Result<f64> {
    if a.n() != w.n() {
        return Err(Error::Domain("frame and matrix dimensions differ".into()));
    }
    Ok((0..w.p()).map(|j| a.quad_form(&w.column(j))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{characteristic_matrix, projector_onto, UnitVector};

    #[test]
    fn traces_over_planes() {
        let w = Frame::coordinate(4, &[0, 2]).unwrap();
        assert_eq!(trace_over_subspace(&SymMatrix::identity(4), &w).unwrap(), 2.0);
        let e = UnitVector::basis(4, 2);
        assert_eq!(trace_over_subspace(&projector_onto(&e), &w).unwrap(), 1.0);
    }

    #[test]
    fn trace_of_test_matrix_is_linear_in_pbar() {
        // tr_W(P_{e⊥} − (p̄−1)P_e) = p − c·p̄ with c = tr_W(P_e).
        let s = 0.6f64;
        let e = UnitVector::new(vec![s, (1.0 - s * s).sqrt(), 0.0]).unwrap();
        let w = Frame::coordinate(3, &[0, 2]).unwrap();
        let c = trace_over_subspace(&projector_onto(&e), &w).unwrap();
        for pbar in [1.0, 1.7, 4.0] {
            let t = trace_over_subspace(&characteristic_matrix(&e, pbar), &w).unwrap();
            assert!((t - (2.0 - c * pbar)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let m = Mat::from_columns(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(Frame::new(m).is_err());
    }
}
