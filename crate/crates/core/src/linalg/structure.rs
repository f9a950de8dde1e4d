//! Complex and quaternionic structures on ℝ^{2n} and ℝ^{4n}, and the
//! corresponding hermitian parts of real symmetric matrices.

use serde::{Deserialize, Serialize};

use super::eigen::reduce_multiplicity;
use super::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};

/// J(x, y) = (−y, x) on ℝ^{2n} = ℂⁿ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexStructure {
    pub n: usize,
    pub j: Mat,
}

/// Left multiplication by i, j, k on ℝ^{4n} = ℍⁿ, with coordinates split
/// into four blocks (a, b, c, d):
/// I(a,b,c,d) = (−b,a,−d,c), J(a,b,c,d) = (−c,d,a,−b), K = IJ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuaternionStructure {
    pub n: usize,
    pub i: Mat,
    pub j: Mat,
    pub k: Mat,
}

/// Signed block permutation: `blocks[t] = (s, sign)` means output block t is
/// sign · input block s.
fn block_map(n: usize, blocks: &[(usize, f64)]) -> Mat {
    let m = blocks.len();
    let mut out = Mat::zeros(m * n, m * n);
    for (t, &(s, sign)) in blocks.iter().enumerate() {
        for i in 0..n {
            out.set(t * n + i, s * n + i, sign);
        }
    }
    out
}

impl ComplexStructure {
    pub fn standard(n: usize) -> Self {
        Self { n, j: block_map(n, &[(1, -1.0), (0, 1.0)]) }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn structures(&self) -> Vec<&Mat> {
        vec![&self.j]
    }
}

impl QuaternionStructure {
    pub fn standard(n: usize) -> Self {
        Self {
            n,
            i: block_map(n, &[(1, -1.0), (0, 1.0), (3, -1.0), (2, 1.0)]),
            j: block_map(n, &[(2, -1.0), (3, 1.0), (0, 1.0), (1, -1.0)]),
            k: block_map(n, &[(3, -1.0), (2, -1.0), (1, 1.0), (0, 1.0)]),
        }
    }

    pub fn real_dim(&self) -> usize {
        4 * self.n
    }

    pub fn structures(&self) -> Vec<&Mat> {
        vec![&self.i, &self.j, &self.k]
    }
}

/// A complex or quaternionic structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Structure {
    Complex(ComplexStructure),
    Quaternionic(QuaternionStructure),
}

impl Structure {
    pub fn real_dim(&self) -> usize {
        match self {
            Structure::Complex(c) => c.real_dim(),
            Structure::Quaternionic(q) => q.real_dim(),
        }
    }

    /// Multiplicity of each eigenvalue of a hermitian part.
    pub fn multiplicity(&self) -> usize {
        match self {
            Structure::Complex(_) => 2,
            Structure::Quaternionic(_) => 4,
        }
    }

    pub fn matrices(&self) -> Vec<&Mat> {
        match self {
            Structure::Complex(c) => c.structures(),
            Structure::Quaternionic(q) => q.structures(),
        }
    }
}

/// A_C = ½(A − JAJ) or A_H = ¼(A − IAI − JAJ − KAK).
pub fn hermitian_part(a: &SymMatrix, s: &Structure) -> Result<SymMatrix> {
    if a.n() != s.real_dim() {
        return Err(Error::Domain(format!("matrix of size {} does not match structure on ℝ^{}", a.n(), s.real_dim())));
    }
    let am = a.to_mat();
    let mut acc = a.clone();
    let mats = s.matrices();
    for m in &mats {
        let mam = m.matmul(&am)?.matmul(m)?;
        acc = &acc - &SymMatrix::from_mat(&mam)?;
    }
    Ok(acc.scale(1.0 / (mats.len() + 1) as f64))
}

/// Deduplicated ascending spectrum of a hermitian part.
pub fn reduced_eigenvalues(a: &SymMatrix, s: &Structure) -> Result<Vec<f64>> {
    let h = hermitian_part(a, s)?;
    reduce_multiplicity(&h.eigenvalues()?, s.multiplicity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{characteristic_matrix, UnitVector};

    fn close(a: &Mat, b: &Mat) -> bool {
        a.max_abs_diff(b) < 1e-12
    }

    #[test]
    fn complex_structure_squares_to_minus_identity() {
        let c = ComplexStructure::standard(3);
        let jj = c.j.matmul(&c.j).unwrap();
        assert!(close(&jj, &Mat::identity(6).scale(-1.0)));
        assert!(close(&c.j.transpose().matmul(&c.j).unwrap(), &Mat::identity(6)));
        // J(x, 0) = (0, x)
        assert_eq!(c.j.apply(&[1.0, 2.0, 3.0, 0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn quaternion_relations() {
        let q = QuaternionStructure::standard(2);
        let id = Mat::identity(8);
        for m in q.structures() {
            assert!(close(&m.matmul(m).unwrap(), &id.scale(-1.0)));
            assert!(close(&m.transpose().matmul(m).unwrap(), &id));
        }
        assert!(close(&q.i.matmul(&q.j).unwrap(), &q.k));
    }

    #[test]
    fn hermitian_part_of_identity() {
        let s = Structure::Complex(ComplexStructure::standard(2));
        let h = hermitian_part(&SymMatrix::identity(4), &s).unwrap();
        assert!(h.max_abs_diff(&SymMatrix::identity(4)) < 1e-15);
        assert_eq!(reduced_eigenvalues(&SymMatrix::identity(4), &s).unwrap(), vec![1.0, 1.0]);
        assert!(hermitian_part(&SymMatrix::identity(3), &s).is_err());
    }

    #[test]
    fn hermitian_part_of_characteristic_matrix() {
        // On ℂⁿ the p-test matrix has complex part P_{ℂe⊥} − (p/2 − 1)P_{ℂe}.
        for (s, factor) in [
            (Structure::Complex(ComplexStructure::standard(3)), 2.0),
            (Structure::Quaternionic(QuaternionStructure::standard(2)), 4.0),
        ] {
            let n = s.real_dim();
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            v[1] = 0.5;
            let e = UnitVector::normalized(&v).unwrap();
            let p = 3.0;
            let red = reduced_eigenvalues(&characteristic_matrix(&e, p), &s).unwrap();
            assert!((red[0] - (1.0 - p / factor)).abs() < 1e-12, "{red:?}");
            for r in &red[1..] {
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }
}
