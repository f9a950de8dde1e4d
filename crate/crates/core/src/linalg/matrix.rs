use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major real matrix. Used for rotations, frames and structures.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Domain(format!(
                "matmul shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:+.6e}", self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Real symmetric n×n matrix. Symmetry is exact: the constructor averages
/// the input with its transpose.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Symmetrizes a row-major n×n array.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Domain(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        let mut m = Self { n, data: entries };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        m
    }

    /// Symmetric part ½(M + Mᵀ) of a square general matrix.
    pub fn from_mat(m: &Mat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Domain("matrix is not square".into()));
        }
        Ok(Self::from_fn(m.rows(), |i, j| m.get(i, j)))
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Outer product v vᵀ.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// A + t·Id.
    pub fn shift(&self, t: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += t;
        }
        m
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += v[i] * self.get(i, j) * v[j];
            }
        }
        s
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// g A gᵀ for a square g of matching size.
    pub fn congruence(&self, g: &Mat) -> Result<SymMatrix> {
        if g.cols() != self.n {
            return Err(Error::Domain("congruence shape mismatch".into()));
        }
        let ga = g.matmul(&self.to_mat())?;
        let gagt = ga.matmul(&g.transpose())?;
        SymMatrix::from_mat(&gagt)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        super::eigen::jacobi(self).map(|e| e.values)
    }

    /// Ascending eigenvalues; panics only if the Jacobi sweep budget is
    /// exhausted, which does not happen for finite symmetric input of the
    /// sizes used here.
    pub fn eigs(&self) -> Vec<f64> {
        self.eigenvalues().expect("Jacobi iteration failed to converge")
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.to_mat(), f)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SymMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SymMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        &self + &rhs
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        &self - &rhs
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        self.scale(s)
    }
}

impl Mul<f64> for SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        self.scale(s)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scale(-1.0)
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scale(-1.0)
    }
}

/// Unit vector in ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = norm(&components);
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Invariant(format!("vector norm {norm} is not 1")));
        }
        Ok(Self(components))
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let norm = norm(v);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self(v.iter().map(|x| x / norm).collect()))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// P_e = e eᵀ.
pub fn projector_onto(e: &UnitVector) -> SymMatrix {
    SymMatrix::outer(e.as_slice())
}

/// P_{e⊥} = Id − e eᵀ.
pub fn projector_perp(e: &UnitVector) -> SymMatrix {
    &SymMatrix::identity(e.n()) - &projector_onto(e)
}

/// P_{e⊥} − (p̄−1)P_e, the test matrix for increasing characteristics.
pub fn characteristic_matrix(e: &UnitVector, pbar: f64) -> SymMatrix {
    &projector_perp(e) - &projector_onto(e).scale(pbar - 1.0)
}

/// (lam/|x|)·P_{[x]⊥} + a·P_{[x]}: the Hessian of ψ(|x|) when lam = ψ′ and a = ψ″.
pub fn radial_hessian(lam: f64, a: f64, x: &[f64]) -> Result<SymMatrix> {
    let r = norm(x);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Domain("radial Hessian needs x ≠ 0".into()));
    }
    let e = UnitVector::normalized(x)?;
    Ok(&projector_perp(&e).scale(lam / r) + &projector_onto(&e).scale(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projector_identities() {
        let e = UnitVector::basis(2, 0);
        assert_eq!(projector_onto(&e), SymMatrix::diag(&[1.0, 0.0]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = UnitVector::new(vec![s, s]).unwrap();
        let pe = projector_onto(&e);
        for i in 0..2 {
            for j in 0..2 {
                assert!((pe.get(i, j) - 0.5).abs() < 1e-15);
            }
        }
        let sum = &pe + &projector_perp(&e);
        assert!(sum.max_abs_diff(&SymMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn non_unit_vector_rejected() {
        assert!(matches!(UnitVector::new(vec![1.0, 1.0]), Err(Error::Invariant(_))));
    }

    #[test]
    fn radial_hessian_identity_case() {
        let x = [0.3, -1.2, 0.7];
        let r = norm(&x);
        let h = radial_hessian(r, 1.0, &x).unwrap();
        assert!(h.max_abs_diff(&SymMatrix::identity(3)) < 1e-14);
        assert!(radial_hessian(1.0, 1.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn constructor_symmetrizes() {
        let m = SymMatrix::new(2, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert!(SymMatrix::new(2, vec![1.0; 3]).is_err());
    }
}
