//! Built-in fields with known subharmonicity certificates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Certificate, Field, ScalarField};
use crate::linalg::{dot, norm, SymMatrix};
use crate::radial::RadialProfile;
use crate::riesz::{KernelSpec, Normalization};
use crate::subeq::Params;

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn check_point(n: usize, x: &[f64], what: &str) -> Result<()> {
    if x.len() != n || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Param(format!("{what} must be a finite point of ℝ^{n}")));
    }
    Ok(())
}

/// Certificate of a kernel-like field of characteristic p: convex P_p when
/// p ≤ n, otherwise only the largest class P_p^{min/max}.
fn kernel_certificate(n: usize, p: f64) -> Certificate {
    if p <= n as f64 {
        Certificate { subequation: format!("P_{p}"), p: Some(p), convex: true }
    } else {
        Certificate { subequation: format!("P_{p}^min/max"), p: Some(p), convex: false }
    }
}

/// u(x) = Θ·K_p(|x − c|).
#[derive(Clone, Debug)]
pub struct RieszKernel {
    pub n: usize,
    pub theta: f64,
    pub kernel: KernelSpec,
    pub center: Vec<f64>,
}

impl RieszKernel {
    pub fn new(n: usize, theta: f64, kernel: KernelSpec, center: Option<Vec<f64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Param("fields need n ≥ 2".into()));
        }
        let center = center.unwrap_or_else(|| vec![0.0; n]);
        check_point(n, &center, "kernel center")?;
        if !theta.is_finite() {
            return Err(Error::Param(format!("Θ must be finite, got {theta}")));
        }
        Ok(Self { n, theta, kernel, center })
    }
}

impl ScalarField for RieszKernel {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let k = self.kernel.eval(dist(x, &self.center));
        if self.theta == 0.0 {
            0.0
        } else {
            self.theta * k
        }
    }

    fn name(&self) -> String {
        let bar = if self.kernel.normalization == Normalization::Barred { "bar" } else { "" };
        format!("{}*K{bar}_{}(|x-c|)", self.theta, self.kernel.p)
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        vec![self.center.clone()]
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        (self.theta >= 0.0).then(|| self.theta * self.kernel.eval(dist(x0, &self.center) + r))
    }

    fn certificate(&self) -> Certificate {
        if self.theta >= 0.0 {
            kernel_certificate(self.n, self.kernel.p)
        } else {
            Certificate::none()
        }
    }
}

/// Θ·K_p(|x − c|) in standard normalization.
pub fn riesz_kernel(n: usize, theta: f64, p: f64, center: Option<Vec<f64>>) -> Result<Field> {
    Ok(Arc::new(RieszKernel::new(n, theta, KernelSpec::standard(p)?, center)?))
}

/// u(x) = ψ(|x − c|).
#[derive(Clone, Debug)]
pub struct RadialField {
    pub n: usize,
    pub center: Vec<f64>,
    pub profile: RadialProfile,
    /// ψ non-decreasing, so the ball maximum sits on the far side.
    pub increasing: bool,
    pub cert: Certificate,
}

impl ScalarField for RadialField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.profile.eval(dist(x, &self.center))
    }

    fn name(&self) -> String {
        format!("{}(|x-c|)", self.profile.name)
    }

    fn domain_radius(&self) -> f64 {
        self.profile.r_max
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        vec![self.center.clone()]
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        self.increasing.then(|| self.profile.eval(dist(x0, &self.center) + r))
    }

    fn certificate(&self) -> Certificate {
        self.cert.clone()
    }
}

/// K_p(|x|) + |x|², subharmonic for every F of characteristic p that
/// contains its kernels.
pub fn radial_perturbed(n: usize, p: f64) -> Result<Field> {
    if n < 2 {
        return Err(Error::Param("fields need n ≥ 2".into()));
    }
    let k = KernelSpec::standard(p)?;
    Ok(Arc::new(RadialField {
        n,
        center: vec![0.0; n],
        profile: RadialProfile::kernel_plus_square(k),
        increasing: true,
        cert: kernel_certificate(n, p),
    }))
}

/// log|z_j| on ℂ^m with z_j = x_j + i·x_{j+m}.
#[derive(Clone, Debug)]
pub struct LogModulus {
    pub m: usize,
    pub slot: usize,
}

impl LogModulus {
    pub fn new(m: usize, slot: usize) -> Result<Self> {
        if m == 0 || slot >= m {
            return Err(Error::Param(format!("log-modulus needs slot < m, got slot={slot}, m={m}")));
        }
        Ok(Self { m, slot })
    }

    fn modulus(&self, x: &[f64]) -> f64 {
        x[self.slot].hypot(x[self.slot + self.m])
    }
}

impl ScalarField for LogModulus {
    fn dim(&self) -> usize {
        2 * self.m
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.modulus(x).ln()
    }

    fn name(&self) -> String {
        format!("log|z_{}| on C^{}", self.slot + 1, self.m)
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; 2 * self.m]]
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        Some((self.modulus(x0) + r).ln())
    }

    fn certificate(&self) -> Certificate {
        Certificate { subequation: "P^C".into(), p: Some(2.0), convex: true }
    }
}

/// K̄_p(|x′|) with x′ the first m coordinates of ℝⁿ.
#[derive(Clone, Debug)]
pub struct PartialKernel {
    pub n: usize,
    pub m: usize,
    pub kernel: KernelSpec,
}

impl PartialKernel {
    pub fn new(n: usize, m: usize, p: f64) -> Result<Self> {
        if !(2 <= m && m <= n) {
            return Err(Error::Param(format!("partial kernel needs 2 ≤ m ≤ n, got m={m}, n={n}")));
        }
        Ok(Self { n, m, kernel: KernelSpec::barred(p)? })
    }

    fn slice_norm(&self, x: &[f64]) -> f64 {
        norm(&x[..self.m])
    }
}

impl ScalarField for PartialKernel {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.kernel.eval(self.slice_norm(x))
    }

    fn name(&self) -> String {
        format!("Kbar_{}(|x'|), x' in R^{} of R^{}", self.kernel.p, self.m, self.n)
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.n]]
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        Some(self.kernel.eval(self.slice_norm(x0) + r))
    }

    fn certificate(&self) -> Certificate {
        Certificate { subequation: format!("P_{}^min/max", self.kernel.p), p: Some(self.kernel.p), convex: false }
    }
}

/// Σ m_i K_p(|x − a_i|) with m_i ≥ 0.
#[derive(Clone, Debug)]
pub struct NewtonianPotential {
    pub n: usize,
    pub kernel: KernelSpec,
    pub masses: Vec<(f64, Vec<f64>)>,
}

impl NewtonianPotential {
    pub fn new(n: usize, p: f64, masses: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Param("potential needs at least one mass".into()));
        }
        for (m, a) in &masses {
            if !(*m >= 0.0 && m.is_finite()) {
                return Err(Error::Param(format!("masses must be non-negative, got {m}")));
            }
            check_point(n, a, "mass location")?;
        }
        Ok(Self { n, kernel: KernelSpec::standard(p)?, masses })
    }

    /// Mass carried by the point x.
    pub fn mass_at(&self, x: &[f64]) -> f64 {
        self.masses.iter().filter(|(_, a)| dist(a, x) == 0.0).map(|(m, _)| m).sum()
    }
}

impl ScalarField for NewtonianPotential {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.masses.iter().filter(|(m, _)| *m > 0.0).map(|(m, a)| m * self.kernel.eval(dist(x, a))).sum()
    }

    fn name(&self) -> String {
        format!("K_{} * nu ({} masses)", self.kernel.p, self.masses.len())
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        self.masses.iter().map(|(_, a)| a.clone()).collect()
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        match self.masses.as_slice() {
            [(m, a)] => Some(m * self.kernel.eval(dist(x0, a) + r)),
            _ => None,
        }
    }

    fn certificate(&self) -> Certificate {
        kernel_certificate(self.n, self.kernel.p)
    }
}

/// Pointwise maximum of fields.
pub struct MaxOf {
    pub parts: Vec<Field>,
}

impl MaxOf {
    pub fn new(parts: Vec<Field>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Param("max needs at least one field".into()));
        };
        if parts.iter().any(|f| f.dim() != first.dim()) {
            return Err(Error::Param("max of fields of different dimensions".into()));
        }
        Ok(Self { parts })
    }
}

impl ScalarField for MaxOf {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.parts.iter().map(|f| f.eval(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn name(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|f| f.name()).collect();
        format!("max({})", names.join(", "))
    }

    fn domain_radius(&self) -> f64 {
        self.parts.iter().map(|f| f.domain_radius()).fold(f64::INFINITY, f64::min)
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        self.parts.iter().flat_map(|f| f.singular_set()).collect()
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        self.parts.iter().map(|f| f.ball_max(x0, r)).try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
    }

    /// The class shared by all parts; a max of F-subharmonics is F-subharmonic.
    fn certificate(&self) -> Certificate {
        let c = self.parts[0].certificate();
        if self.parts.iter().all(|f| f.certificate() == c) {
            c
        } else {
            Certificate::none()
        }
    }
}

/// u + ½xᵀAx.
pub struct PlusQuadratic {
    pub field: Field,
    pub a: SymMatrix,
    psd: bool,
}

impl PlusQuadratic {
    pub fn new(field: Field, a: SymMatrix) -> Result<Self> {
        if a.n() != field.dim() {
            return Err(Error::Param("quadratic term has the wrong size".into()));
        }
        let psd = a.eigenvalues()?[0] >= -1e-12 * (1.0 + a.frobenius());
        Ok(Self { field, a, psd })
    }
}

impl ScalarField for PlusQuadratic {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.field.eval(x) + 0.5 * self.a.quad_form(x)
    }

    fn name(&self) -> String {
        format!("{} + x'Ax/2", self.field.name())
    }

    fn domain_radius(&self) -> f64 {
        self.field.domain_radius()
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        self.field.singular_set()
    }

    /// Adding a positive semidefinite Hessian keeps u inside F since F + P ⊂ F.
    fn certificate(&self) -> Certificate {
        if self.psd {
            self.field.certificate()
        } else {
            Certificate::none()
        }
    }
}

/// ½xᵀAx + b·x + c.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
    lambda_max: f64,
    psd: bool,
}

impl Quadratic {
    pub fn new(a: SymMatrix, b: Vec<f64>, c: f64) -> Result<Self> {
        check_point(a.n(), &b, "linear term")?;
        let eigs = a.eigenvalues()?;
        let psd = eigs[0] >= -1e-12 * (1.0 + a.frobenius());
        Ok(Self { lambda_max: eigs[eigs.len() - 1], psd, a, b, c })
    }
}

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.a.quad_form(x) + dot(&self.b, x) + self.c
    }

    fn name(&self) -> String {
        "quadratic".into()
    }

    fn ball_max(&self, x0: &[f64], r: f64) -> Option<f64> {
        let centred = x0.iter().all(|v| *v == 0.0) && self.b.iter().all(|v| *v == 0.0);
        centred.then(|| self.c + 0.5 * self.lambda_max.max(0.0) * r * r)
    }

    /// A convex quadratic is subharmonic for every subequation.
    fn certificate(&self) -> Certificate {
        if self.psd {
            Certificate { subequation: "P".into(), p: None, convex: true }
        } else {
            Certificate::none()
        }
    }
}

pub fn constant(n: usize, c: f64) -> Field {
    Arc::new(Quadratic::new(SymMatrix::zeros(n), vec![0.0; n], c).expect("finite"))
}

/// max(K_p(|x|), K_p(|x − a|)) in standard normalization.
pub fn max_of_kernels(n: usize, p: f64, a: Vec<f64>) -> Result<Field> {
    Ok(Arc::new(MaxOf::new(vec![riesz_kernel(n, 1.0, p, None)?, riesz_kernel(n, 1.0, p, Some(a))?])?))
}

/// K_p(|x|) + K_p(|x − a|).
pub fn two_kernels(n: usize, p: f64, a: Vec<f64>) -> Result<Field> {
    Ok(Arc::new(NewtonianPotential::new(n, p, vec![(1.0, vec![0.0; n]), (1.0, a)])?))
}

/// Names accepted by [`catalog_field`].
pub const FIELD_NAMES: &[&str] = &[
    "riesz",
    "radial-perturbed",
    "log-modulus",
    "partial-kernel",
    "newtonian",
    "max-kernels",
    "two-kernels",
    "quadratic",
    "constant",
];

fn get(params: &Params, key: &str, default: Option<f64>) -> Result<f64> {
    params.get(key).copied().or(default).ok_or_else(|| Error::Param(format!("missing field parameter '{key}'")))
}

fn offset_point(n: usize, dist: f64) -> Vec<f64> {
    let mut a = vec![0.0; n];
    a[0] = dist;
    a
}

/// A catalog field by name. Parameters: `theta`, `p`, `m`, `a` (distance
/// of the second point along e₁), `mass0`, `mass1`, `c`.
pub fn catalog_field(name: &str, n: usize, params: &Params) -> Result<Field> {
    match name {
        "riesz" => riesz_kernel(n, get(params, "theta", Some(1.0))?, get(params, "p", None)?, None),
        "radial-perturbed" => radial_perturbed(n, get(params, "p", None)?),
        "log-modulus" => {
            if !n.is_multiple_of(2) {
                return Err(Error::Param(format!("log-modulus needs even real dimension, got {n}")));
            }
            Ok(Arc::new(LogModulus::new(n / 2, 0)?))
        }
        "partial-kernel" => {
            let m = get(params, "m", Some(2.0))?;
            if m.fract() != 0.0 || m < 0.0 {
                return Err(Error::Param(format!("m must be a non-negative integer, got {m}")));
            }
            Ok(Arc::new(PartialKernel::new(n, m as usize, get(params, "p", None)?)?))
        }
        "newtonian" => {
            let a = offset_point(n, get(params, "a", Some(1.0))?);
            let masses = vec![(get(params, "mass0", Some(1.0))?, vec![0.0; n]), (get(params, "mass1", Some(1.0))?, a)];
            Ok(Arc::new(NewtonianPotential::new(n, get(params, "p", None)?, masses)?))
        }
        "max-kernels" => max_of_kernels(n, get(params, "p", None)?, offset_point(n, get(params, "a", Some(1.0))?)),
        "two-kernels" => two_kernels(n, get(params, "p", None)?, offset_point(n, get(params, "a", Some(1.0))?)),
        "quadratic" => Ok(Arc::new(Quadratic::new(SymMatrix::identity(n), offset_point(n, 1.0), 0.0)?)),
        "constant" => Ok(constant(n, get(params, "c", Some(0.0))?)),
        other => Err(Error::Param(format!("unknown field '{other}' (known: {})", FIELD_NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{finite_diff_hessian, sample::rng, sample::unit_vec};
    use crate::subeq::Subequation;

    #[test]
    fn single_mass_potential_is_the_kernel() {
        let u = NewtonianPotential::new(3, 3.0, vec![(1.0, vec![0.0; 3])]).unwrap();
        let k = riesz_kernel(3, 1.0, 3.0, None).unwrap();
        for x in [[0.3, 0.1, -0.2], [2.0, 0.0, 1.0]] {
            assert_eq!(u.eval(&x), k.eval(&x));
        }
        assert_eq!(u.ball_max(&[0.0; 3], 0.5), k.ball_max(&[0.0; 3], 0.5));
    }

    #[test]
    fn partial_kernel_sits_on_the_minmax_boundary() {
        // Hessian spectrum (−(p−1), 0, …, 0, 1, …, 1)/|x′|^p.
        let (n, m, p) = (5, 3, 3.0);
        let u = PartialKernel::new(n, m, p).unwrap();
        let f = Subequation::min_max(n, p).unwrap();
        let mut r = rng(4);
        for _ in 0..20 {
            let x: Vec<f64> = unit_vec(&mut r, n);
            let h = finite_diff_hessian(&u, &x, None).unwrap();
            let t = norm(&x[..m]).powf(p);
            let e = h.scale(t).eigenvalues().unwrap();
            assert!((e[0] + (p - 1.0)).abs() < 1e-5, "{e:?}");
            assert!(e[1].abs() < 1e-5 && (e[n - 1] - 1.0).abs() < 1e-5);
            assert!(f.margin(&h) >= -1e-6 * (1.0 + h.frobenius()));
        }
        assert!(PartialKernel::new(4, 1, 3.0).is_err());
    }

    #[test]
    fn max_propagates_certificates_and_ball_max() {
        let u = max_of_kernels(3, 3.0, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(u.certificate(), riesz_kernel(3, 1.0, 3.0, None).unwrap().certificate());
        let expect = (-1.0 / 0.75f64).max(-1.0 / 0.25);
        assert_eq!(u.ball_max(&[0.5, 0.0, 0.0], 0.25), Some(expect));
        let mixed =
            MaxOf::new(vec![riesz_kernel(3, 1.0, 3.0, None).unwrap(), riesz_kernel(3, 1.0, 2.5, None).unwrap()]);
        assert!(mixed.unwrap().certificate().is_none());
    }

    #[test]
    fn catalog_names_build() {
        let p = crate::subeq::registry::params(&[("p", 3.0)]);
        for name in FIELD_NAMES {
            let f = catalog_field(name, 4, &p).unwrap();
            assert_eq!(f.dim(), 4);
        }
        assert!(catalog_field("log-modulus", 3, &p).is_err());
        assert!(catalog_field("nope", 3, &p).is_err());
    }
}
