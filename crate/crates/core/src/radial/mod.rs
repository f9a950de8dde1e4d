//! One-variable radial theory: R_p jets, K_p-convexity, monotone quotients
//! and one-variable densities.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::PropertyReport;
use crate::riesz::{Charx, KernelSpec};

type Fun = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial profile ψ on (0, r_max).
#[derive(Clone)]
pub struct RadialProfile {
    pub name: String,
    pub r_max: f64,
    f: Fun,
    d1: Option<Fun>,
    d2: Option<Fun>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialProfile({}, r_max={})", self.name, self.r_max)
    }
}

/// Jet (t, ψ′(t), ψ″(t)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneVarJet {
    pub t: f64,
    pub lam: f64,
    pub a: f64,
}

impl OneVarJet {
    pub fn new(t: f64, lam: f64, a: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("jet radius must be positive, got {t}")));
        }
        Ok(Self { t, lam, a })
    }

    fn tol(&self) -> f64 {
        1e-12 * (1.0 + self.a.abs() + self.lam.abs() / self.t)
    }

    fn second_order(&self, c: f64) -> f64 {
        self.a + (c - 1.0) * self.lam / self.t
    }
}

impl RadialProfile {
    pub fn new(name: impl Into<String>, r_max: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), r_max, f: Arc::new(f), d1: None, d2: None }
    }

    pub fn with_derivatives(
        mut self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn fd_step(t: f64) -> f64 {
        1e-4 * t
    }

    /// ψ′(t) and ψ″(t), analytic when provided, otherwise central differences.
    pub fn jet(&self, t: f64) -> Result<OneVarJet> {
        if !(t > 0.0 && t < self.r_max) {
            return Err(Error::Domain(format!("t={t} outside (0, {})", self.r_max)));
        }
        let (lam, a) = match (&self.d1, &self.d2) {
            (Some(d1), Some(d2)) => (d1(t), d2(t)),
            _ => {
                let h = Self::fd_step(t);
                let (p, m, c) = (self.eval(t + h), self.eval(t - h), self.eval(t));
                ((p - m) / (2.0 * h), (p - 2.0 * c + m) / (h * h))
            }
        };
        OneVarJet::new(t, lam, a)
    }

    /// Compares analytic derivatives with central differences on `grid`.
    pub fn check_derivatives(&self, grid: &[f64]) -> PropertyReport {
        let (Some(d1), Some(d2)) = (&self.d1, &self.d2) else {
            return PropertyReport::skipped("derivatives", &self.name, "no analytic derivatives");
        };
        let mut worst: f64 = 0.0;
        for &t in grid {
            let h = Self::fd_step(t);
            let (p, m, c) = (self.eval(t + h), self.eval(t - h), self.eval(t));
            let fd1 = (p - m) / (2.0 * h);
            let fd2 = (p - 2.0 * c + m) / (h * h);
            worst = worst.max((fd1 - d1(t)).abs() / (1.0 + d1(t).abs()));
            worst = worst.max((fd2 - d2(t)).abs() / (1.0 + d2(t).abs()));
        }
        PropertyReport::new("derivatives", &self.name, grid.len(), worst, 1e-6)
    }

    /// Θ·K(t).
    pub fn kernel(k: KernelSpec, theta: f64) -> Self {
        let name = format!("{theta}*K_{}", k.p);
        Self::new(name, f64::INFINITY, move |t| theta * k.eval(t)).with_derivatives(
            move |t| theta * k.deriv1(t).unwrap_or(f64::NAN),
            move |t| theta * k.deriv2(t).unwrap_or(f64::NAN),
        )
    }

    /// K(t) + t².
    pub fn kernel_plus_square(k: KernelSpec) -> Self {
        let name = format!("K_{}+r^2", k.p);
        Self::new(name, f64::INFINITY, move |t| k.eval(t) + t * t).with_derivatives(
            move |t| k.deriv1(t).unwrap_or(f64::NAN) + 2.0 * t,
            move |t| k.deriv2(t).unwrap_or(f64::NAN) + 2.0,
        )
    }

    /// max(K(t), c).
    pub fn kernel_max_const(k: KernelSpec, c: f64) -> Self {
        Self::new(format!("max(K_{},{c})", k.p), f64::INFINITY, move |t| k.eval(t).max(c))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), f64::INFINITY, move |_| c).with_derivatives(|_| 0.0, |_| 0.0)
    }
}

/// R_p^↑: λ ≥ 0 and a + (p−1)λ/t ≥ 0; for p = ∞ only λ ≥ 0.
pub fn rp_up_membership(p: Charx, jet: &OneVarJet) -> bool {
    let tol = jet.tol();
    jet.lam >= -tol
        && match p {
            Charx::Finite(p) => jet.second_order(p) >= -tol,
            Charx::Infinite => true,
        }
}

/// R_q^↓: λ ≤ 0 and a + (q−1)λ/t ≥ 0; for q = ∞ only λ ≤ 0.
pub fn rq_down_membership(q: Charx, jet: &OneVarJet) -> bool {
    let tol = jet.tol();
    jet.lam <= tol
        && match q {
            Charx::Finite(q) => jet.second_order(q) >= -tol,
            Charx::Infinite => true,
        }
}

/// R_F = R_p^↑ ∪ R_q^↓.
pub fn rf_membership(p: Charx, q: Charx, jet: &OneVarJet) -> bool {
    rp_up_membership(p, jet) || rq_down_membership(q, jet)
}

/// Secant slopes of f(s) = ψ(K⁻¹(s)) must be non-decreasing on the grid.
pub fn kp_convexity_test(psi: &RadialProfile, kernel: &KernelSpec, grid: &[f64]) -> Result<PropertyReport> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.len() < 3 {
        return Err(Error::Param("K_p-convexity needs at least three grid points".into()));
    }
    let slopes: Vec<f64> =
        g.windows(2).map(|w| (psi.eval(w[1]) - psi.eval(w[0])) / (kernel.eval(w[1]) - kernel.eval(w[0]))).collect();
    let worst = slopes.windows(2).map(|w| (w[0] - w[1]) / (1.0 + w[1].abs())).fold(0.0, f64::max);
    Ok(PropertyReport::new("kp-convexity", &psi.name, slopes.len() - 1, worst, 1e-9))
}

/// (ψ(r) − ψ(t))/(K(r) − K(t)).
pub fn monotone_quotient(psi: &RadialProfile, kernel: &KernelSpec, r: f64, t: f64) -> Result<f64> {
    let kr = kernel.value(r)?;
    let kt = kernel.value(t)?;
    if kr == kt {
        return Err(Error::Domain("quotient needs r ≠ t".into()));
    }
    Ok((psi.eval(r) - psi.eval(t)) / (kr - kt))
}

/// Density estimate with its monotone bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneVarDensity {
    pub theta: f64,
    pub bracket: f64,
}

/// Quotient at the two smallest radii; the bracket is its distance to the
/// quotient one scale up.
pub fn one_var_density(psi: &RadialProfile, kernel: &KernelSpec, radii: &[f64]) -> Result<OneVarDensity> {
    if radii.len() < 3 {
        return Err(Error::Param("density needs at least three radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii[radii.len() - 1] <= 0.0 {
        return Err(Error::Param("radii must be positive and strictly decreasing".into()));
    }
    let m = radii.len();
    let last = monotone_quotient(psi, kernel, radii[m - 2], radii[m - 1])?;
    let prev = monotone_quotient(psi, kernel, radii[m - 3], radii[m - 2])?;
    Ok(OneVarDensity { theta: last, bracket: (prev - last).abs() })
}

/// One-variable density for a characteristic given as [`Charx`]; p = ∞ is
/// a domain error.
pub fn one_var_density_charx(psi: &RadialProfile, p: Charx, radii: &[f64]) -> Result<OneVarDensity> {
    let k = KernelSpec::for_charx(p, crate::riesz::Normalization::Standard)?;
    one_var_density(psi, &k, radii)
}

/// Checks that the quotient is non-decreasing in each argument on `grid`.
pub fn quotient_double_monotonicity(psi: &RadialProfile, kernel: &KernelSpec, grid: &[f64]) -> Result<PropertyReport> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    let m = g.len();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..m {
        let mut prev: Option<f64> = None;
        for i in 0..m {
            if i == k {
                continue;
            }
            let q = monotone_quotient(psi, kernel, g[i], g[k])?;
            if let Some(pq) = prev {
                worst = worst.max((pq - q) / (1.0 + q.abs()));
                count += 1;
            }
            prev = Some(q);
        }
    }
    Ok(PropertyReport::new("quotient-double-monotonicity", &psi.name, count, worst, 1e-9))
}

/// Shape of a subaffine radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "breakpoint")]
pub enum ProfileClass {
    Increasing,
    DecreasingConvex,
    DecreasingThenIncreasing(f64),
}

/// Classifies ψ on an ascending grid by sampled monotonicity.
pub fn classify_profile(psi: &RadialProfile, grid: &[f64]) -> Result<ProfileClass> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.len() < 3 {
        return Err(Error::Param("classification needs at least three grid points".into()));
    }
    let v: Vec<f64> = g.iter().map(|&t| psi.eval(t)).collect();
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * (1.0 + scale);
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    if d.iter().all(|&x| x >= -tol) {
        return Ok(ProfileClass::Increasing);
    }
    let kmin = (0..v.len()).fold(0, |b, i| if v[i] < v[b] - tol { i } else { b });
    let not_subaffine = || Error::Domain(format!("{} is not subaffine-radial on the grid", psi.name));
    if d[..kmin].iter().any(|&x| x > tol) || d[kmin..].iter().any(|&x| x < -tol) {
        return Err(not_subaffine());
    }
    if kmin + 1 < g.len() && d[kmin..].iter().any(|&x| x > tol) {
        return Ok(ProfileClass::DecreasingThenIncreasing(g[kmin]));
    }
    let slopes: Vec<f64> = g.windows(2).zip(&d).map(|(w, dv)| dv / (w[1] - w[0])).collect();
    if slopes.windows(2).any(|w| w[0] > w[1] + 1e-9 * (1.0 + w[1].abs())) {
        return Err(not_subaffine());
    }
    Ok(ProfileClass::DecreasingConvex)
}

/// The limit forms: (ψ(r) − ψ(0⁺))/K(r) for p < 2 and ψ(r)/K(r) for p ≥ 2,
/// at each radius.
pub fn limit_form_sequence(
    psi: &RadialProfile,
    kernel: &KernelSpec,
    psi0: Option<f64>,
    radii: &[f64],
) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            let k = kernel.value(r)?;
            if kernel.p < 2.0 {
                let base = psi0.ok_or_else(|| Error::Param("p < 2 needs ψ(0⁺)".into()))?;
                Ok((psi.eval(r) - base) / k)
            } else {
                Ok(psi.eval(r) / k)
            }
        })
        .collect()
}

/// Checks the limit form against the one-variable density on a decreasing
/// radius schedule: for p < 2 the sequence must be non-increasing as r ↓ 0,
/// and in all cases its last value must agree with Θ within `tol`.
pub fn check_limit_form(
    psi: &RadialProfile,
    kernel: &KernelSpec,
    psi0: Option<f64>,
    radii: &[f64],
    tol: f64,
) -> Result<PropertyReport> {
    let seq = limit_form_sequence(psi, kernel, psi0, radii)?;
    let dens = one_var_density(psi, kernel, radii)?;
    let mut worst = (seq[seq.len() - 1] - dens.theta).abs();
    if kernel.p < 2.0 {
        for w in seq.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    Ok(PropertyReport::new("limit-form", &psi.name, seq.len(), worst, tol.max(dens.bracket)))
}

/// r₀·ρ^j for j = 0..count.
pub fn geometric_radii(r0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| r0 * ratio.powi(j as i32)).collect()
}
