//! Tangential p-flow, flow experiments and the averages of tangents.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::average::{average, spherical_max, AverageKind, Quadrature};
use super::density::{harnack_constant, quotient_density};
use super::quad::SphereQuadrature;
use crate::error::{Error, Result};
use crate::field::{Certificate, Field, ScalarField};
use crate::linalg::sample::{rng, unit_vec};
use crate::report::PropertyReport;
use crate::riesz::KernelSpec;

/// u_r for the tangential p-flow:
/// r^{p−2}u(rx) for p > 2, r^{p−2}(u(rx) − u(0)) for p < 2 and
/// u(rx) − M(u, r) for p = 2.
pub struct Flowed {
    base: Field,
    p: f64,
    r: f64,
    scale: f64,
    offset: f64,
}

impl Flowed {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The constant subtracted before scaling: 0, u(0) or M(u, r).
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl ScalarField for Flowed {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| self.r * v).collect();
        self.scale * (self.base.eval(&y) - self.offset)
    }

    fn name(&self) -> String {
        format!("({})_r, r={}, p={}", self.base.name(), self.r, self.p)
    }

    fn domain_radius(&self) -> f64 {
        self.base.domain_radius() / self.r
    }

    fn singular_set(&self) -> Vec<Vec<f64>> {
        self.base.singular_set().into_iter().map(|s| s.into_iter().map(|v| v / self.r).collect()).collect()
    }

    fn ball_max(&self, x0: &[f64], rho: f64) -> Option<f64> {
        let y: Vec<f64> = x0.iter().map(|v| self.r * v).collect();
        self.base.ball_max(&y, self.r * rho).map(|m| self.scale * (m - self.offset))
    }

    fn certificate(&self) -> Certificate {
        self.base.certificate()
    }
}

/// The flow u_r; p = 2 evaluates M(u, r) with `q`.
pub fn tangent_flow(u: &Field, p: f64, r: f64, q: &Quadrature) -> Result<Flowed> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Param(format!("flow parameter must be positive, got {r}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Param(format!("flow needs 1 ≤ p < ∞, got {p}")));
    }
    let (scale, offset) = if p > 2.0 {
        (r.powf(p - 2.0), 0.0)
    } else if p < 2.0 {
        let u0 = u
            .reference_value()
            .ok_or_else(|| Error::Domain(format!("{}: flow with p < 2 needs a finite u(0)", u.name())))?;
        (r.powf(p - 2.0), u0)
    } else {
        (1.0, spherical_max(u.as_ref(), &vec![0.0; u.dim()], r, q)?.value)
    };
    Ok(Flowed { base: u.clone(), p, r, scale, offset })
}

pub fn flowed_field(u: &Field, p: f64, r: f64, q: &Quadrature) -> Result<Field> {
    Ok(Arc::new(tangent_flow(u, p, r, q)?))
}

fn avoids_singularities(u: &dyn ScalarField, x: &[f64]) -> bool {
    u.singular_set().iter().all(|s| s.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() > 1e-12)
}

/// (u_r)_s against u_{rs} at the given points. For p ≠ 2 they agree
/// pointwise; for p = 2 they differ by M(u, rs) − M(u, r) − M(u_r, s).
pub fn semigroup_check(
    u: &Field,
    p: f64,
    r: f64,
    s: f64,
    points: &[Vec<f64>],
    q: &Quadrature,
) -> Result<PropertyReport> {
    let ur = flowed_field(u, p, r, q)?;
    let urs_then = tangent_flow(&ur, p, s, q)?;
    let urs = tangent_flow(u, p, r * s, q)?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for x in
        points.iter().filter(|x| avoids_singularities(u.as_ref(), &x.iter().map(|v| r * s * v).collect::<Vec<_>>()))
    {
        let (a, b) = (urs_then.eval(x), urs.eval(x));
        worst = worst.max((a - b).abs() / (1.0 + a.abs().max(b.abs())));
        count += 1;
    }
    let mut tol = 1e-12;
    if p == 2.0 {
        let zero = vec![0.0; u.dim()];
        tol += spherical_max(u.as_ref(), &zero, r * s, q)?.noise + spherical_max(ur.as_ref(), &zero, s, q)?.noise;
    }
    Ok(PropertyReport::new("flow-semigroup", u.name(), count, worst, tol))
}

/// Where flowed fields are compared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// Shells inner ≤ |x| ≤ outer times a sphere sample.
    Annulus { inner: f64, outer: f64, shells: usize, directions: usize },
    /// Seeded uniform points in the ball of the given radius.
    Ball { radius: f64, count: usize },
}

impl GridSpec {
    /// The annulus {0.5 ≤ |x| ≤ 2} for p ≥ 2; the ball of radius 2 otherwise.
    pub fn default_for(p: f64) -> Self {
        if p >= 2.0 {
            GridSpec::Annulus { inner: 0.5, outer: 2.0, shells: 8, directions: 256 }
        } else {
            GridSpec::Ball { radius: 2.0, count: 2048 }
        }
    }

    pub fn points(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        match *self {
            GridSpec::Annulus { inner, outer, shells, directions } => {
                if !(0.0 < inner && inner <= outer) || shells == 0 {
                    return Err(Error::Param("annulus needs 0 < inner ≤ outer and at least one shell".into()));
                }
                let dirs = SphereQuadrature::new(n, directions.max(4) + directions % 2, seed)?;
                let mut out = Vec::with_capacity(shells * dirs.len());
                for i in 0..shells {
                    let t = if shells == 1 { inner } else { inner + (outer - inner) * i as f64 / (shells - 1) as f64 };
                    out.extend(dirs.points().iter().map(|w| w.iter().map(|v| t * v).collect::<Vec<f64>>()));
                }
                Ok(out)
            }
            GridSpec::Ball { radius, count } => {
                if !(radius > 0.0) || count == 0 {
                    return Err(Error::Param("ball grid needs a positive radius and count".into()));
                }
                let mut r = rng(seed ^ 0xba11);
                Ok((0..count)
                    .map(|_| {
                        let w = unit_vec(&mut r, n);
                        let t = radius * r.random::<f64>().powf(1.0 / n as f64);
                        w.into_iter().map(|v| t * v).collect()
                    })
                    .collect())
            }
        }
    }

    pub fn contains_origin(&self) -> bool {
        matches!(self, GridSpec::Ball { .. })
    }
}

/// Radius schedule and comparison grid for a flow experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub p: f64,
    pub radii: Vec<f64>,
    pub grid: GridSpec,
}

impl FlowSpec {
    pub fn new(p: f64, radii: Vec<f64>, grid: GridSpec) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Param("flow radii must be positive and strictly decreasing".into()));
        }
        if p >= 2.0 && grid.contains_origin() {
            return Err(Error::Param("for p ≥ 2 the comparison grid must avoid the origin".into()));
        }
        Ok(Self { p, radii, grid })
    }

    /// r_j = 2^{−j} for j in `from..=to` on the default grid.
    pub fn dyadic(p: f64, from: i32, to: i32) -> Result<Self> {
        Self::new(p, (from..=to).map(|j| 2f64.powi(-j)).collect(), GridSpec::default_for(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "beta", rename_all = "kebab-case")]
pub enum Metric {
    DiscreteL1,
    SupOnAnnulus,
    /// Sup-norm plus the largest two-point β-Hölder quotient of the difference.
    Holder(f64),
}

/// Pairs of grid indices used for two-point quotients.
pub(crate) fn sample_pairs(len: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut r = rng(seed ^ 0x9a1f);
    (0..count)
        .filter_map(|_| {
            let (i, j) = (r.random_range(0..len), r.random_range(0..len));
            (i != j).then_some((i, j))
        })
        .collect()
}

pub(crate) fn holder_seminorm(vals: &[f64], pts: &[Vec<f64>], pairs: &[(usize, usize)], beta: f64) -> f64 {
    pairs
        .iter()
        .map(|&(i, j)| {
            let d: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d > 0.0 {
                (vals[i] - vals[j]).abs() / d.powf(beta)
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Distance between two fields on `pts`.
pub fn field_distance(
    u: &dyn ScalarField,
    v: &dyn ScalarField,
    pts: &[Vec<f64>],
    metric: Metric,
    seed: u64,
) -> Result<f64> {
    let diffs: Vec<f64> = crate::par::map(pts, |x| u.eval(x) - v.eval(x));
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(Error::Numerical("field difference is undefined on the grid".into()));
    }
    let sup = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(match metric {
        Metric::DiscreteL1 => diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64,
        Metric::SupOnAnnulus => sup,
        Metric::Holder(beta) => sup + holder_seminorm(&diffs, pts, &sample_pairs(pts.len(), 1000, seed), beta),
    })
}

/// Outcome of a flow experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub field: String,
    pub candidate: String,
    pub p: f64,
    pub metric: Metric,
    pub radii: Vec<f64>,
    pub distances: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
    /// α-Hölder seminorms of u_{r_j} on the grid, for 1 ≤ p < 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_seminorms: Option<Vec<f64>>,
    /// Flow Hölder bound along the schedule, for 1 ≤ p < 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_bound: Option<PropertyReport>,
}

/// Distances d_j = dist(u_{r_j}, candidate); converged when the deepest
/// distance is within `tol` and no larger than the first.
pub fn tangent_experiment(
    u: &Field,
    spec: &FlowSpec,
    candidate: &dyn ScalarField,
    metric: Metric,
    tol: f64,
    q: &Quadrature,
    seed: u64,
) -> Result<ConvergenceRecord> {
    if let Metric::Holder(beta) = metric {
        if !(spec.p >= 1.0 && spec.p < 2.0 && beta > 0.0 && beta < 2.0 - spec.p) {
            return Err(Error::Param(format!(
                "Hölder metric needs 1 ≤ p < 2 and 0 < β < 2 − p, got p={}, β={beta}",
                spec.p
            )));
        }
    }
    let pts = spec.grid.points(u.dim(), seed)?;
    let mut distances = Vec::with_capacity(spec.radii.len());
    let mut seminorms = Vec::new();
    let low_p = spec.p < 2.0;
    let pairs = sample_pairs(pts.len(), 1000, seed);
    for &r in &spec.radii {
        let ur = tangent_flow(u, spec.p, r, q)?;
        distances.push(field_distance(&ur, candidate, &pts, metric, seed)?);
        if low_p {
            let vals: Vec<f64> = crate::par::map(&pts, |x| ur.eval(x));
            seminorms.push(holder_seminorm(&vals, &pts, &pairs, 2.0 - spec.p));
        }
    }
    let last = distances[distances.len() - 1];
    let holder_bound = if low_p {
        let rho = match spec.grid {
            GridSpec::Ball { radius, .. } => radius,
            GridSpec::Annulus { outer, .. } => outer,
        };
        Some(super::holder::flow_holder_bound_check(u.as_ref(), spec.p, rho, &spec.radii, &seminorms, q)?)
    } else {
        None
    };
    Ok(ConvergenceRecord {
        field: u.name(),
        candidate: candidate.name(),
        p: spec.p,
        metric,
        radii: spec.radii.clone(),
        converged: last <= tol && last <= distances[0],
        distances,
        tolerance: tol,
        holder_seminorms: low_p.then_some(seminorms),
        holder_bound,
    })
}

/// Kinds whose averages are meaningful for the field's certificate.
fn kinds_for(c: &Certificate) -> Vec<AverageKind> {
    if c.convex || c.is_none() {
        AverageKind::ALL.to_vec()
    } else {
        vec![AverageKind::M]
    }
}

/// For a tangent U: Ψ(U, r) = Θ^Ψ·K(r) when p ≠ 2; when p = 2,
/// M(r) = Θ log r while S and V differ from Θ log r by constants with
/// −CΘ ≤ c_S ≤ 0 and c_V ≥ −(C+1)Θ, C = 1/φ(1/e).
pub fn averages_of_tangent_check(
    u: &dyn ScalarField,
    p: f64,
    radii: &[f64],
    q: &Quadrature,
    tol: f64,
) -> Result<PropertyReport> {
    if radii.len() < 3 {
        return Err(Error::Param("tangent average check needs at least three radii".into()));
    }
    let k = KernelSpec::standard(p)?;
    let n = u.dim();
    let zero = vec![0.0; n];
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    let mut theta_m = None;
    for kind in kinds_for(&u.certificate()) {
        let vals: Vec<_> = radii.iter().map(|&r| average(kind, u, &zero, r, q)).collect::<Result<_>>()?;
        let values: Vec<f64> = vals.iter().map(|a| a.value).collect();
        let noise: Vec<f64> = vals.iter().map(|a| a.noise).collect();
        let est = quotient_density(radii, &values, &noise, &k)?;
        let theta = match (kind, theta_m) {
            (AverageKind::M, _) => {
                theta_m = Some(est.theta);
                est.theta
            }
            (_, Some(t)) if p == 2.0 => t,
            _ => est.theta,
        };
        let label = format!("{kind:?}");
        if p != 2.0 || kind == AverageKind::M {
            let worst = radii
                .iter()
                .zip(&values)
                .zip(&noise)
                .map(|((&r, &v), &e)| ((v - theta * k.eval(r)).abs() - e) / k.eval(r).abs().max(1.0))
                .fold(0.0, f64::max);
            parts.push(PropertyReport::new(format!("tangent-average-{label}"), u.name(), radii.len(), worst, tol));
        } else {
            let c = harnack_constant(n, 2.0)?;
            let consts: Vec<f64> = radii.iter().zip(&values).map(|(&r, &v)| v - theta * r.ln()).collect();
            let spread = consts.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
                - consts.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let slack = tol + noise.iter().fold(0.0, |m: f64, &e| m.max(e));
            let c0 = consts[consts.len() - 1];
            let (lo, hi) = match kind {
                AverageKind::S => (-c * theta, 0.0),
                _ => (-(c + 1.0) * theta, f64::INFINITY),
            };
            let out_of_bounds = (lo - c0).max(c0 - hi).max(0.0);
            notes.push(format!("{label}-constant={c0:.6} in [{lo:.6}, {hi}] (C={c:.6})"));
            parts.push(PropertyReport::new(
                format!("tangent-average-{label}"),
                u.name(),
                radii.len(),
                spread.max(out_of_bounds),
                slack,
            ));
        }
    }
    let mut r = PropertyReport::merge("averages-of-tangent", u.name(), &parts);
    if !notes.is_empty() {
        r = r.with_note(notes.join("; "));
    }
    Ok(r)
}

/// Stability of averages: |Ψ(u_{r_j}, t) − Ψ(U, t)| along the schedule; the
/// deepest gap must be within `tol`.
pub fn stability_check(
    u: &Field,
    tangent: &dyn ScalarField,
    p: f64,
    flow_radii: &[f64],
    t: f64,
    q: &Quadrature,
    tol: f64,
) -> Result<PropertyReport> {
    let zero = vec![0.0; u.dim()];
    let mut parts = Vec::new();
    for kind in kinds_for(&u.certificate()) {
        let target = average(kind, tangent, &zero, t, q)?;
        let mut gaps = Vec::with_capacity(flow_radii.len());
        for &r in flow_radii {
            let ur = tangent_flow(u, p, r, q)?;
            let a = average(kind, &ur, &zero, t, q)?;
            gaps.push((a.value - target.value).abs() - a.noise - target.noise);
        }
        let last = gaps[gaps.len() - 1].max(0.0);
        parts.push(PropertyReport::new(format!("stability-{kind:?}"), u.name(), gaps.len(), last, tol));
    }
    Ok(PropertyReport::merge("average-stability", u.name(), &parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::catalog::{riesz_kernel, LogModulus, PartialKernel};
    use crate::flow::quad::QuadSpec;

    fn quad(n: usize) -> Quadrature {
        Quadrature::new(n, QuadSpec { sphere: 1024, radial: 48, seed: 2 }).unwrap()
    }

    #[test]
    fn kernels_are_flow_invariant() {
        let q = quad(3);
        for p in [1.5, 3.0] {
            let u = riesz_kernel(3, 2.0, p, None).unwrap();
            let ur = tangent_flow(&u, p, 0.125, &q).unwrap();
            for x in [[0.3, -0.2, 0.9], [1.5, 0.0, 0.1]] {
                assert!((ur.eval(&x) - u.eval(&x)).abs() < 1e-12 * (1.0 + u.eval(&x).abs()));
            }
        }
        let u: Field = Arc::new(LogModulus::new(2, 0).unwrap());
        let ur = tangent_flow(&u, 2.0, 1e-3, &quad(4)).unwrap();
        let x = [0.3, 0.5, -0.4, 0.1];
        assert!((ur.eval(&x) - u.eval(&x)).abs() < 1e-12);
    }

    #[test]
    fn partial_kernel_is_flow_invariant() {
        let u: Field = Arc::new(PartialKernel::new(4, 2, 3.0).unwrap());
        let ur = tangent_flow(&u, 3.0, 0.01, &quad(4)).unwrap();
        let x = [0.2, 0.7, 5.0, -1.0];
        assert!((ur.eval(&x) - u.eval(&x)).abs() < 1e-12 * u.eval(&x).abs());
    }

    #[test]
    fn semigroup_holds() {
        let pts = GridSpec::default_for(3.0).points(3, 1).unwrap();
        let q = quad(3);
        for p in [1.5, 2.0, 3.0] {
            let u = crate::flow::catalog::two_kernels(3, p, vec![1.0, 0.0, 0.0]).unwrap();
            let f = if p == 2.0 { crate::flow::catalog::radial_perturbed(3, 2.0).unwrap() } else { u };
            let r = semigroup_check(&f, p, 0.5, 0.25, &pts, &q).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn flow_errors() {
        let q = quad(3);
        let u = riesz_kernel(3, 1.0, 3.0, None).unwrap();
        assert!(matches!(tangent_flow(&u, 1.5, 0.5, &q), Err(Error::Domain(_))));
        assert!(tangent_flow(&u, 3.0, 0.0, &q).is_err());
        assert!(FlowSpec::new(3.0, vec![1.0, 0.5], GridSpec::Ball { radius: 1.0, count: 10 }).is_err());
        assert!(FlowSpec::new(3.0, vec![0.5, 1.0], GridSpec::default_for(3.0)).is_err());
    }

    #[test]
    fn kernel_tangent_averages_are_exact() {
        let q = quad(3);
        let radii = [2.0, 1.0, 0.5, 0.25];
        let u = riesz_kernel(3, 3.0, 2.5, None).unwrap();
        let r = averages_of_tangent_check(u.as_ref(), 2.5, &radii, &q, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
