//! Maximum, spherical and volume averages of a field over balls.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quad::{GaussLegendre, QuadSpec, SphereQuadrature};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::norm;
use crate::riesz::KernelSpec;

/// Values below this are replaced by it and counted.
pub const CLIP: f64 = -1e12;

/// Nearest neighbours used for the local Lipschitz bound of sampled maxima.
const LIPSCHITZ_NEIGHBOURS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AverageKind {
    M,
    S,
    V,
}

impl AverageKind {
    pub const ALL: [AverageKind; 3] = [AverageKind::M, AverageKind::S, AverageKind::V];
}

/// Sphere sample plus radial rule.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub spec: QuadSpec,
    pub sphere: Arc<SphereQuadrature>,
    pub radial: GaussLegendre,
}

impl Quadrature {
    pub fn new(n: usize, spec: QuadSpec) -> Result<Self> {
        Ok(Self {
            spec,
            sphere: Arc::new(SphereQuadrature::for_spec(n, &spec)?),
            radial: GaussLegendre::new(spec.radial)?,
        })
    }

    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(n, QuadSpec::default_for(n))
    }

    pub fn n(&self) -> usize {
        self.sphere.n()
    }
}

/// An average together with its quadrature noise estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageValue {
    pub value: f64,
    /// |full − half-sample| for S and V; the Lipschitz inflation for a
    /// sampled M; zero for an analytic M.
    pub noise: f64,
    pub clipped: usize,
    pub evaluations: usize,
}

fn check_ball(u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<()> {
    if x0.len() != u.dim() || q.n() != u.dim() {
        return Err(Error::Param(format!(
            "dimension mismatch: field {}, center {}, quadrature {}",
            u.dim(),
            x0.len(),
            q.n()
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let reach = norm(x0) + r;
    if reach > u.domain_radius() {
        return Err(Error::Domain(format!(
            "ball of radius {r} at distance {} leaves the domain of radius {}",
            norm(x0),
            u.domain_radius()
        )));
    }
    Ok(())
}

/// u(x₀ + rω) over the sphere sample, clipped at [`CLIP`].
fn sphere_values(u: &dyn ScalarField, x0: &[f64], r: f64, q: &SphereQuadrature) -> Result<(Vec<f64>, usize)> {
    let vals = crate::par::map(q.points(), |w| {
        let x: Vec<f64> = x0.iter().zip(w).map(|(c, d)| c + r * d).collect();
        u.eval(&x)
    });
    let mut clipped = 0;
    let mut out = Vec::with_capacity(vals.len());
    for v in vals {
        if v.is_nan() {
            return Err(Error::Numerical(format!("{} returned NaN", u.name())));
        }
        if v < CLIP {
            clipped += 1;
            out.push(CLIP);
        } else {
            out.push(v);
        }
    }
    if clipped == out.len() {
        return Err(Error::Domain(format!("{} is −∞ on the whole sphere sample: average undefined", u.name())));
    }
    Ok((out, clipped))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// S(u, x₀; r): equal-weight mean over the sphere sample.
pub fn spherical_average(u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<AverageValue> {
    check_ball(u, x0, r, q)?;
    let (vals, clipped) = sphere_values(u, x0, r, &q.sphere)?;
    let full = mean(&vals);
    let half = mean(&vals[..q.sphere.half().len()]);
    Ok(AverageValue { value: full, noise: (full - half).abs(), clipped, evaluations: vals.len() })
}

/// V(u, x₀; r) = n ∫₀¹ S(ρr) ρ^{n−1} dρ.
pub fn volume_average(u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<AverageValue> {
    check_ball(u, x0, r, q)?;
    let n = u.dim() as f64;
    let h = q.sphere.half().len();
    let shells: Vec<Result<(f64, f64, usize)>> = crate::par::map(&q.radial.nodes, |&rho| {
        let (vals, c) = sphere_values(u, x0, rho * r, &q.sphere)?;
        Ok((mean(&vals), mean(&vals[..h]), c))
    });
    let (mut full, mut half, mut clipped) = (0.0, 0.0, 0);
    for ((shell, &rho), &w) in shells.into_iter().zip(&q.radial.nodes).zip(&q.radial.weights) {
        let (f, hf, c) = shell?;
        let jac = n * w * rho.powf(n - 1.0);
        full += jac * f;
        half += jac * hf;
        clipped += c;
    }
    Ok(AverageValue {
        value: full,
        noise: (full - half).abs(),
        clipped,
        evaluations: q.radial.nodes.len() * q.sphere.len(),
    })
}

/// M(u, x₀; r) = sup over the ball. Uses the field's closed form when it has
/// one, after checking that no sample exceeds it.
pub fn spherical_max(u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<AverageValue> {
    check_ball(u, x0, r, q)?;
    let (vals, clipped) = sphere_values(u, x0, r, &q.sphere)?;
    let (imax, smax) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if let Some(a) = u.ball_max(x0, r) {
        if smax > a + 1e-9 * (1.0 + a.abs()) {
            return Err(Error::Numerical(format!(
                "{}: sampled max {smax} exceeds the closed-form ball max {a}",
                u.name()
            )));
        }
        return Ok(AverageValue { value: a, noise: 0.0, clipped, evaluations: vals.len() });
    }
    let pts = q.sphere.points();
    let lip = q
        .sphere
        .neighbours(imax, LIPSCHITZ_NEIGHBOURS)
        .into_iter()
        .map(|j| {
            let d: f64 = pts[imax].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (vals[imax] - vals[j]).abs() / (r * d)
        })
        .fold(0.0, f64::max);
    let infl = lip * r * q.sphere.spacing();
    Ok(AverageValue { value: smax + infl, noise: infl, clipped, evaluations: vals.len() })
}

pub fn average(kind: AverageKind, u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<AverageValue> {
    match kind {
        AverageKind::M => spherical_max(u, x0, r, q),
        AverageKind::S => spherical_average(u, x0, r, q),
        AverageKind::V => volume_average(u, x0, r, q),
    }
}

/// Ψ(u, x₀; r) sampled along a radius schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageCurve {
    pub kind: AverageKind,
    pub center: Vec<f64>,
    /// (r, Ψ(r)) pairs in schedule order.
    pub samples: Vec<(f64, f64)>,
    pub noise: Vec<f64>,
    pub clipped: usize,
    pub evaluations: usize,
    pub quad: QuadSpec,
}

impl AverageCurve {
    pub fn compute(kind: AverageKind, u: &dyn ScalarField, x0: &[f64], radii: &[f64], q: &Quadrature) -> Result<Self> {
        let mut samples = Vec::with_capacity(radii.len());
        let mut noise = Vec::with_capacity(radii.len());
        let (mut clipped, mut evaluations) = (0, 0);
        for &r in radii {
            let a = average(kind, u, x0, r, q)?;
            samples.push((r, a.value));
            noise.push(a.noise);
            clipped += a.clipped;
            evaluations += a.evaluations;
        }
        Ok(Self { kind, center: x0.to_vec(), samples, noise, clipped, evaluations, quad: q.spec })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// Consecutive quotients (Ψ(r_j) − Ψ(r_{j+1}))/(K(r_j) − K(r_{j+1})).
    pub fn quotients(&self, k: &KernelSpec) -> Vec<f64> {
        self.samples.windows(2).map(|w| (w[0].1 - w[1].1) / (k.eval(w[0].0) - k.eval(w[1].0))).collect()
    }

    /// Whether samples are non-decreasing in r within the noise.
    pub fn is_monotone(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.samples.len()).collect();
        idx.sort_by(|&a, &b| self.samples[a].0.total_cmp(&self.samples[b].0));
        idx.windows(2).all(|w| {
            let (a, b) = (self.samples[w[0]].1, self.samples[w[1]].1);
            b >= a - 1e-9 * (1.0 + a.abs()) - self.noise[w[0]] - self.noise[w[1]]
        })
    }

    /// CSV with columns r,value,quotient; the first row has no quotient.
    pub fn to_csv(&self, k: &KernelSpec) -> String {
        let q = self.quotients(k);
        let mut s = String::from("r,value,quotient\n");
        for (i, (r, v)) in self.samples.iter().enumerate() {
            match i.checked_sub(1).map(|j| q[j]) {
                Some(qv) => writeln!(s, "{r},{v},{qv}"),
                None => writeln!(s, "{r},{v},"),
            }
            .expect("writing to a String");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::catalog::{constant, riesz_kernel, LogModulus};
    use crate::flow::quad::QuadSpec;

    fn quad(n: usize) -> Quadrature {
        Quadrature::new(n, QuadSpec { sphere: 1024, radial: 48, seed: 1 }).unwrap()
    }

    #[test]
    fn constants_average_to_themselves() {
        let u = constant(3, 2.5);
        let q = quad(3);
        for k in AverageKind::ALL {
            let a = average(k, u.as_ref(), &[0.1, 0.0, 0.2], 0.7, &q).unwrap();
            assert!((a.value - 2.5).abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn kernel_volume_average_matches_the_radial_integral() {
        // n ∫₀¹ K(ρr) ρ^{n−1} dρ = K(r)·n/(n−p+2) for K = −t^{−1}, n = 4.
        let u = riesz_kernel(4, 1.0, 3.0, None).unwrap();
        let q = quad(4);
        let r = 0.3;
        let k = -1.0 / r;
        let s = spherical_average(u.as_ref(), &[0.0; 4], r, &q).unwrap();
        assert!((s.value - k).abs() < 1e-12);
        let v = volume_average(u.as_ref(), &[0.0; 4], r, &q).unwrap();
        assert!((v.value - 4.0 / 3.0 * k).abs() < 1e-9 * k.abs(), "{}", v.value);
    }

    #[test]
    fn log_modulus_max_is_log_r() {
        let u = LogModulus::new(2, 0).unwrap();
        let q = quad(4);
        for r in [0.5, 1.0, 3.0] {
            let m = spherical_max(&u, &[0.0; 4], r, &q).unwrap();
            assert!((m.value - f64::ln(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_and_singularity_errors() {
        let u = riesz_kernel(3, 1.0, 3.0, None).unwrap();
        let q = quad(3);
        assert!(matches!(spherical_average(u.as_ref(), &[0.0; 3], -1.0, &q), Err(Error::Domain(_))));
        assert!(matches!(spherical_average(u.as_ref(), &[0.0; 2], 1.0, &q), Err(Error::Param(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let u = riesz_kernel(3, 2.0, 3.0, None).unwrap();
        let q = quad(3);
        let c = AverageCurve::compute(AverageKind::S, u.as_ref(), &[0.0; 3], &[1.0, 0.5, 0.25], &q).unwrap();
        let csv = c.to_csv(&KernelSpec::standard(3.0).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,value,quotient");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(','));
        let qv: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert!((qv - 2.0).abs() < 1e-12);
        assert!(c.is_monotone());
    }
}
