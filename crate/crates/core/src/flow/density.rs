//! Densities Θ^M, Θ^S, Θ^V, their cross-relations and the mass density.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::average::{spherical_average, AverageCurve, AverageKind, Quadrature};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::norm;
use crate::report::PropertyReport;
use crate::riesz::KernelSpec;

/// Base tolerance for quotient monotonicity, before quadrature noise.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Largest accepted fraction of clipped (−∞) samples in a density run.
pub const MAX_CLIPPED_FRACTION: f64 = 1e-3;

/// Volume α(k) of the unit ball in ℝ^k, for real k ≥ 0.
pub fn unit_ball_volume(k: f64) -> f64 {
    std::f64::consts::PI.powf(k / 2.0) / gamma(k / 2.0 + 1.0)
}

/// φ(λ) = (1 − λ)/(1 + λ)^{n−1}.
pub fn harnack_phi(n: usize, lam: f64) -> f64 {
    (1.0 - lam) / (1.0 + lam).powi(n as i32 - 1)
}

/// Maximizes f on (0, 1): a uniform scan refined by golden-section search.
fn sup_on_unit_interval(f: impl Fn(f64) -> f64) -> f64 {
    let m = 4000;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.5);
    for i in 1..m {
        let x = i as f64 / m as f64;
        let v = f(x);
        if v > best {
            best = v;
            arg = x;
        }
    }
    let (mut a, mut b) = ((arg - 1.0 / m as f64).max(1e-12), (arg + 1.0 / m as f64).min(1.0 - 1e-12));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// The comparison constant C(p, n) between Θ^M and Θ^S: 1/sup λ^{p−2}φ(λ)
/// for p > 2, 1/sup ψ(λ) for 1 < p < 2, and 1/φ(1/e) for p = 2.
pub fn harnack_constant(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Param("Harnack constant needs n ≥ 2".into()));
    }
    if p == 2.0 {
        return Ok(1.0 / harnack_phi(n, (-1.0f64).exp()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Param(format!("no Harnack comparison for p = {p}")));
    }
    let c = if p > 2.0 {
        sup_on_unit_interval(|l| l.powf(p - 2.0) * harnack_phi(n, l))
    } else {
        sup_on_unit_interval(|l| 1.0 + (l.powf(2.0 - p) - 1.0) / harnack_phi(n, l))
    };
    if !(c > 0.0) {
        return Err(Error::Numerical(format!("Harnack supremum is not positive: {c}")));
    }
    Ok(1.0 / c)
}

/// A density estimated from a monotone quotient sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub theta: f64,
    pub bracket: f64,
    /// Consecutive quotients from the largest radius down.
    pub quotients: Vec<f64>,
    /// Largest increase of the quotient as r decreases, net of its tolerance.
    pub worst_monotonicity: f64,
    pub monotone: bool,
}

/// Quotients of `values` at strictly decreasing `radii`; Θ is the deepest
/// one and the bracket its distance to the previous plus the noise bound.
pub fn quotient_density(radii: &[f64], values: &[f64], noise: &[f64], k: &KernelSpec) -> Result<DensityEstimate> {
    if radii.len() < 3 || values.len() != radii.len() || noise.len() != radii.len() {
        return Err(Error::Param("density needs at least three radii with matching values".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Param("density radii must be strictly decreasing".into()));
    }
    let m = radii.len();
    let dk: Vec<f64> = radii.windows(2).map(|w| k.eval(w[0]) - k.eval(w[1])).collect();
    let quotients: Vec<f64> = (0..m - 1).map(|j| (values[j] - values[j + 1]) / dk[j]).collect();
    let err: Vec<f64> = (0..m - 1).map(|j| (noise[j] + noise[j + 1]) / dk[j].abs()).collect();
    let worst = (0..m - 2)
        .map(|j| quotients[j + 1] - quotients[j] - (MONOTONE_TOL + err[j] + err[j + 1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let theta = quotients[m - 2];
    Ok(DensityEstimate {
        theta,
        bracket: (quotients[m - 3] - theta).abs() + err[m - 2],
        quotients,
        worst_monotonicity: worst,
        monotone: worst <= 0.0,
    })
}

/// Joint monotonicity of Q(a, b) = (Ψ(a) − Ψ(b))/(K(a) − K(b)) over all
/// pairs of sampled radii.
pub fn double_monotonicity(curve: &AverageCurve, k: &KernelSpec) -> PropertyReport {
    let mut idx: Vec<usize> = (0..curve.samples.len()).collect();
    idx.sort_by(|&a, &b| curve.samples[a].0.total_cmp(&curve.samples[b].0));
    let r: Vec<f64> = idx.iter().map(|&i| curve.samples[i].0).collect();
    let v: Vec<f64> = idx.iter().map(|&i| curve.samples[i].1).collect();
    let e: Vec<f64> = idx.iter().map(|&i| curve.noise[i]).collect();
    let m = r.len();
    let q = |a: usize, b: usize| (v[b] - v[a]) / (k.eval(r[b]) - k.eval(r[a]));
    let err = |a: usize, b: usize| (e[a] + e[b]) / (k.eval(r[b]) - k.eval(r[a])).abs();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut count = 0;
    for a in 0..m {
        for b in a + 1..m {
            // Increasing the larger radius, then the smaller one.
            if b + 1 < m {
                worst = worst.max(q(a, b) - q(a, b + 1) - err(a, b) - err(a, b + 1));
                count += 1;
            }
            if a + 1 < b {
                worst = worst.max(q(a, b) - q(a + 1, b) - err(a, b) - err(a + 1, b));
                count += 1;
            }
        }
    }
    let subject = format!("{:?} at {:?}", curve.kind, curve.center);
    PropertyReport::new("double-monotonicity", subject, count, worst.max(0.0), MONOTONE_TOL)
}

/// Θ^M ≤ Θ^S ≤ C·Θ^M for p > 2, Θ^S ≤ Θ^M ≤ C·Θ^S for 1 < p < 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackCheck {
    pub constant: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub field: String,
    pub n: usize,
    pub p: f64,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub theta_m: DensityEstimate,
    pub theta_s: DensityEstimate,
    /// Raw volume density; for p ≠ 2 it equals n/(n−p+2) times Θ^S.
    pub theta_v: DensityEstimate,
    /// |Θ^S − (n−p+2)/n·Θ^V|, relative to |Θ^S| when that is non-zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_sv: Option<f64>,
    /// |Θ^M − Θ^S| for p = 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harnack: Option<HarnackCheck>,
    /// 1/φ(1/e) for this n.
    pub harnack_c2: f64,
    pub clipped_fraction: f64,
    pub double_monotonicity: Vec<PropertyReport>,
    pub flags: Vec<String>,
}

impl DensityReport {
    /// Θ^V rescaled so that it equals Θ^S: (n−p+2)/n·Θ^V for p ≠ 2.
    pub fn theta_v_normalized(&self) -> f64 {
        if self.p == 2.0 {
            self.theta_v.theta
        } else {
            (self.n as f64 - self.p + 2.0) / self.n as f64 * self.theta_v.theta
        }
    }

    pub fn theta_v_normalized_bracket(&self) -> f64 {
        if self.p == 2.0 {
            self.theta_v.bracket
        } else {
            (self.n as f64 - self.p + 2.0).abs() / self.n as f64 * self.theta_v.bracket
        }
    }

    pub fn estimate(&self, kind: AverageKind) -> &DensityEstimate {
        match kind {
            AverageKind::M => &self.theta_m,
            AverageKind::S => &self.theta_s,
            AverageKind::V => &self.theta_v,
        }
    }
}

fn relative(diff: f64, base: f64) -> f64 {
    if base.abs() > 1e-9 {
        diff.abs() / base.abs()
    } else {
        diff.abs()
    }
}

/// All three densities of u at x₀ along a strictly decreasing schedule.
pub fn densities(u: &dyn ScalarField, x0: &[f64], p: f64, radii: &[f64], q: &Quadrature) -> Result<DensityReport> {
    let k = KernelSpec::standard(p)?;
    let n = u.dim();
    let cert = u.certificate();
    let convex_expected = cert.convex || cert.is_none();
    let mut flags = Vec::new();
    let mut ests = Vec::new();
    let mut dm = Vec::new();
    let (mut clipped, mut evals) = (0usize, 0usize);
    for kind in AverageKind::ALL {
        let curve = AverageCurve::compute(kind, u, x0, radii, q)?;
        if kind != AverageKind::M {
            clipped += curve.clipped;
            evals += curve.evaluations;
        }
        let est = quotient_density(radii, &curve.values(), &curve.noise, &k)?;
        let enforced = kind == AverageKind::M || convex_expected;
        if !est.monotone && enforced {
            flags.push(format!(
                "{kind:?} quotients not monotone (excess {:.3e}): not F-subharmonic or quadrature too coarse",
                est.worst_monotonicity
            ));
        }
        let d = double_monotonicity(&curve, &k);
        if !d.pass && enforced {
            flags.push(format!("{kind:?} double monotonicity fails by {:.3e}", d.worst_violation));
        }
        dm.push(d);
        ests.push(est);
    }
    let clipped_fraction = if evals == 0 { 0.0 } else { clipped as f64 / evals as f64 };
    if clipped_fraction > MAX_CLIPPED_FRACTION {
        return Err(Error::Numerical(format!(
            "{:.2e} of the samples were clipped at −∞, above the accepted {MAX_CLIPPED_FRACTION:e}",
            clipped_fraction
        )));
    }
    let theta_v = ests.pop().expect("three estimates");
    let theta_s = ests.pop().expect("three estimates");
    let theta_m = ests.pop().expect("three estimates");
    let nf = n as f64;
    let (residual_sv, residual_ms, harnack) = if p == 2.0 {
        (
            Some(relative(theta_s.theta - theta_v.theta, theta_s.theta)),
            Some((theta_m.theta - theta_s.theta).abs()),
            None,
        )
    } else {
        let sv = relative(theta_s.theta - (nf - p + 2.0) / nf * theta_v.theta, theta_s.theta);
        let h = if p > 1.0 {
            let c = harnack_constant(n, p)?;
            let slack = theta_m.bracket + theta_s.bracket + MONOTONE_TOL;
            let (small, big) = if p > 2.0 { (theta_m.theta, theta_s.theta) } else { (theta_s.theta, theta_m.theta) };
            Some(HarnackCheck { constant: c, lower_ok: small <= big + slack, upper_ok: big <= c * small + c * slack })
        } else {
            None
        };
        (Some(sv), None, h)
    };
    Ok(DensityReport {
        field: u.name(),
        n,
        p,
        center: x0.to_vec(),
        radii: radii.to_vec(),
        theta_m,
        theta_s,
        theta_v,
        residual_sv,
        residual_ms,
        harnack,
        harnack_c2: harnack_constant(n, 2.0)?,
        clipped_fraction,
        double_monotonicity: dm,
        flags,
    })
}

/// μ(B_r) for μ = Δu, from the left derivative of the spherical average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassDensityReport {
    pub field: String,
    pub n: usize,
    pub p: f64,
    /// (r, μ(B_r)) pairs.
    pub masses: Vec<(f64, f64)>,
    /// μ(B_r)/(α(n−p) r^{n−p}) at each radius.
    pub normalized: Vec<f64>,
    /// Θ^{n−p}(μ, x₀) at the deepest radius.
    pub theta_mass: f64,
    pub bracket: f64,
    /// Θ^S(u, x₀) from the same spherical averages.
    pub theta_s: f64,
    /// The constant relating Θ^S to the mass density.
    pub constant: f64,
    /// |Θ^S − constant·Θ^{n−p}(μ)| relative to |Θ^S|.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Second-order left difference of S at r, full and half sample.
fn left_derivative(u: &dyn ScalarField, x0: &[f64], r: f64, q: &Quadrature) -> Result<(f64, f64)> {
    let h = 1e-3 * r;
    let s0 = spherical_average(u, x0, r, q)?;
    let s1 = spherical_average(u, x0, r - h, q)?;
    let s2 = spherical_average(u, x0, r - 2.0 * h, q)?;
    let d = (3.0 * s0.value - 4.0 * s1.value + s2.value) / (2.0 * h);
    let noise = (3.0 * s0.noise + 4.0 * s1.noise + s2.noise) / (2.0 * h);
    Ok((d, noise))
}

/// Mass density Θ^{n−p}(Δu, x₀) via μ(B_r) = |S^{n−1}|·r^{n−1}·S′₋(r).
pub fn mass_density(
    u: &dyn ScalarField,
    x0: &[f64],
    p: f64,
    radii: &[f64],
    q: &Quadrature,
) -> Result<MassDensityReport> {
    let n = u.dim();
    if n < 3 {
        return Err(Error::Param(format!("mass density needs n ≥ 3, got {n}")));
    }
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Param("mass density needs at least three strictly decreasing radii".into()));
    }
    let nf = n as f64;
    let k = KernelSpec::standard(p)?;
    let area = nf * unit_ball_volume(nf);
    let dim_mu = nf - p;
    let alpha_mu = unit_ball_volume(dim_mu.max(0.0));
    let mut masses = Vec::new();
    let mut normalized = Vec::new();
    let mut errs = Vec::new();
    for &r in radii {
        let (d, e) = left_derivative(u, x0, r, q)?;
        let mu = area * r.powf(nf - 1.0) * d;
        masses.push((r, mu));
        let scale = alpha_mu * r.powf(dim_mu);
        normalized.push(mu / scale);
        errs.push(area * r.powf(nf - 1.0) * e / scale);
    }
    let m = radii.len();
    let theta_mass = normalized[m - 1];
    let bracket = (normalized[m - 2] - theta_mass).abs() + errs[m - 1];
    let oscillating = normalized.windows(3).zip(errs.windows(3)).any(|(w, e)| {
        (w[1] - w[0]) * (w[2] - w[1]) < 0.0 && (w[1] - w[0]).abs().min((w[2] - w[1]).abs()) > e[1] + 1e-9 * w[1].abs()
    });
    let warning = oscillating.then(|| "finite-difference masses oscillate; bracket widened".to_string());
    let bracket = if oscillating {
        bracket + normalized.iter().fold(0.0f64, |a, v| a.max((v - theta_mass).abs()))
    } else {
        bracket
    };
    let svals: Vec<_> = radii.iter().map(|&r| spherical_average(u, x0, r, q)).collect::<Result<_>>()?;
    let sv: Vec<f64> = svals.iter().map(|a| a.value).collect();
    let sn: Vec<f64> = svals.iter().map(|a| a.noise).collect();
    let theta_s = quotient_density(radii, &sv, &sn, &k)?.theta;
    let constant = if p == 2.0 {
        unit_ball_volume(nf - 2.0) / (nf * unit_ball_volume(nf))
    } else {
        alpha_mu / (nf * (p - 2.0).abs() * unit_ball_volume(nf))
    };
    Ok(MassDensityReport {
        field: u.name(),
        n,
        p,
        masses,
        normalized,
        theta_mass,
        bracket,
        theta_s,
        constant,
        residual: relative(theta_s - constant * theta_mass, theta_s),
        warning,
    })
}

/// One point of a density decay run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub point: Vec<f64>,
    pub distance: f64,
    /// Normalized Θ^V(u, x_k).
    pub theta: f64,
    pub bracket: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub center_theta: f64,
    pub center_bracket: f64,
    pub path: Vec<DecayPoint>,
    /// Θ(u, x_k) ≤ ε once |x_k − x₀| ≤ `threshold`.
    pub decay: PropertyReport,
    /// sup_k Θ(u, x_k) ≤ Θ(u, x₀) within brackets.
    pub usc: PropertyReport,
}

/// Radii r_j = d·2^{−(offset+j)}, j < count.
pub fn scaled_radii(d: f64, offset: i32, count: usize) -> Vec<f64> {
    (0..count).map(|j| d * 2f64.powi(-(offset + j as i32))).collect()
}

/// Normalized Θ^V along a path x_k → x₀. Balls at x_k are scaled to the
/// distance to the nearest singular point so they stay in the smooth region.
#[allow(clippy::too_many_arguments)]
pub fn density_decay_check(
    u: &dyn ScalarField,
    x0: &[f64],
    path: &[Vec<f64>],
    p: f64,
    center_radii: &[f64],
    q: &Quadrature,
    eps: f64,
    threshold: f64,
) -> Result<DecayReport> {
    let center = densities(u, x0, p, center_radii, q)?;
    let (ct, cb) = (center.theta_v_normalized(), center.theta_v_normalized_bracket());
    let sing = u.singular_set();
    let mut pts = Vec::with_capacity(path.len());
    for x in path {
        let d = sing
            .iter()
            .map(|s| norm(&s.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min);
        if !(d > 0.0) {
            return Err(Error::Domain("path point lies on the singular set".into()));
        }
        let scale = if d.is_finite() { d } else { 1.0 };
        let rep = densities(u, x, p, &scaled_radii(scale, 2, center_radii.len()), q)?;
        let dist = norm(&x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
        pts.push(DecayPoint {
            point: x.clone(),
            distance: dist,
            theta: rep.theta_v_normalized(),
            bracket: rep.theta_v_normalized_bracket(),
        });
    }
    let late: Vec<&DecayPoint> = pts.iter().filter(|d| d.distance <= threshold).collect();
    let worst = late.iter().map(|d| d.theta.abs()).fold(0.0, f64::max);
    let decay = PropertyReport::new("density-decay", u.name(), late.len(), worst, eps);
    let excess = pts.iter().map(|d| d.theta - d.bracket - ct).fold(f64::NEG_INFINITY, f64::max);
    let usc = PropertyReport::new("density-usc", u.name(), pts.len(), excess.max(0.0), cb + MONOTONE_TOL);
    Ok(DecayReport { center_theta: ct, center_bracket: cb, path: pts, decay, usc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::catalog::riesz_kernel;
    use crate::flow::quad::QuadSpec;

    #[test]
    fn two_dimensional_harnack_constant() {
        let e = std::f64::consts::E;
        assert!((harnack_constant(2, 2.0).unwrap() - (e + 1.0) / (e - 1.0)).abs() < 1e-12);
        assert!((harnack_constant(2, 2.0).unwrap() - 2.1640).abs() < 1e-4);
    }

    #[test]
    fn harnack_constants_exceed_one() {
        for n in [2, 3, 5] {
            for p in [1.2, 1.7, 2.5, 4.0] {
                let c = harnack_constant(n, p).unwrap();
                assert!(c > 1.0 && c.is_finite(), "n={n} p={p} c={c}");
            }
        }
        assert!(harnack_constant(3, 1.0).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(0.0) - 1.0).abs() < 1e-14);
        assert!((unit_ball_volume(2.0) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3.0) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn quotient_density_of_exact_kernel() {
        let k = KernelSpec::standard(3.0).unwrap();
        let radii = [1.0, 0.5, 0.25, 0.125];
        let vals: Vec<f64> = radii.iter().map(|&r| 2.0 * k.eval(r) + 7.0).collect();
        let d = quotient_density(&radii, &vals, &[0.0; 4], &k).unwrap();
        assert!((d.theta - 2.0).abs() < 1e-12 && d.bracket < 1e-12 && d.monotone);
        assert!(quotient_density(&[1.0, 2.0, 3.0], &[0.0; 3], &[0.0; 3], &k).is_err());
    }

    #[test]
    fn kernel_densities() {
        let q = Quadrature::new(3, QuadSpec { sphere: 512, radial: 48, seed: 0 }).unwrap();
        let u = riesz_kernel(3, 2.0, 1.5, None).unwrap();
        let radii = scaled_radii(1.0, 0, 5);
        let rep = densities(u.as_ref(), &[0.0; 3], 1.5, &radii, &q).unwrap();
        assert!((rep.theta_m.theta - 2.0).abs() < 1e-9);
        assert!((rep.theta_s.theta - 2.0).abs() < 1e-9);
        assert!((rep.theta_v_normalized() - 2.0).abs() < 1e-6);
        assert!(rep.flags.is_empty(), "{:?}", rep.flags);
        let h = rep.harnack.unwrap();
        assert!(h.lower_ok && h.upper_ok);
    }
}
