//! Sphere point sets and Gauss–Legendre rules.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::sample::rng;
use crate::linalg::{dot, norm};

/// Default sphere sample size for dimension `n`.
pub fn default_sphere_size(n: usize) -> usize {
    if n <= 4 {
        4096
    } else {
        16384
    }
}

/// Number of Gauss–Legendre nodes used for the radial reduction of V.
pub const GL_NODES: usize = 48;

/// Sizes of the quadrature rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub sphere: usize,
    pub radial: usize,
    pub seed: u64,
}

impl QuadSpec {
    pub fn default_for(n: usize) -> Self {
        Self { sphere: default_sphere_size(n), radial: GL_NODES, seed: 0 }
    }
}

/// Equal-weight point set on S^{n−1} stored as antipodal pairs
/// [x₀, −x₀, x₁, −x₁, …], so every even prefix is itself symmetric.
#[derive(Debug)]
pub struct SphereQuadrature {
    n: usize,
    points: Vec<Vec<f64>>,
    spacing: OnceLock<f64>,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

fn first_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

impl SphereQuadrature {
    /// Shifted Halton points pushed to the sphere through the inverse normal
    /// CDF; van der Corput angles for the circle.
    pub fn new(n: usize, size: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Param(format!("sphere quadrature needs n ≥ 2, got {n}")));
        }
        if size < 4 || !size.is_multiple_of(2) {
            return Err(Error::Param(format!("sphere sample size must be even and ≥ 4, got {size}")));
        }
        let mut r = rng(seed ^ 0x5eed_5f3e);
        let half = size / 2;
        let mut points = Vec::with_capacity(size);
        fn push(points: &mut Vec<Vec<f64>>, v: Vec<f64>) {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            points.push(v);
            points.push(neg);
        }
        if n == 2 {
            let shift: f64 = r.random();
            for i in 0..half {
                let th = std::f64::consts::PI * ((radical_inverse(i as u64 + 1, 2) + shift) % 1.0);
                push(&mut points, vec![th.cos(), th.sin()]);
            }
        } else {
            let primes = first_primes(n);
            let shifts: Vec<f64> = (0..n).map(|_| r.random()).collect();
            let normal = Normal::standard();
            let mut i = 1u64;
            while points.len() < size {
                let v: Vec<f64> = primes
                    .iter()
                    .zip(&shifts)
                    .map(|(&b, s)| {
                        let u = ((radical_inverse(i, b) + s) % 1.0).clamp(1e-12, 1.0 - 1e-12);
                        normal.inverse_cdf(u)
                    })
                    .collect();
                i += 1;
                let len = norm(&v);
                if len > 1e-9 {
                    push(&mut points, v.into_iter().map(|x| x / len).collect());
                }
            }
        }
        Ok(Self { n, points, spacing: OnceLock::new() })
    }

    pub fn for_spec(n: usize, q: &QuadSpec) -> Result<Self> {
        Self::new(n, q.sphere, q.seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// The leading half of the sample, itself antipodally symmetric.
    pub fn half(&self) -> &[Vec<f64>] {
        let h = self.points.len() / 2;
        &self.points[..h + h % 2]
    }

    /// Mean distance from a point to its nearest neighbour on the unit sphere.
    pub fn spacing(&self) -> f64 {
        *self.spacing.get_or_init(|| {
            let d = crate::par::map(&self.points, |x| {
                self.points
                    .iter()
                    .filter(|y| !std::ptr::eq(*y, x))
                    .map(|y| (2.0 - 2.0 * dot(x, y)).max(0.0).sqrt())
                    .fold(f64::INFINITY, f64::min)
            });
            d.iter().sum::<f64>() / d.len() as f64
        })
    }

    /// Indices of the `k` sample points nearest to point `i`.
    pub fn neighbours(&self, i: usize, k: usize) -> Vec<usize> {
        let x = &self.points[i];
        let mut idx: Vec<(f64, usize)> =
            self.points.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, y)| (-dot(x, y), j)).collect();
        idx.sort_by(|a, b| a.0.total_cmp(&b.0));
        idx.into_iter().take(k).map(|(_, j)| j).collect()
    }
}

/// Gauss–Legendre rule mapped to [0, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_m from the Chebyshev guesses.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Param("Gauss–Legendre needs at least one node".into()));
        }
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pm = if m == 1 { x } else { p1 };
                let pm1 = if m == 1 { 1.0 } else { p0 };
                dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
                let dx = pm / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = 0.5 * (1.0 - x);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(Self { nodes, weights })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let g = GaussLegendre::new(GL_NODES).unwrap();
        for k in [0, 1, 5, 40, 95] {
            let v = g.integrate(|x| x.powi(k));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "k={k}: {v}");
        }
        assert!((GaussLegendre::new(1).unwrap().integrate(|x| x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_points_are_unit_and_symmetric() {
        for n in [2, 3, 4, 7] {
            let q = SphereQuadrature::new(n, 512, 1).unwrap();
            assert_eq!(q.len(), 512);
            for pair in q.points().chunks(2) {
                assert!((norm(&pair[0]) - 1.0).abs() < 1e-12);
                assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a == &-b));
            }
        }
    }

    #[test]
    fn second_moments_match_the_sphere() {
        // E[x_i²] = 1/n and E[x₁⁴] = 3/(n(n+2)) on S^{n−1}.
        for n in [2, 3, 4, 6] {
            let q = SphereQuadrature::new(n, default_sphere_size(n), 3).unwrap();
            let m = q.len() as f64;
            let m2 = q.points().iter().map(|x| x[n - 1] * x[n - 1]).sum::<f64>() / m;
            let m4 = q.points().iter().map(|x| x[0].powi(4)).sum::<f64>() / m;
            assert!((m2 - 1.0 / n as f64).abs() < 5e-3, "n={n} m2={m2}");
            assert!((m4 - 3.0 / (n * (n + 2)) as f64).abs() < 5e-3, "n={n} m4={m4}");
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(SphereQuadrature::new(1, 64, 0).is_err());
        assert!(SphereQuadrature::new(3, 63, 0).is_err());
    }
}
