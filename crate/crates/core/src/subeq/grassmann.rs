use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::linalg::sample::{random_frame_with, rng};
use crate::linalg::{norm, Frame, Mat, SymMatrix};

/// Default principal-angle tolerance in radians.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-3;

/// A finite set of p-planes in ℝⁿ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrassmannSample {
    n: usize,
    p: usize,
    planes: Vec<Frame>,
    /// Planes whose smallest principal angle is at most this are treated as
    /// intersecting.
    pub angle_tol: f64,
    /// A unit vector at distance at most this from a plane is treated as
    /// lying in it. Defaults to `angle_tol`.
    pub contain_tol: f64,
}

/// Default sample size: 512 planes for n ≤ 4, 2048 above.
pub fn default_plane_count(n: usize) -> usize {
    if n <= 4 {
        512
    } else {
        2048
    }
}

impl GrassmannSample {
    pub fn new(planes: Vec<Frame>) -> Result<Self> {
        let Some(first) = planes.first() else {
            return param("Grassmann sample must be non-empty");
        };
        let (n, p) = (first.n(), first.p());
        if planes.iter().any(|w| w.n() != n || w.p() != p) {
            return param("all planes in a sample must share (n, p)");
        }
        Ok(Self { n, p, planes, angle_tol: DEFAULT_ANGLE_TOL, contain_tol: DEFAULT_ANGLE_TOL })
    }

    /// `count` independent uniformly distributed p-planes.
    pub fn random(n: usize, p: usize, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return param("Grassmann sample must be non-empty");
        }
        let mut r = rng(seed);
        let planes = (0..count).map(|_| random_frame_with(&mut r, n, p)).collect::<Result<Vec<_>>>()?;
        Self::new(planes)
    }

    pub fn with_tolerances(mut self, angle_tol: f64, contain_tol: f64) -> Self {
        self.angle_tol = angle_tol;
        self.contain_tol = contain_tol;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn planes(&self) -> &[Frame] {
        &self.planes
    }

    /// True when every rotated plane g·W lies within `angle_tol` of some
    /// sampled plane.
    pub fn preserved_by(&self, g: &Mat) -> bool {
        self.planes.iter().all(|w| {
            let gw = match w.rotate(g) {
                Ok(f) => f,
                Err(_) => return false,
            };
            self.planes.iter().any(|v| largest_principal_angle(&gw, v) <= self.angle_tol)
        })
    }
}

/// Cosines of the principal angles between two planes, descending.
pub fn principal_cosines(a: &Frame, b: &Frame) -> Vec<f64> {
    let m = a.columns().transpose().matmul(b.columns()).expect("same ambient dimension");
    let mtm = SymMatrix::from_mat(&m.transpose().matmul(&m).expect("square")).expect("square");
    let mut s: Vec<f64> = mtm.eigs().into_iter().map(|x| x.max(0.0).sqrt().min(1.0)).collect();
    s.reverse();
    s
}

/// Principal angles between two planes, ascending.
pub fn principal_angles(a: &Frame, b: &Frame) -> Vec<f64> {
    principal_cosines(a, b).into_iter().map(f64::acos).collect()
}

pub fn smallest_principal_angle(a: &Frame, b: &Frame) -> f64 {
    principal_cosines(a, b).first().copied().unwrap_or(0.0).acos()
}

fn largest_principal_angle(a: &Frame, b: &Frame) -> f64 {
    principal_cosines(a, b).last().copied().unwrap_or(1.0).acos()
}

/// Outcome of a transitivity search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transitivity {
    /// Plane indices W₀, …, W_k with x ∈ W₀, y ∈ W_k and consecutive
    /// planes intersecting.
    Chain(Vec<usize>),
    Failure(String),
}

/// Adjacency lists of the intersection graph.
pub fn intersection_graph(g: &GrassmannSample) -> Vec<Vec<usize>> {
    let m = g.planes.len();
    crate::par::map_range(m, |i| {
        (0..m)
            .filter(|&j| j != i && smallest_principal_angle(&g.planes[i], &g.planes[j]) <= g.angle_tol)
            .collect::<Vec<usize>>()
    })
}

/// Shortest chain of pairwise-intersecting sampled planes from one
/// containing x to one containing y.
pub fn transitivity_check(g: &GrassmannSample, x: &[f64], y: &[f64]) -> Transitivity {
    let (nx, ny) = (norm(x), norm(y));
    if x.len() != g.n || y.len() != g.n {
        return Transitivity::Failure("endpoint dimension does not match the sample".into());
    }
    if nx == 0.0 || ny == 0.0 {
        return Transitivity::Failure("endpoints must be nonzero".into());
    }
    let ux: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let uy: Vec<f64> = y.iter().map(|v| v / ny).collect();
    let contains = |u: &[f64]| -> Vec<usize> {
        (0..g.planes.len()).filter(|&i| g.planes[i].distance(u) <= g.contain_tol).collect()
    };
    let starts = contains(&ux);
    let ends = contains(&uy);
    if starts.is_empty() {
        return Transitivity::Failure(format!("no sampled plane contains x (tolerance {})", g.contain_tol));
    }
    if ends.is_empty() {
        return Transitivity::Failure(format!("no sampled plane contains y (tolerance {})", g.contain_tol));
    }
    let adj = intersection_graph(g);
    let m = g.planes.len();
    let mut is_end = vec![false; m];
    for &e in &ends {
        is_end[e] = true;
    }
    let mut prev = vec![usize::MAX; m];
    let mut seen = vec![false; m];
    let mut queue = VecDeque::new();
    for &s in &starts {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if is_end[v] {
            let mut chain = vec![v];
            let mut c = v;
            while prev[c] != usize::MAX {
                c = prev[c];
                chain.push(c);
            }
            chain.reverse();
            return Transitivity::Chain(chain);
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    Transitivity::Failure(format!(
        "{} planes contain x and {} contain y but no intersecting chain joins them",
        starts.len(),
        ends.len()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_angles_of_coordinate_planes() {
        let a = Frame::coordinate(4, &[0, 1]).unwrap();
        let b = Frame::coordinate(4, &[1, 2]).unwrap();
        let ang = principal_angles(&a, &b);
        assert!(ang[0].abs() < 1e-7);
        assert!((ang[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        let c = Frame::coordinate(4, &[2, 3]).unwrap();
        assert!((smallest_principal_angle(&a, &c) - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn two_plane_chain() {
        let w = Frame::coordinate(4, &[0, 1]).unwrap();
        let w2 = Frame::coordinate(4, &[1, 2]).unwrap();
        let g = GrassmannSample::new(vec![w, w2]).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        let y = [0.0, 0.0, 1.0, 0.0];
        assert_eq!(transitivity_check(&g, &x, &y), Transitivity::Chain(vec![0, 1]));
    }

    #[test]
    fn single_plane_fails_for_perpendicular_y() {
        let g = GrassmannSample::new(vec![Frame::coordinate(3, &[0, 1]).unwrap()]).unwrap();
        let r = transitivity_check(&g, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]);
        assert!(matches!(r, Transitivity::Failure(_)));
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(GrassmannSample::new(vec![]).is_err());
        assert!(GrassmannSample::random(3, 2, 0, 1).is_err());
    }
}
