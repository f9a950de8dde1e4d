//! Scalar fields u: B_R(0) → ℝ ∪ {−∞}.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Subequation class for which a catalog field is known to be subharmonic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Human-readable description of the subequation class.
    pub subequation: String,
    /// Riesz characteristic of that class, when meaningful.
    pub p: Option<f64>,
    /// True when the class consists of convex subequations, which makes the
    /// spherical and volume averages monotone as well as the maximum.
    pub convex: bool,
}

impl Certificate {
    pub fn none() -> Self {
        Self { subequation: "none".into(), p: None, convex: false }
    }

    pub fn is_none(&self) -> bool {
        self.subequation == "none"
    }
}

/// A deterministic scalar field on a ball centred at the origin.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    /// u(x); may be −∞ on the singular set.
    fn eval(&self, x: &[f64]) -> f64;

    fn name(&self) -> String;

    /// Radius R of the domain ball B_R(0).
    fn domain_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// Points where u may be −∞ or non-smooth.
    fn singular_set(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    /// u(0) when finite.
    fn reference_value(&self) -> Option<f64> {
        let v = self.eval(&vec![0.0; self.dim()]);
        v.is_finite().then_some(v)
    }

    /// Exact sup of u over the closed ball B_r(x₀), when known in closed form.
    fn ball_max(&self, _x0: &[f64], _r: f64) -> Option<f64> {
        None
    }

    fn certificate(&self) -> Certificate {
        Certificate::none()
    }
}

pub type Field = Arc<dyn ScalarField>;
