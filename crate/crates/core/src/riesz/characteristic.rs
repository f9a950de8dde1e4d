use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::sample::{rng, unit_vec};
use crate::linalg::{projector_onto, projector_perp, SymMatrix, UnitVector};
use crate::report::PropertyReport;
use crate::subeq::{member_tol, Invariance, Subequation};

/// Initial upper end of the bisection bracket.
pub const P_MAX: f64 = 64.0;
/// Default bisection tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A characteristic value in [1, ∞].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Charx {
    Finite(f64),
    Infinite,
}

impl Charx {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Charx::Finite(v) => Some(*v),
            Charx::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Charx::Infinite)
    }

    /// Agreement within `tol`; two infinities agree.
    pub fn close_to(&self, other: &Charx, tol: f64) -> bool {
        match (self, other) {
            (Charx::Finite(a), Charx::Finite(b)) => (a - b).abs() <= tol,
            (Charx::Infinite, Charx::Infinite) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Charx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Charx::Finite(v) => write!(f, "{v:.9}"),
            Charx::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Charx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Charx::Finite(v) => s.serialize_f64(*v),
            Charx::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Charx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Charx::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Charx::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s}"))),
        }
    }
}

/// A characteristic together with its final bisection bracket width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharValue {
    pub value: Charx,
    pub bracket: f64,
}

/// (p_F, q_F) with brackets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPair {
    pub p: Charx,
    pub q: Charx,
    pub p_bracket: f64,
    pub q_bracket: f64,
}

impl CharacteristicPair {
    pub fn new(p: CharValue, q: CharValue) -> Result<Self> {
        if let (Some(a), Some(b)) = (p.value.finite(), q.value.finite()) {
            if (a - 1.0) * (b - 1.0) < 1.0 - 1e-6 {
                return Err(Error::Invariant(format!("(p−1)(q−1) = {} < 1", (a - 1.0) * (b - 1.0))));
            }
        }
        Ok(Self { p: p.value, q: q.value, p_bracket: p.bracket, q_bracket: q.bracket })
    }

    /// (p−1)(q−1) when both are finite.
    pub fn pair_product(&self) -> Option<f64> {
        Some((self.p.finite()? - 1.0) * (self.q.finite()? - 1.0))
    }
}

/// The direction used by default: e₁, or the first vector of the first
/// sampled plane for geometric subequations.
pub fn default_direction(f: &Subequation) -> UnitVector {
    if let Some(sample) = f.grassmann_sample() {
        if let Ok(e) = UnitVector::normalized(&sample.planes()[0].column(0)) {
            return e;
        }
    }
    UnitVector::basis(f.n, 0)
}

/// P_{e⊥} − (p̄−1)P_e.
pub fn increasing_test_matrix(e: &UnitVector, pbar: f64) -> SymMatrix {
    &projector_perp(e) - &projector_onto(e).scale(pbar - 1.0)
}

/// −P_{e⊥} + (q̄−1)P_e.
pub fn decreasing_test_matrix(e: &UnitVector, qbar: f64) -> SymMatrix {
    &projector_onto(e).scale(qbar - 1.0) - &projector_perp(e)
}

fn check_inputs(f: &Subequation, e: &UnitVector, tol: f64) -> Result<()> {
    if e.n() != f.n {
        return Err(Error::Domain(format!("direction in ℝ^{} for a subequation on ℝ^{}", e.n(), f.n)));
    }
    if !(tol > 0.0) {
        return Err(Error::Param("tolerance must be positive".into()));
    }
    Ok(())
}

/// Upper bracket end where `inside(hi)` is false, doubling P_MAX once.
fn upper_end(inside: impl Fn(f64) -> bool, what: &str, name: &str) -> Result<f64> {
    for hi in [P_MAX, 2.0 * P_MAX] {
        if !inside(hi) {
            return Ok(hi);
        }
    }
    Err(Error::Solver(format!("{what} of {name}: no sign change in [1, {}]", 2.0 * P_MAX)))
}

/// p_F: the p̄ where P_{e⊥} − (p̄−1)P_e crosses ∂F, or ∞ when −P_e ∈ F.
pub fn increasing_characteristic(f: &Subequation, e: &UnitVector, tol: f64) -> Result<CharValue> {
    check_inputs(f, e, tol)?;
    let pe = projector_onto(e);
    let band = member_tol(&pe);
    let m_neg = f.margin(&-&pe);
    let minus_pe_in_f = m_neg >= -band;
    let pe_in_int_dual = f.dual().margin(&pe) > band;
    if minus_pe_in_f == pe_in_int_dual {
        return Err(Error::Solver(format!("infinity tests disagree for {}", f.name)));
    }
    if minus_pe_in_f {
        if m_neg > 1e-7 * (1.0 + pe.frobenius()) {
            return Err(Error::Solver(format!("−P_e lies in the interior of {}", f.name)));
        }
        return Ok(CharValue { value: Charx::Infinite, bracket: 0.0 });
    }
    let inside = |pbar: f64| f.margin(&increasing_test_matrix(e, pbar)) >= 0.0;
    if f.margin(&increasing_test_matrix(e, 1.0)) < -band {
        return Err(Error::Solver(format!("P_{{e⊥}} is not in {}", f.name)));
    }
    let mut lo = 1.0;
    let mut hi = upper_end(inside, "increasing characteristic", &f.name)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CharValue { value: Charx::Finite(0.5 * (lo + hi)), bracket: hi - lo })
}

/// q_F: the q̄ where −P_{e⊥} + (q̄−1)P_e crosses ∂F; finite iff P_e ∈ Int F.
pub fn decreasing_characteristic(f: &Subequation, e: &UnitVector, tol: f64) -> Result<CharValue> {
    check_inputs(f, e, tol)?;
    let pe = projector_onto(e);
    if f.margin(&pe) <= member_tol(&pe) {
        return Ok(CharValue { value: Charx::Infinite, bracket: 0.0 });
    }
    let inside = |qbar: f64| f.margin(&decreasing_test_matrix(e, qbar)) >= 0.0;
    if inside(1.0) {
        return Ok(CharValue { value: Charx::Finite(1.0), bracket: 0.0 });
    }
    let mut lo = 1.0;
    let mut hi = upper_end(|q| !inside(q), "decreasing characteristic", &f.name)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CharValue { value: Charx::Finite(0.5 * (lo + hi)), bracket: hi - lo })
}

/// Both characteristics, with q cross-checked against p of the dual.
pub fn characteristic_pair(f: &Subequation, e: &UnitVector, tol: f64) -> Result<CharacteristicPair> {
    let p = increasing_characteristic(f, e, tol)?;
    let q = decreasing_characteristic(f, e, tol)?;
    let q_dual = increasing_characteristic(&f.dual(), e, tol)?;
    if !q.value.close_to(&q_dual.value, 10.0 * tol) {
        return Err(Error::Solver(format!(
            "decreasing characteristic {} disagrees with dual increasing characteristic {}",
            q.value, q_dual.value
        )));
    }
    CharacteristicPair::new(p, q)
}

/// Margins at p, p − tol and p + tol for a computed finite characteristic.
#[derive(Clone, Copy, Debug)]
pub struct BisectionCertificate {
    pub at: f64,
    pub below: f64,
    pub above: f64,
    pub band: f64,
}

impl BisectionCertificate {
    pub fn holds(&self) -> bool {
        self.at.abs() <= self.band && self.below >= 0.0 && self.above <= 0.0
    }
}

pub fn bisection_certificate(f: &Subequation, e: &UnitVector, p: f64, tol: f64) -> BisectionCertificate {
    let a = increasing_test_matrix(e, p);
    BisectionCertificate {
        at: f.margin(&a),
        below: f.margin(&increasing_test_matrix(e, p - tol)),
        above: f.margin(&increasing_test_matrix(e, p + tol)),
        band: crate::subeq::boundary_tol(&a),
    }
}

/// Compares p_F along `count` random directions with the default one.
pub fn check_direction_independence(f: &Subequation, count: usize, tol: f64, seed: u64) -> Result<PropertyReport> {
    if matches!(f.invariance, Invariance::SampledSt | Invariance::None) {
        return Ok(PropertyReport::skipped("direction-independence", &f.name, "no transitive symmetry group declared"));
    }
    let base = increasing_characteristic(f, &default_direction(f), tol)?.value;
    let mut r = rng(seed);
    let dirs: Vec<UnitVector> =
        (0..count).map(|_| UnitVector::normalized(&unit_vec(&mut r, f.n)).expect("unit")).collect();
    let vals = crate::par::map(&dirs, |e| increasing_characteristic(f, e, tol));
    let mut worst: f64 = 0.0;
    for v in vals {
        let v = v?.value;
        worst = worst.max(match (v, base) {
            (Charx::Finite(a), Charx::Finite(b)) => (a - b).abs(),
            (Charx::Infinite, Charx::Infinite) => 0.0,
            _ => f64::INFINITY,
        });
    }
    Ok(PropertyReport::new("direction-independence", &f.name, count, worst, 10.0 * tol))
}
