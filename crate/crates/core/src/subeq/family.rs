use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grassmann::GrassmannSample;
use crate::error::{param, Result};
use crate::linalg::{
    block_means, elementary_symmetric_all, hermitian_part, trace_over_subspace, ComplexStructure, QuaternionStructure,
    Structure, SymMatrix,
};

/// Symmetry group a subequation is invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Invariance {
    /// O(n).
    Orthogonal,
    /// U(n) acting on ℝ^{2n}.
    Unitary,
    /// Sp(n) acting on ℝ^{4n}.
    Symplectic,
    /// Invariance under a group approximated by a finite plane sample.
    SampledSt,
    None,
}

impl Invariance {
    pub fn tag(&self) -> &'static str {
        match self {
            Invariance::Orthogonal => "O(n)",
            Invariance::Unitary => "U(n)",
            Invariance::Symplectic => "Sp(n)",
            Invariance::SampledSt => "sampled-ST",
            Invariance::None => "none",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Invariance::Orthogonal => 3,
            Invariance::Unitary => 2,
            Invariance::Symplectic => 1,
            Invariance::SampledSt | Invariance::None => 0,
        }
    }

    /// Largest group leaving both sets invariant, within this coarse lattice.
    pub fn meet(self, other: Invariance) -> Invariance {
        if self == other {
            return self;
        }
        if self.rank() == 0 || other.rank() == 0 {
            return Invariance::None;
        }
        if self.rank() < other.rank() {
            self
        } else {
            other
        }
    }
}

/// Gårding-hyperbolic operators with explicit ordered eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GardingOperator {
    /// det A; branches λ_k.
    Det,
    /// The operator on Λ^p ℝⁿ; branches are the ordered p-fold eigenvalue
    /// sums, divided by p so that Λ(Id) = 1.
    PFoldSum(usize),
    /// A + (δ/n)tr(A)·Id; branches (λ_k + (δ/n)tr A)/(1+δ).
    PDelta(f64),
}

impl GardingOperator {
    /// Number of branches for an n×n argument.
    pub fn degree(&self, n: usize) -> usize {
        match *self {
            GardingOperator::Det | GardingOperator::PDelta(_) => n,
            GardingOperator::PFoldSum(p) => binomial(n, p),
        }
    }

    /// Ordered Gårding eigenvalues from the ordered spectrum.
    pub fn eigenvalues(&self, lams: &[f64]) -> Vec<f64> {
        let n = lams.len();
        match *self {
            GardingOperator::Det => lams.to_vec(),
            GardingOperator::PDelta(delta) => {
                let tr: f64 = lams.iter().sum();
                lams.iter().map(|l| (l + delta / n as f64 * tr) / (1.0 + delta)).collect()
            }
            GardingOperator::PFoldSum(p) => {
                let mut sums = Vec::with_capacity(binomial(n, p));
                let mut idx: Vec<usize> = (0..p).collect();
                loop {
                    sums.push(idx.iter().map(|&i| lams[i]).sum::<f64>() / p as f64);
                    let mut k = p;
                    while k > 0 && idx[k - 1] == n - p + k - 1 {
                        k -= 1;
                    }
                    if k == 0 {
                        break;
                    }
                    idx[k - 1] += 1;
                    for j in k..p {
                        idx[j] = idx[j - 1] + 1;
                    }
                }
                sums.sort_by(f64::total_cmp);
                sums
            }
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The defining data of a subequation.
#[derive(Clone, Serialize)]
pub enum Family {
    /// P = {A ≥ 0}.
    Positive,
    /// λ₁+…+λ_{[p]} + (p−[p])λ_{[p]+1} ≥ 0.
    PConvex { p: f64 },
    /// σ₁,…,σ_k ≥ 0.
    SigmaK { k: usize },
    /// λ_min + (δ/n)tr ≥ 0.
    PDelta { delta: f64 },
    /// λ_min + (p−1)λ_max ≥ 0.
    MinMax { p: f64 },
    /// λ₁ + (p−1)λ₂ ≥ 0.
    Min2 { p: f64 },
    /// Signed q-th powers of the k smallest eigenvalues.
    TracePower { k: f64, q: f64 },
    /// λ_max ≥ 0.
    Subaffine,
    /// λ_min + ((p−1)/(n−p))tr ≥ 0.
    LargestConvex { p: f64 },
    /// All of Sym(ℝⁿ).
    FullSpace,
    /// Λ_k ≥ 0 for a Gårding operator.
    Garding { op: GardingOperator, k: usize },
    /// F̃ = {A : −A ∉ Int F}.
    Dual(Box<Subequation>),
    /// Base family applied to the reduced spectrum of the hermitian part.
    Lift {
        #[serde(skip)]
        structure: Arc<Structure>,
        base: Box<Subequation>,
    },
    /// {A : A + (δ/n)tr(A)Id ∈ F}.
    Regularized { base: Box<Subequation>, delta: f64 },
    /// tr_W(A) ≥ 0 for every sampled W.
    Geometric(#[serde(skip)] Arc<GrassmannSample>),
    /// F₁ ∩ F₂ ∩ …
    Intersection(Vec<Subequation>),
    /// F₁ ∪ F₂ ∪ …
    Union(Vec<Subequation>),
}

/// A closed set F ⊂ Sym(ℝⁿ) with F + P ⊂ F, described by a margin function
/// m with F = {m ≥ 0} and Int F = {m > 0}.
#[derive(Clone, Serialize)]
pub struct Subequation {
    pub name: String,
    pub n: usize,
    pub convex: bool,
    pub invariance: Invariance,
    pub family: Family,
}

impl fmt::Debug for Subequation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subequation({}, n={}, {})", self.name, self.n, self.invariance.tag())
    }
}

/// Relative membership tolerance: A ∈ F ⟺ m(A) ≥ −1e−9·(1+‖A‖).
pub const MEMBER_TOL: f64 = 1e-9;
/// Relative boundary band: A ∈ ∂F ⟺ |m(A)| ≤ 1e−7·(1+‖A‖).
pub const BOUNDARY_TOL: f64 = 1e-7;

pub fn member_tol(a: &SymMatrix) -> f64 {
    MEMBER_TOL * (1.0 + a.frobenius())
}

pub fn boundary_tol(a: &SymMatrix) -> f64 {
    BOUNDARY_TOL * (1.0 + a.frobenius())
}

fn signed_pow(t: f64, q: f64) -> f64 {
    if t >= 0.0 {
        t.powf(q)
    } else {
        -(-t).powf(q)
    }
}

/// Σ_{j<[p]} v_j + (p−[p])·v_{[p]} over an ascending list.
fn fractional_prefix_sum(v: &[f64], p: f64) -> f64 {
    let whole = p.floor() as usize;
    let mut s: f64 = v.iter().take(whole).sum();
    let frac = p - whole as f64;
    if frac > 0.0 && whole < v.len() {
        s += frac * v[whole];
    }
    s
}

impl Subequation {
    fn leaf(name: String, n: usize, convex: bool, family: Family) -> Self {
        Self { name, n, convex, invariance: Invariance::Orthogonal, family }
    }

    pub fn positive(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::leaf("P".into(), n, true, Family::Positive))
    }

    pub fn p_convex(n: usize, p: f64) -> Result<Self> {
        check_n(n)?;
        if !(p >= 1.0 && p <= n as f64) {
            return param(format!("P_p needs 1 ≤ p ≤ n, got p={p}"));
        }
        Ok(Self::leaf(format!("P_{p}"), n, true, Family::PConvex { p }))
    }

    pub fn laplacian(n: usize) -> Result<Self> {
        let mut s = Self::p_convex(n, n as f64)?;
        s.name = "Laplacian".into();
        Ok(s)
    }

    pub fn sigma_k(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k == 0 || k > n {
            return param(format!("Σ_k needs 1 ≤ k ≤ n, got k={k}"));
        }
        Ok(Self::leaf(format!("Sigma_{k}"), n, true, Family::SigmaK { k }))
    }

    pub fn p_delta(n: usize, delta: f64) -> Result<Self> {
        check_n(n)?;
        if !(delta > 0.0 && delta.is_finite()) {
            return param(format!("P(δ) needs δ > 0, got {delta}"));
        }
        Ok(Self::leaf(format!("P({delta})"), n, true, Family::PDelta { delta }))
    }

    fn check_p_range(n: usize, p: f64, what: &str) -> Result<()> {
        check_n(n)?;
        if !(p >= 1.0 && p.is_finite()) {
            return param(format!("{what} needs 1 ≤ p < ∞, got {p}"));
        }
        Ok(())
    }

    pub fn min_max(n: usize, p: f64) -> Result<Self> {
        Self::check_p_range(n, p, "P_p^{min/max}")?;
        Ok(Self::leaf(format!("P_{p}^min/max"), n, false, Family::MinMax { p }))
    }

    pub fn min2(n: usize, p: f64) -> Result<Self> {
        Self::check_p_range(n, p, "P_p^{min/2}")?;
        if n < 2 {
            return param("P_p^{min/2} needs n ≥ 2");
        }
        Ok(Self::leaf(format!("P_{p}^min/2"), n, false, Family::Min2 { p }))
    }

    pub fn trace_power(n: usize, k: f64, q: f64) -> Result<Self> {
        check_n(n)?;
        if !(k >= 1.0 && k <= n as f64) {
            return param(format!("trace power needs 1 ≤ k ≤ n, got k={k}"));
        }
        if !(q > 0.0 && q.is_finite()) {
            return param(format!("trace power needs q > 0, got q={q}"));
        }
        Ok(Self::leaf(format!("TracePower(k={k},q={q})"), n, false, Family::TracePower { k, q }))
    }

    pub fn subaffine(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::leaf("Subaffine".into(), n, false, Family::Subaffine))
    }

    pub fn largest_convex(n: usize, p: f64) -> Result<Self> {
        check_n(n)?;
        if !(p >= 1.0 && p < n as f64) {
            return param(format!("largest convex family needs 1 ≤ p < n, got p={p}"));
        }
        Ok(Self::leaf(format!("LargestConvex({p})"), n, true, Family::LargestConvex { p }))
    }

    pub fn full_space(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::leaf("FullSpace".into(), n, true, Family::FullSpace))
    }

    pub fn garding(n: usize, op: GardingOperator, k: usize) -> Result<Self> {
        check_n(n)?;
        match op {
            GardingOperator::PFoldSum(p) if p == 0 || p > n => {
                return param(format!("p-fold sums need 1 ≤ p ≤ n, got {p}"))
            }
            GardingOperator::PDelta(d) if !(d > 0.0 && d.is_finite()) => {
                return param(format!("P(δ) operator needs δ > 0, got {d}"))
            }
            _ => {}
        }
        let m = op.degree(n);
        if k == 0 || k > m {
            return param(format!("branch index k={k} outside 1..={m}"));
        }
        Ok(Self::leaf(format!("Garding({op:?},k={k})"), n, k == 1, Family::Garding { op, k }))
    }

    pub fn dual(&self) -> Self {
        if let Family::Dual(inner) = &self.family {
            return (**inner).clone();
        }
        Self {
            name: format!("dual({})", self.name),
            n: self.n,
            convex: false,
            invariance: self.invariance,
            family: Family::Dual(Box::new(self.clone())),
        }
    }

    /// F^ℂ on ℝ^{2n} from an eigenvalue family on n complex dimensions.
    pub fn complex_lift(&self) -> Result<Self> {
        self.lift(Structure::Complex(ComplexStructure::standard(self.n)), "C", Invariance::Unitary)
    }

    /// F^ℍ on ℝ^{4n} from an eigenvalue family on n quaternionic dimensions.
    pub fn quaternionic_lift(&self) -> Result<Self> {
        self.lift(Structure::Quaternionic(QuaternionStructure::standard(self.n)), "H", Invariance::Symplectic)
    }

    fn lift(&self, s: Structure, tag: &str, inv: Invariance) -> Result<Self> {
        if !self.is_spectral() {
            return param(format!("{} is not defined by an eigenvalue constraint", self.name));
        }
        Ok(Self {
            name: format!("{}^{tag}", self.name),
            n: s.real_dim(),
            convex: self.convex,
            invariance: inv,
            family: Family::Lift { structure: Arc::new(s), base: Box::new(self.clone()) },
        })
    }

    /// F(δ) = {A : A + (δ/n)tr(A)Id ∈ F}.
    pub fn regularize(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return param(format!("regularization needs δ > 0, got {delta}"));
        }
        Ok(Self {
            name: format!("{}({delta})", self.name),
            n: self.n,
            convex: self.convex,
            invariance: self.invariance,
            family: Family::Regularized { base: Box::new(self.clone()), delta },
        })
    }

    pub fn geometric(sample: Arc<GrassmannSample>) -> Result<Self> {
        if sample.planes().is_empty() {
            return param("empty Grassmann sample");
        }
        Ok(Self {
            name: format!("F(G({},{}))", sample.p(), sample.n()),
            n: sample.n(),
            convex: true,
            invariance: Invariance::SampledSt,
            family: Family::Geometric(sample),
        })
    }

    fn combine(parts: Vec<Subequation>, union: bool) -> Result<Self> {
        let Some(first) = parts.first() else {
            return param("combinator needs at least one subequation");
        };
        let n = first.n;
        if parts.iter().any(|s| s.n != n) {
            return param("combined subequations must share the dimension");
        }
        let inv = parts.iter().skip(1).fold(first.invariance, |acc, s| acc.meet(s.invariance));
        let names: Vec<&str> = parts.iter().map(|s| s.name.as_str()).collect();
        let convex = !union && parts.iter().all(|s| s.convex);
        let (name, family) = if union {
            (format!("({})", names.join(" ∪ ")), Family::Union(parts))
        } else {
            (format!("({})", names.join(" ∩ ")), Family::Intersection(parts))
        };
        Ok(Self { name, n, convex, invariance: inv, family })
    }

    /// Margin min(m₁, m₂, …).
    pub fn intersection(parts: Vec<Subequation>) -> Result<Self> {
        Self::combine(parts, false)
    }

    /// Margin max(m₁, m₂, …).
    pub fn union(parts: Vec<Subequation>) -> Result<Self> {
        Self::combine(parts, true)
    }

    /// True when the margin is a function of the ordered spectrum alone.
    pub fn is_spectral(&self) -> bool {
        match &self.family {
            Family::Lift { .. } | Family::Geometric(_) => false,
            Family::Dual(b) | Family::Regularized { base: b, .. } => b.is_spectral(),
            Family::Intersection(v) | Family::Union(v) => v.iter().all(Subequation::is_spectral),
            _ => true,
        }
    }

    /// Margin of a matrix with ascending spectrum `l`. Only valid when
    /// [`Self::is_spectral`] holds.
    pub fn margin_from_eigs(&self, l: &[f64]) -> f64 {
        let n = l.len();
        match &self.family {
            Family::Positive => l[0],
            Family::PConvex { p } => fractional_prefix_sum(l, *p),
            Family::SigmaK { k } => {
                let e = elementary_symmetric_all(l, *k);
                e[1..].iter().copied().fold(f64::INFINITY, f64::min)
            }
            Family::PDelta { delta } => l[0] + delta / n as f64 * l.iter().sum::<f64>(),
            Family::MinMax { p } => l[0] + (p - 1.0) * l[n - 1],
            Family::Min2 { p } => l[0] + (p - 1.0) * l[1],
            Family::TracePower { k, q } => {
                let pw: Vec<f64> = l.iter().map(|&t| signed_pow(t, *q)).collect();
                fractional_prefix_sum(&pw, *k)
            }
            Family::Subaffine => l[n - 1],
            Family::LargestConvex { p } => l[0] + (p - 1.0) / (n as f64 - p) * l.iter().sum::<f64>(),
            Family::FullSpace => 1.0,
            Family::Garding { op, k } => op.eigenvalues(l)[k - 1],
            Family::Dual(base) => {
                let neg: Vec<f64> = l.iter().rev().map(|x| -x).collect();
                -base.margin_from_eigs(&neg)
            }
            Family::Regularized { base, delta } => {
                let shift = delta / n as f64 * l.iter().sum::<f64>();
                let shifted: Vec<f64> = l.iter().map(|x| x + shift).collect();
                base.margin_from_eigs(&shifted)
            }
            Family::Intersection(v) => v.iter().map(|s| s.margin_from_eigs(l)).fold(f64::INFINITY, f64::min),
            Family::Union(v) => v.iter().map(|s| s.margin_from_eigs(l)).fold(f64::NEG_INFINITY, f64::max),
            Family::Lift { .. } | Family::Geometric(_) => {
                panic!("margin_from_eigs called on a non-spectral subequation")
            }
        }
    }

    /// The margin m(A).
    pub fn margin(&self, a: &SymMatrix) -> f64 {
        assert_eq!(a.n(), self.n, "matrix dimension does not match subequation {}", self.name);
        match &self.family {
            Family::FullSpace => 1.0,
            Family::Lift { structure, base } => {
                let h = hermitian_part(a, structure).expect("dimension checked");
                base.margin_from_eigs(&block_means(&h.eigs(), structure.multiplicity()))
            }
            Family::Geometric(sample) => sample
                .planes()
                .iter()
                .map(|w| trace_over_subspace(a, w).expect("dimension checked"))
                .fold(f64::INFINITY, f64::min),
            Family::Dual(base) => -base.margin(&-a),
            Family::Regularized { base, delta } if !base.is_spectral() => {
                base.margin(&a.shift(delta / self.n as f64 * a.trace()))
            }
            Family::Intersection(v) if !self.is_spectral() => {
                v.iter().map(|s| s.margin(a)).fold(f64::INFINITY, f64::min)
            }
            Family::Union(v) if !self.is_spectral() => v.iter().map(|s| s.margin(a)).fold(f64::NEG_INFINITY, f64::max),
            _ => self.margin_from_eigs(&a.eigs()),
        }
    }

    pub fn is_member(&self, a: &SymMatrix) -> bool {
        self.margin(a) >= -member_tol(a)
    }

    pub fn on_boundary(&self, a: &SymMatrix) -> bool {
        self.margin(a).abs() <= boundary_tol(a)
    }

    /// δ with margin(A) = λ_min(A) + δ·tr(A), when the margin has that form.
    pub fn operator_form(&self) -> Option<f64> {
        match &self.family {
            Family::Positive => Some(0.0),
            Family::PDelta { delta } => Some(delta / self.n as f64),
            Family::LargestConvex { p } => Some((p - 1.0) / (self.n as f64 - p)),
            _ => None,
        }
    }

    /// The structure of a lifted subequation.
    pub fn structure(&self) -> Option<&Structure> {
        match &self.family {
            Family::Lift { structure, .. } => Some(structure),
            _ => None,
        }
    }

    /// The plane sample of a geometric subequation.
    pub fn grassmann_sample(&self) -> Option<&GrassmannSample> {
        match &self.family {
            Family::Geometric(s) => Some(s),
            _ => None,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return param("dimension must be at least 1");
    }
    Ok(())
}
