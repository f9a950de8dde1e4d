//! Subequations addressed by name and a parameter map.

use std::collections::BTreeMap;

use super::family::{GardingOperator, Subequation};
use crate::error::{param, Result};

pub type Params = BTreeMap<String, f64>;

/// Base family names understood by [`build`].
pub const FAMILY_NAMES: &[&str] = &[
    "p",
    "p-convex",
    "laplacian",
    "sigma-k",
    "pdelta",
    "minmax",
    "min2",
    "dual-minmax",
    "dual-min2",
    "trace-power",
    "subaffine",
    "largest-convex",
    "full-space",
    "garding-det",
    "garding-pfold",
    "garding-pdelta",
];

/// Prefix words applied right to left: `complex sigma-k` lifts Σ_k.
pub const MODIFIERS: &[&str] = &["complex", "quaternionic", "dual", "regularized"];

fn get(params: &Params, key: &str) -> Result<f64> {
    match params.get(key) {
        Some(v) => Ok(*v),
        None => param(format!("missing parameter '{key}'")),
    }
}

fn get_usize(params: &Params, key: &str) -> Result<usize> {
    let v = get(params, key)?;
    if v < 0.0 || v.fract() != 0.0 {
        return param(format!("parameter '{key}' must be a non-negative integer, got {v}"));
    }
    Ok(v as usize)
}

/// A built-in family on ℝⁿ.
pub fn builtin(name: &str, n: usize, params: &Params) -> Result<Subequation> {
    match name {
        "p" | "monge-ampere" => Subequation::positive(n),
        "p-convex" => Subequation::p_convex(n, get(params, "p")?),
        "laplacian" => Subequation::laplacian(n),
        "sigma-k" => Subequation::sigma_k(n, get_usize(params, "k")?),
        "pdelta" => Subequation::p_delta(n, get(params, "delta")?),
        "minmax" => Subequation::min_max(n, get(params, "p")?),
        "min2" => Subequation::min2(n, get(params, "p")?),
        "dual-minmax" => Ok(Subequation::min_max(n, get(params, "p")?)?.dual()),
        "dual-min2" => Ok(Subequation::min2(n, get(params, "p")?)?.dual()),
        "trace-power" => Subequation::trace_power(n, get(params, "k")?, get(params, "q")?),
        "subaffine" => Subequation::subaffine(n),
        "largest-convex" => Subequation::largest_convex(n, get(params, "p")?),
        "full-space" => Subequation::full_space(n),
        "garding-det" => Subequation::garding(n, GardingOperator::Det, get_usize(params, "k")?),
        "garding-pfold" => {
            Subequation::garding(n, GardingOperator::PFoldSum(get_usize(params, "p")?), get_usize(params, "k")?)
        }
        "garding-pdelta" => {
            Subequation::garding(n, GardingOperator::PDelta(get(params, "delta")?), get_usize(params, "k")?)
        }
        other => param(format!("unknown family '{other}' (known: {})", FAMILY_NAMES.join(", "))),
    }
}

/// Resolves a family phrase such as `["complex", "p-convex"]`. For lifts,
/// `n` is the complex or quaternionic dimension. `regularized` reads the
/// parameter `reg_delta`.
pub fn resolve<S: AsRef<str>>(words: &[S], n: usize, params: &Params) -> Result<Subequation> {
    let Some((head, rest)) = words.split_first() else {
        return param("empty family name");
    };
    let head = head.as_ref();
    if rest.is_empty() {
        return builtin(head, n, params);
    }
    let inner = resolve(rest, n, params)?;
    match head {
        "complex" => inner.complex_lift(),
        "quaternionic" => inner.quaternionic_lift(),
        "dual" => Ok(inner.dual()),
        "regularized" => inner.regularize(get(params, "reg_delta")?),
        other => param(format!("unknown modifier '{other}' (known: {})", MODIFIERS.join(", "))),
    }
}

pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
