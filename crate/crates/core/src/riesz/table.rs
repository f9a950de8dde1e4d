//! Known closed forms of Riesz characteristics and the reference table.

use serde::{Deserialize, Serialize};

use super::characteristic::{default_direction, increasing_characteristic, Charx};
use crate::error::Result;
use crate::subeq::registry::{params, resolve, Params};

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form characteristic of a family phrase, with the real dimension
/// it acts on; None when no closed form is known.
fn closed_form_inner(words: &[&str], n: usize, ps: &Params) -> Option<(Charx, f64)> {
    let (head, rest) = words.split_first()?;
    let get = |k: &str| ps.get(k).copied();
    let nf = n as f64;
    if !rest.is_empty() {
        let (inner, real_n) = closed_form_inner(rest, n, ps)?;
        let scale = |c: Charx, s: f64| match c {
            Charx::Finite(p) => Charx::Finite(s * p),
            Charx::Infinite => Charx::Infinite,
        };
        return match *head {
            "complex" => Some((scale(inner, 2.0), 2.0 * real_n)),
            "quaternionic" => Some((scale(inner, 4.0), 4.0 * real_n)),
            "regularized" => {
                let d = get("reg_delta")?;
                let p = match inner {
                    Charx::Finite(p) => p * real_n * (1.0 + d) / (real_n + d * p),
                    Charx::Infinite => real_n * (1.0 + d) / d,
                };
                Some((Charx::Finite(p), real_n))
            }
            _ => None,
        };
    }
    let c = match *head {
        "p" | "monge-ampere" => Charx::Finite(1.0),
        "p-convex" | "minmax" | "min2" | "largest-convex" => Charx::Finite(get("p")?),
        "laplacian" => Charx::Finite(nf),
        "sigma-k" => Charx::Finite(nf / get("k")?),
        "pdelta" => {
            let d = get("delta")?;
            Charx::Finite(nf * (1.0 + d) / (nf + d))
        }
        "trace-power" => Charx::Finite(1.0 + (get("k")? - 1.0).powf(1.0 / get("q")?)),
        "subaffine" => Charx::Infinite,
        "garding-det" => {
            if get("k")? == 1.0 {
                Charx::Finite(1.0)
            } else {
                Charx::Infinite
            }
        }
        "garding-pfold" => {
            let p = get("p")?;
            if get("k")? as usize <= binomial(n - 1, p as usize - 1) {
                Charx::Finite(p)
            } else {
                Charx::Infinite
            }
        }
        "garding-pdelta" => {
            let d = get("delta")?;
            if get("k")? == 1.0 {
                Charx::Finite(nf * (1.0 + d) / (nf + d))
            } else {
                Charx::Finite(nf * (1.0 + 1.0 / d))
            }
        }
        _ => return None,
    };
    Some((c, nf))
}

/// Closed-form increasing characteristic of `words` (as accepted by
/// [`resolve`]), when one is known.
pub fn closed_form(words: &[&str], n: usize, ps: &Params) -> Option<Charx> {
    closed_form_inner(words, n, ps).map(|c| c.0)
}

/// |computed − closed form|; 0 when both are infinite, ∞ when only one is.
pub fn charx_residual(a: Charx, b: Charx) -> f64 {
    match (a, b) {
        (Charx::Finite(x), Charx::Finite(y)) => (x - y).abs(),
        (Charx::Infinite, Charx::Infinite) => 0.0,
        _ => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub family: String,
    pub params: Params,
    pub n: usize,
    pub computed: Charx,
    pub closed_form: Charx,
    pub residual: f64,
}

/// Family phrases, dimensions and parameters of the reference table.
pub fn table_specs() -> Vec<(Vec<&'static str>, usize, Params)> {
    let mut rows: Vec<(Vec<&'static str>, usize, Params)> = Vec::new();
    for (n, k) in [(4, 2.0), (6, 3.0), (5, 1.0)] {
        rows.push((vec!["sigma-k"], n, params(&[("k", k)])));
    }
    for p in [1.0, 2.5, 5.0] {
        rows.push((vec!["p-convex"], 5, params(&[("p", p)])));
    }
    for d in [0.5, 1.0, 3.0] {
        rows.push((vec!["pdelta"], 4, params(&[("delta", d)])));
    }
    rows.push((vec!["trace-power"], 4, params(&[("k", 4.0), ("q", 3.0)])));
    rows.push((vec!["trace-power"], 4, params(&[("k", 3.0), ("q", 5.0)])));
    rows.push((vec!["regularized", "p-convex"], 5, params(&[("p", 2.5), ("reg_delta", 1.0)])));
    rows.push((vec!["complex", "p-convex"], 3, params(&[("p", 1.0)])));
    rows.push((vec!["complex", "sigma-k"], 3, params(&[("k", 1.0)])));
    rows.push((vec!["quaternionic", "p"], 2, Params::new()));
    rows.push((vec!["minmax"], 4, params(&[("p", 3.0)])));
    rows.push((vec!["min2"], 4, params(&[("p", 2.5)])));
    rows.push((vec!["largest-convex"], 4, params(&[("p", 2.0)])));
    rows.push((vec!["laplacian"], 4, Params::new()));
    rows
}

/// Computes every row of [`table_specs`].
pub fn reference_table(tol: f64) -> Result<Vec<TableRow>> {
    table_specs()
        .into_iter()
        .map(|(words, n, ps)| {
            let f = resolve(&words, n, &ps)?;
            let computed = increasing_characteristic(&f, &default_direction(&f), tol)?.value;
            let cf = closed_form(&words, n, &ps).expect("table rows have closed forms");
            Ok(TableRow {
                family: words.join(" "),
                n,
                residual: charx_residual(computed, cf),
                params: ps,
                computed,
                closed_form: cf,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_closed_forms() {
        let rows = reference_table(1e-10).unwrap();
        assert!(rows.len() >= 12);
        for r in rows {
            assert!(r.residual < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn closed_forms_compose() {
        let ps = params(&[("p", 1.0), ("reg_delta", 1.0)]);
        assert_eq!(closed_form(&["quaternionic", "p-convex"], 2, &ps), Some(Charx::Finite(4.0)));
        assert_eq!(closed_form(&["dual", "p"], 2, &ps), None);
        assert_eq!(closed_form(&["subaffine"], 3, &ps), Some(Charx::Infinite));
        assert_eq!(charx_residual(Charx::Infinite, Charx::Finite(2.0)), f64::INFINITY);
    }
}
