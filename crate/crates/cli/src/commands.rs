//! Subcommand implementations. Each returns a [`Report`] holding the JSON
//! result, a CSV view and the overall pass flag.

use std::fmt;
use std::sync::Arc;

use rieszlab::flow::catalog::catalog_field;
use rieszlab::flow::{
    default_sphere_size, densities, mass_density, tangent_experiment, FlowSpec, GridSpec, Metric, QuadSpec, Quadrature,
    GL_NODES,
};
use rieszlab::radial::{
    check_limit_form, classify_profile, geometric_radii, kp_convexity_test, one_var_density,
    quotient_double_monotonicity, RadialProfile,
};
use rieszlab::riesz::{
    characteristic_pair, charx_residual, closed_form, default_direction, increasing_characteristic, reference_table,
    sandwich_check, Charx, KernelSpec,
};
use rieszlab::subeq::{
    check_cone, check_maximum_principle, check_positivity, check_st_invariance, check_uniform_ellipticity,
    default_plane_count, resolve, transitivity_check, GrassmannSample, Subequation, Transitivity,
};
use rieszlab::{Error, PropertyReport};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::output::{num, Report, Table};
use crate::Command;

/// Residual above which a computed characteristic disagrees with its closed form.
const CLOSED_FORM_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Compute(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Param(_) => CliError::Config(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Positivity,
    Cone,
    Invariance,
    Mp,
    Ue,
    Sandwich,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricArg {
    Sup,
    L1,
    Holder,
}

fn to_value<T: serde::Serialize>(v: &T) -> Res<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Compute(e.to_string()))
}

fn charx_str(c: Charx) -> String {
    match c {
        Charx::Finite(v) => format!("{v:.9}"),
        Charx::Infinite => "inf".into(),
    }
}

fn params_str(s: &Settings) -> String {
    s.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn quadrature(s: &Settings, n: usize) -> Res<Quadrature> {
    let spec = QuadSpec { sphere: s.quad.unwrap_or_else(|| default_sphere_size(n)), radial: GL_NODES, seed: s.seed };
    Ok(Quadrature::new(n, spec)?)
}

fn require(s: &Settings, key: &str) -> Res<f64> {
    s.param(key).ok_or_else(|| CliError::Config(format!("missing parameter --{key}")))
}

fn reports_table(reports: &[PropertyReport]) -> Table {
    let mut t = Table::new(&["property", "subject", "sample_count", "worst_violation", "tolerance", "pass"]);
    for r in reports {
        t.push(vec![
            r.property.clone(),
            r.subject.clone(),
            r.sample_count.to_string(),
            num(r.worst_violation),
            num(r.tolerance),
            r.pass.to_string(),
        ]);
    }
    t
}

pub fn dispatch(cmd: &Command, s: &Settings) -> Res<Report> {
    match cmd {
        Command::Charx { family, .. } => charx(family, s),
        Command::Verify { family, suite, count, .. } => verify(family, suite, *count, s),
        Command::Table => table(s),
        Command::Density { field, mass, .. } => density(field, *mass, s),
        Command::Flow { field, candidate, candidate_theta, metric, beta, from, to, threshold, .. } => {
            flow(field, candidate, *candidate_theta, *metric, *beta, (*from, *to), *threshold, s)
        }
        Command::Grassmann { sample, planes, transitivity, x, y, charx, angle_tol, contain_tol } => {
            let ends = transitivity.then(|| (x.clone(), y.clone()));
            grassmann(sample, *planes, ends, *charx, (*angle_tol, *contain_tol), s)
        }
        Command::Radial { profile, .. } => radial(profile, s),
    }
}

fn charx(words: &[String], s: &Settings) -> Res<Report> {
    let f = resolve(words, s.n, &s.params)?;
    let pair = characteristic_pair(&f, &default_direction(&f), s.tol)?;
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let cf = closed_form(&refs, s.n, &s.params);
    let residual = cf.map(|c| charx_residual(pair.p, c));
    let pass = residual.is_none_or(|r| r <= CLOSED_FORM_TOL);
    let result = json!({
        "family": words.join(" "),
        "subequation": f.name,
        "params": s.params,
        "n": f.n,
        "p": pair.p,
        "q": pair.q,
        "p_bracket": pair.p_bracket,
        "q_bracket": pair.q_bracket,
        "closed_form": cf,
        "residual": residual,
    });
    let mut t = Table::new(&["family", "params", "n", "p", "q", "p_bracket", "q_bracket", "closed_form", "residual"]);
    t.push(vec![
        words.join(" "),
        params_str(s),
        f.n.to_string(),
        charx_str(pair.p),
        charx_str(pair.q),
        num(pair.p_bracket),
        num(pair.q_bracket),
        cf.map(charx_str).unwrap_or_default(),
        residual.map(num).unwrap_or_default(),
    ]);
    Ok(Report { command: "charx", pass, result, table: t })
}

fn verify(words: &[String], suites: &[Suite], count: usize, s: &Settings) -> Res<Report> {
    let f = resolve(words, s.n, &s.params)?;
    let default = [Suite::Positivity, Suite::Cone, Suite::Invariance, Suite::Mp];
    let suites = if suites.is_empty() { &default[..] } else { suites };
    let mut reports = Vec::new();
    for suite in suites {
        reports.push(match suite {
            Suite::Positivity => check_positivity(&f, count, s.seed),
            Suite::Cone => check_cone(&f, count, s.seed),
            Suite::Invariance => check_st_invariance(&f, count, s.seed),
            Suite::Mp => check_maximum_principle(&f),
            Suite::Ue => check_uniform_ellipticity(&f, count, s.seed),
            Suite::Sandwich => {
                let p = increasing_characteristic(&f, &default_direction(&f), s.tol)?.value;
                let Charx::Finite(p) = p else {
                    return Err(CliError::Compute(format!("{} has p = ∞; the sandwich needs a finite p", f.name)));
                };
                sandwich_check(&f, p, count, s.seed)?
            }
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    let result = json!({ "family": words.join(" "), "subequation": f.name, "n": f.n, "reports": to_value(&reports)? });
    Ok(Report { command: "verify", pass, table: reports_table(&reports), result })
}

fn table(s: &Settings) -> Res<Report> {
    let rows = reference_table(s.tol)?;
    let pass = rows.iter().all(|r| r.residual <= CLOSED_FORM_TOL);
    let mut t = Table::new(&["family", "params", "n", "computed_p", "closed_form_p", "residual"]);
    for r in &rows {
        let ps = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        t.push(vec![
            r.family.clone(),
            ps,
            r.n.to_string(),
            charx_str(r.computed),
            charx_str(r.closed_form),
            num(r.residual),
        ]);
    }
    Ok(Report { command: "table", pass, result: json!({ "rows": to_value(&rows)? }), table: t })
}

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 2f64.powi(-j)).collect()
}

fn density(field: &str, mass: bool, s: &Settings) -> Res<Report> {
    let p = require(s, "p")?;
    let u = catalog_field(field, s.n, &s.params)?;
    let center = s.center.clone().unwrap_or_else(|| vec![0.0; s.n]);
    if center.len() != s.n {
        return Err(CliError::Config(format!("center has {} coordinates, expected {}", center.len(), s.n)));
    }
    let radii = s.radii.clone().unwrap_or_else(|| dyadic(1, 6));
    let q = quadrature(s, s.n)?;
    let rep = densities(u.as_ref(), &center, p, &radii, &q)?;
    let mut t = Table::new(&["kind", "theta", "bracket", "monotone"]);
    t.push(vec!["M".into(), num(rep.theta_m.theta), num(rep.theta_m.bracket), rep.theta_m.monotone.to_string()]);
    t.push(vec!["S".into(), num(rep.theta_s.theta), num(rep.theta_s.bracket), rep.theta_s.monotone.to_string()]);
    t.push(vec!["V".into(), num(rep.theta_v.theta), num(rep.theta_v.bracket), rep.theta_v.monotone.to_string()]);
    t.push(vec![
        "V_normalized".into(),
        num(rep.theta_v_normalized()),
        num(rep.theta_v_normalized_bracket()),
        rep.theta_v.monotone.to_string(),
    ]);
    let mut result = json!({ "density": to_value(&rep)?, "theta_v_normalized": rep.theta_v_normalized() });
    if mass {
        let m = mass_density(u.as_ref(), &center, p, &radii, &q)?;
        t.push(vec!["mass".into(), num(m.theta_mass), num(m.bracket), String::new()]);
        result["mass"] = to_value(&m)?;
    }
    let pass = rep.double_monotonicity.iter().all(|r| r.pass);
    Ok(Report { command: "density", pass, result, table: t })
}

#[allow(clippy::too_many_arguments)]
fn flow(
    field: &str,
    candidate: &str,
    candidate_theta: Option<f64>,
    metric: MetricArg,
    beta: Option<f64>,
    (from, to): (i32, i32),
    threshold: f64,
    s: &Settings,
) -> Res<Report> {
    let p = require(s, "p")?;
    if from > to {
        return Err(CliError::Config(format!("--from {from} exceeds --to {to}")));
    }
    let u = catalog_field(field, s.n, &s.params)?;
    let mut cparams = s.params.clone();
    if let Some(t) = candidate_theta {
        cparams.insert("theta".into(), t);
    }
    let cand = catalog_field(candidate, s.n, &cparams)?;
    let metric = match metric {
        MetricArg::Sup => Metric::SupOnAnnulus,
        MetricArg::L1 => Metric::DiscreteL1,
        MetricArg::Holder => Metric::Holder(beta.unwrap_or((2.0 - p) / 2.0)),
    };
    let spec = FlowSpec::new(p, dyadic(from, to), GridSpec::default_for(p))?;
    let q = quadrature(s, s.n)?;
    let rec = tangent_experiment(&u, &spec, cand.as_ref(), metric, threshold, &q, s.seed)?;
    let mut t = Table::new(&["radius", "distance"]);
    for (r, d) in rec.radii.iter().zip(&rec.distances) {
        t.push(vec![num(*r), num(*d)]);
    }
    let pass = rec.converged && rec.holder_bound.as_ref().is_none_or(|b| b.pass);
    Ok(Report { command: "flow", pass, result: to_value(&rec)?, table: t })
}

fn parse_sample(spec: &str) -> Res<(usize, usize)> {
    let bad = || CliError::Config(format!("sample spec must look like g<p>r<n>, got '{spec}'"));
    let rest = spec.strip_prefix('g').ok_or_else(bad)?;
    let (p, n) = rest.split_once('r').ok_or_else(bad)?;
    let (p, n): (usize, usize) = (p.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?);
    if p == 0 || p > n {
        return Err(CliError::Config(format!("need 1 ≤ p ≤ n in '{spec}'")));
    }
    Ok((p, n))
}

fn check_len(v: Vec<f64>, n: usize) -> Res<Vec<f64>> {
    if v.len() != n {
        return Err(CliError::Config(format!("endpoint has {} coordinates, expected {n}", v.len())));
    }
    Ok(v)
}

/// Optional start and end vectors of a transitivity search.
type Endpoints = (Option<Vec<f64>>, Option<Vec<f64>>);

fn grassmann(
    spec: &str,
    planes: Option<usize>,
    transitivity: Option<Endpoints>,
    charx: bool,
    (angle_tol, contain_tol): (f64, f64),
    s: &Settings,
) -> Res<Report> {
    let (p, n) = parse_sample(spec)?;
    let count = planes.unwrap_or_else(|| default_plane_count(n));
    let sample = GrassmannSample::random(n, p, count, s.seed)?.with_tolerances(angle_tol, contain_tol);
    let mut result = json!({ "n": n, "p": p, "planes": count, "angle_tol": angle_tol, "contain_tol": contain_tol });
    let mut t = Table::new(&["key", "value"]);
    let mut pass = true;
    if let Some((x, y)) = transitivity {
        let e = |i: usize| (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let x = check_len(x.unwrap_or_else(|| e(0)), n)?;
        let y = check_len(y.unwrap_or_else(|| e(n - 1)), n)?;
        let tr = transitivity_check(&sample, &x, &y);
        match &tr {
            Transitivity::Chain(c) => {
                t.push(vec!["chain".into(), c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")])
            }
            Transitivity::Failure(m) => {
                pass = false;
                t.push(vec!["failure".into(), m.clone()]);
            }
        }
        result["transitivity"] = to_value(&tr)?;
    }
    if charx {
        let f = Subequation::geometric(Arc::new(sample))?;
        let v = increasing_characteristic(&f, &default_direction(&f), s.tol)?;
        let residual = charx_residual(v.value, Charx::Finite(p as f64));
        pass &= residual <= CLOSED_FORM_TOL;
        t.push(vec!["p".into(), charx_str(v.value)]);
        t.push(vec!["expected_p".into(), p.to_string()]);
        result["charx"] = json!({ "p": v.value, "bracket": v.bracket, "expected": p, "residual": residual });
    }
    Ok(Report { command: "grassmann", pass, result, table: t })
}

fn radial(name: &str, s: &Settings) -> Res<Report> {
    let p = require(s, "p")?;
    let k = KernelSpec::standard(p)?;
    let c = s.param("c").unwrap_or(0.0);
    let (psi, psi0) = match name {
        "kernel" => (RadialProfile::kernel(k, s.param("theta").unwrap_or(1.0)), 0.0),
        "kernel-plus-square" => (RadialProfile::kernel_plus_square(k), 0.0),
        "kernel-max-const" => (RadialProfile::kernel_max_const(k, c), c.max(0.0)),
        "constant" => (RadialProfile::constant(c), c),
        other => {
            return Err(CliError::Config(format!(
                "unknown profile '{other}' (known: kernel, kernel-plus-square, kernel-max-const, constant)"
            )))
        }
    };
    let grid: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
    let radii = s.radii.clone().unwrap_or_else(|| geometric_radii(1.0, 0.5, 1000));
    let class = classify_profile(&psi, &grid);
    let dens = one_var_density(&psi, &k, &radii)?;
    let convex = kp_convexity_test(&psi, &k, &grid)?;
    let mono = quotient_double_monotonicity(&psi, &k, &grid)?;
    let limit = check_limit_form(&psi, &k, (p < 2.0).then_some(psi0), &radii, 1e-3)?;
    let pass = convex.pass && mono.pass && limit.pass;
    let class_value = match &class {
        Ok(c) => to_value(c)?,
        Err(e) => json!({ "kind": "NotSubaffine", "reason": e.to_string() }),
    };
    let result = json!({
        "profile": psi.name,
        "p": p,
        "class": class_value,
        "density": to_value(&dens)?,
        "reports": to_value(&[&convex, &mono, &limit])?,
    });
    let mut t = reports_table(&[convex, mono, limit]);
    t.push(vec![
        "density".into(),
        psi.name.clone(),
        radii.len().to_string(),
        num(dens.theta),
        num(dens.bracket),
        String::new(),
    ]);
    Ok(Report { command: "radial", pass, result, table: t })
}
