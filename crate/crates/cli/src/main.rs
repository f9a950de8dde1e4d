//! `rieszlab`: characteristics, verification suites, densities and flows
//! from the command line.
//!
//! Exit codes: 0 all checks pass, 2 a check failed, 3 solver or domain
//! error, 4 configuration error.

// Negated comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Settings};
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "rieszlab", version, about = "Riesz characteristics, kernels, flows and densities")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Ambient dimension (complex or quaternionic dimension for lifts).
    #[arg(long = "n", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Bisection tolerance for characteristics.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of sphere quadrature points.
    #[arg(long, global = true)]
    quad: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Omit the timestamp so identical runs give identical output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// JSON file with the same settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Family and field parameters.
#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// δ of the `regularized` modifier.
    #[arg(long)]
    reg_delta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Distance of the second point from the origin along e₁.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    mass0: Option<f64>,
    #[arg(long)]
    mass1: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Extra parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    extra: Vec<String>,
}

impl ParamArgs {
    fn to_map(&self) -> Result<BTreeMap<String, f64>, String> {
        let mut out = BTreeMap::new();
        for kv in &self.extra {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{kv}'"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("parameter {k}: '{v}' is not a number"))?;
            out.insert(k.trim().to_string(), v);
        }
        let named = [
            ("p", self.p),
            ("k", self.k),
            ("q", self.q),
            ("delta", self.delta),
            ("reg_delta", self.reg_delta),
            ("theta", self.theta),
            ("m", self.m),
            ("a", self.a),
            ("mass0", self.mass0),
            ("mass1", self.mass1),
            ("c", self.c),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.insert(k.to_string(), v);
            }
        }
        Ok(out)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Increasing and decreasing characteristics of a family.
    #[command(allow_negative_numbers = true)]
    Charx {
        /// Family phrase, e.g. `sigma-k` or `complex p-convex`.
        #[arg(required = true)]
        family: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Structural checks on a family.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(required = true)]
        family: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
        /// Suites to run; defaults to positivity, cone, invariance and mp.
        #[arg(long, value_enum, value_delimiter = ',')]
        suite: Vec<commands::Suite>,
        /// Samples per suite.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Reference table of computed versus closed-form characteristics.
    Table,
    /// Θ^M, Θ^S, Θ^V of a catalog field.
    #[command(allow_negative_numbers = true)]
    Density {
        field: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated center point; defaults to the origin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        /// Comma-separated, strictly decreasing radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Also estimate the mass density of Δu.
        #[arg(long)]
        mass: bool,
    },
    /// Tangential flow of a field compared with a candidate tangent.
    #[command(allow_negative_numbers = true)]
    Flow {
        field: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Candidate catalog field.
        #[arg(long, default_value = "riesz")]
        candidate: String,
        /// Θ of the candidate; defaults to `theta` or 1.
        #[arg(long)]
        candidate_theta: Option<f64>,
        #[arg(long, value_enum, default_value_t = commands::MetricArg::Sup)]
        metric: commands::MetricArg,
        /// Hölder exponent for `--metric holder`; defaults to (2−p)/2.
        #[arg(long)]
        beta: Option<f64>,
        /// Schedule r_j = 2^{−j} for j in from..=to.
        #[arg(long, default_value_t = 1)]
        from: i32,
        #[arg(long, default_value_t = 10)]
        to: i32,
        /// Convergence threshold on the deepest distance.
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
    },
    /// Sampled Grassmannians: transitivity chains and characteristics.
    #[command(allow_negative_numbers = true)]
    Grassmann {
        /// Sample spec `g<p>r<n>`, e.g. `g2r3` for 2-planes in ℝ³.
        sample: String,
        /// Number of planes; defaults to 512 for n ≤ 4 and 2048 above.
        #[arg(long)]
        planes: Option<usize>,
        /// Search a chain of intersecting planes from x to y.
        #[arg(long)]
        transitivity: bool,
        /// Start vector for `--transitivity`, comma-separated; defaults to e₁.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// End vector for `--transitivity`; defaults to e_n.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        /// Characteristic of the geometric subequation.
        #[arg(long)]
        charx: bool,
        #[arg(long, default_value_t = 1e-3)]
        angle_tol: f64,
        #[arg(long, default_value_t = 0.05)]
        contain_tol: f64,
    },
    /// Classification, K_p-convexity and one-variable density of a profile.
    #[command(allow_negative_numbers = true)]
    Radial {
        /// One of kernel, kernel-plus-square, kernel-max-const, constant.
        profile: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
}

impl Command {
    fn flag_config(&self, g: &GlobalArgs) -> Result<ExperimentConfig, String> {
        let (params, radii, center) = match self {
            Command::Charx { params, .. } | Command::Verify { params, .. } | Command::Flow { params, .. } => {
                (params.to_map()?, None, None)
            }
            Command::Density { params, radii, center, .. } => (params.to_map()?, radii.clone(), center.clone()),
            Command::Radial { params, radii, .. } => (params.to_map()?, radii.clone(), None),
            Command::Table | Command::Grassmann { .. } => (BTreeMap::new(), None, None),
        };
        Ok(ExperimentConfig {
            n: g.n,
            seed: g.seed,
            tol: g.tol,
            quad: g.quad,
            out: g.out.clone(),
            format: g.format,
            no_timestamp: g.no_timestamp.then_some(true),
            params,
            radii,
            center,
        })
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("RIESZLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("RIESZLAB_THREADS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("RIESZLAB_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, commands::CliError> {
    use commands::CliError::Config;
    init_threads().map_err(Config)?;
    let file = match &cli.global.config {
        Some(path) => config::load(path).map_err(Config)?,
        None => ExperimentConfig::default(),
    };
    let flags = cli.command.flag_config(&cli.global).map_err(Config)?;
    let settings = Settings::merge(file, flags).map_err(Config)?;
    let report = commands::dispatch(&cli.command, &settings)?;
    let default_format = if matches!(cli.command, Command::Table) { Format::Csv } else { Format::Json };
    let text = output::render(&report, settings.format.unwrap_or(default_format), settings.seed, settings.timestamp)
        .map_err(Config)?;
    output::emit(&text, settings.out.as_deref()).map_err(Config)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("rieszlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
