//! Experiment configuration: an optional JSON file overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::output::Format;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Sphere quadrature size.
    pub quad: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub no_timestamp: Option<bool>,
    /// Family or field parameters such as `p`, `k`, `delta`, `theta`.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub radii: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
}

/// Settings after merging file values, flags and defaults.
#[derive(Clone, Debug)]
pub struct Settings {
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub quad: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub timestamp: bool,
    pub params: BTreeMap<String, f64>,
    pub radii: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
}

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

impl Settings {
    /// Flags take precedence over the file.
    pub fn merge(file: ExperimentConfig, flags: ExperimentConfig) -> Result<Self, String> {
        let mut params = file.params;
        params.extend(flags.params);
        let s = Settings {
            n: flags.n.or(file.n).unwrap_or(DEFAULT_N),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            quad: flags.quad.or(file.quad),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format),
            timestamp: !(flags.no_timestamp.unwrap_or(false) || file.no_timestamp.unwrap_or(false)),
            params,
            radii: flags.radii.or(file.radii),
            center: flags.center.or(file.center),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if let Some(q) = self.quad {
            if q < 4 || q % 2 != 0 {
                return Err(format!("quad must be an even number ≥ 4, got {q}"));
            }
        }
        if let Some(r) = &self.radii {
            if r.len() < 3 || r.iter().any(|v| !(*v > 0.0)) || r.windows(2).any(|w| !(w[1] < w[0])) {
                return Err("radii must be at least three positive, strictly decreasing values".into());
            }
        }
        if let Some((k, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("parameter {k} must be finite, got {v}"));
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file =
            ExperimentConfig { n: Some(5), seed: Some(3), params: [("p".into(), 2.0)].into(), ..Default::default() };
        let flags = ExperimentConfig { n: Some(6), params: [("k".into(), 1.0)].into(), ..Default::default() };
        let s = Settings::merge(file, flags).unwrap();
        assert_eq!((s.n, s.seed), (6, 3));
        assert_eq!(s.param("p"), Some(2.0));
        assert_eq!(s.param("k"), Some(1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"n": 3, "bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"n": 3, "params": {"p": 2}}"#).is_ok());
    }

    #[test]
    fn bad_values_are_rejected() {
        let bad = ExperimentConfig { radii: Some(vec![0.5, 1.0, 0.25]), ..Default::default() };
        assert!(Settings::merge(bad, ExperimentConfig::default()).is_err());
        let bad = ExperimentConfig { quad: Some(7), ..Default::default() };
        assert!(Settings::merge(bad, ExperimentConfig::default()).is_err());
    }
}
