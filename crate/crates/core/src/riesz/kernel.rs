use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization of the Riesz kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// t^{2−p} (p<2), log t (p=2), −t^{2−p} (p>2).
    #[default]
    Standard,
    /// Standard divided by |p−2|, so that K′(t) = t^{1−p}.
    Barred,
}

/// The increasing radial kernel K_p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub p: f64,
    pub normalization: Normalization,
}

impl KernelSpec {
    pub fn new(p: f64, normalization: Normalization) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Param(format!("kernel needs 1 ≤ p < ∞, got {p}")));
        }
        Ok(Self { p, normalization })
    }

    pub fn standard(p: f64) -> Result<Self> {
        Self::new(p, Normalization::Standard)
    }

    pub fn barred(p: f64) -> Result<Self> {
        Self::new(p, Normalization::Barred)
    }

    pub fn is_log(&self) -> bool {
        self.p == 2.0
    }

    /// Multiplier c with K = c·t^{2−p} for p ≠ 2.
    fn coeff(&self) -> f64 {
        let d = 2.0 - self.p;
        match self.normalization {
            Normalization::Standard => d.signum(),
            Normalization::Barred => 1.0 / d,
        }
    }

    fn check_t(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("kernel argument must be positive, got {t}")))
        }
    }

    /// K(t) for t > 0.
    pub fn value(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        Ok(self.eval(t))
    }

    /// K(t) without argument validation; t ≤ 0 gives −∞ for p ≥ 2 and 0 otherwise.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return if self.p >= 2.0 { f64::NEG_INFINITY } else { 0.0 };
        }
        if self.is_log() {
            t.ln()
        } else {
            self.coeff() * t.powf(2.0 - self.p)
        }
    }

    /// K′(t).
    pub fn deriv1(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        Ok(if self.is_log() { 1.0 / t } else { self.coeff() * (2.0 - self.p) * t.powf(1.0 - self.p) })
    }

    /// K″(t).
    pub fn deriv2(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        Ok(if self.is_log() {
            -1.0 / (t * t)
        } else {
            self.coeff() * (2.0 - self.p) * (1.0 - self.p) * t.powf(-self.p)
        })
    }

    /// Open range of K on (0, ∞) as (lower, upper).
    pub fn range(&self) -> (f64, f64) {
        if self.is_log() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.p < 2.0 {
            (0.0, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, 0.0)
        }
    }

    /// K⁻¹(s).
    pub fn inverse(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(s > lo && s < hi) {
            return Err(Error::Domain(format!("{s} is outside the kernel range ({lo}, {hi})")));
        }
        Ok(if self.is_log() { s.exp() } else { (s / self.coeff()).powf(1.0 / (2.0 - self.p)) })
    }

    /// Kernel for a characteristic; p = ∞ has no kernel and no density.
    pub fn for_charx(p: super::Charx, normalization: Normalization) -> Result<Self> {
        match p {
            super::Charx::Finite(v) => Self::new(v, normalization),
            super::Charx::Infinite => Err(Error::Domain("no Riesz kernel or density for p = ∞".into())),
        }
    }

    /// The same kernel in standard normalization.
    pub fn to_standard(&self) -> KernelSpec {
        KernelSpec { p: self.p, normalization: Normalization::Standard }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let k2 = KernelSpec::standard(2.0).unwrap();
        assert!((k2.value(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        let k3 = KernelSpec::standard(3.0).unwrap();
        assert_eq!(k3.value(2.0).unwrap(), -0.5);
        let k15 = KernelSpec::standard(1.5).unwrap();
        assert!((k15.value(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(k3.value(0.0).is_err());
        assert!(KernelSpec::standard(0.5).is_err());
    }

    #[test]
    fn barred_derivative_is_power() {
        for p in [1.0, 1.3, 2.0, 3.0, 5.5] {
            let k = KernelSpec::barred(p).unwrap();
            for t in [0.1, 1.0, 3.7] {
                let d = k.deriv1(t).unwrap();
                assert!((d - t.powf(1.0 - p)).abs() <= 1e-14 * d.abs());
            }
        }
    }

    #[test]
    fn inverse_round_trip_and_range() {
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            for norm in [Normalization::Standard, Normalization::Barred] {
                let k = KernelSpec::new(p, norm).unwrap();
                for j in -20..=20 {
                    let t = 2f64.powf(j as f64 * 0.5);
                    let back = k.inverse(k.value(t).unwrap()).unwrap();
                    assert!((back - t).abs() <= 1e-12 * t, "p={p} t={t} back={back}");
                }
            }
        }
        assert!(KernelSpec::standard(3.0).unwrap().inverse(1.0).is_err());
        assert!(KernelSpec::standard(1.5).unwrap().inverse(-1.0).is_err());
    }
}
