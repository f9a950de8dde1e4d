use super::matrix::{norm, SymMatrix};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Default central-difference step h = 1e−4·(1+|x|).
pub fn default_step(x: &[f64]) -> f64 {
    1e-4 * (1.0 + norm(x))
}

/// Second-order central-difference Hessian of `field` at `x`.
pub fn finite_diff_hessian(field: &dyn ScalarField, x: &[f64], h: Option<f64>) -> Result<SymMatrix> {
    let n = field.dim();
    if x.len() != n {
        return Err(Error::Domain("point dimension does not match the field".into()));
    }
    let h = h.unwrap_or_else(|| default_step(x));
    if !(h > 0.0) {
        return Err(Error::Param("finite-difference step must be positive".into()));
    }
    let reach = 2.0 * h;
    for s in field.singular_set() {
        let d: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a - b).collect();
        if norm(&d) <= reach {
            return Err(Error::Domain("finite-difference stencil touches the singular set".into()));
        }
    }
    let eval = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, d) in dx {
            y[i] += d;
        }
        let v = field.eval(&y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain("field is not finite on the stencil".into()))
        }
    };
    let u0 = eval(&[])?;
    let h2 = h * h;
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let d = (eval(&[(i, h)])? - 2.0 * u0 + eval(&[(i, -h)])?) / h2;
        m[i * n + i] = d;
        for j in (i + 1)..n {
            let v = (eval(&[(i, h), (j, h)])? - eval(&[(i, h), (j, -h)])? - eval(&[(i, -h), (j, h)])?
                + eval(&[(i, -h), (j, -h)])?)
                / (4.0 * h2);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    SymMatrix::new(n, m)
}
