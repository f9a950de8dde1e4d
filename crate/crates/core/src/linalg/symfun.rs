use crate::error::{Error, Result};

/// σ_k(λ₁,…,λₙ) by the product recurrence.
pub fn elementary_symmetric(lams: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > lams.len() {
        return Err(Error::Param(format!("k={k} outside 1..={}", lams.len())));
    }
    Ok(elementary_symmetric_all(lams, k)[k])
}

/// (σ_0, σ_1, …, σ_k).
pub fn elementary_symmetric_all(lams: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &l in lams {
        for j in (1..=k).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(elementary_symmetric(&[-2.0, 1.0, 1.0, 1.0], 2).unwrap(), -3.0);
        assert_eq!(elementary_symmetric(&[-2.0, 1.0, 1.0, 1.0], 1).unwrap(), 1.0);
        assert!(elementary_symmetric(&[1.0], 2).is_err());
        assert!(elementary_symmetric(&[1.0], 0).is_err());
    }

    #[test]
    fn matches_subset_enumeration() {
        let l = [0.5, -1.25, 2.0, 3.5, -0.75];
        for k in 1..=5 {
            let mut brute = 0.0;
            for mask in 0u32..(1 << 5) {
                if mask.count_ones() as usize == k {
                    brute += (0..5).filter(|i| mask & (1 << i) != 0).map(|i| l[i]).product::<f64>();
                }
            }
            assert!((elementary_symmetric(&l, k).unwrap() - brute).abs() < 1e-12);
        }
    }
}
