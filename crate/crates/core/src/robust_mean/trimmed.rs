use crate::error::{invalid, DroError, Result};

/// Mean of `values` after dropping the `⌈2εN⌉` smallest and largest entries.
pub fn trimmed_mean_1d(values: &[f64], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(invalid(format!("epsilon must lie in (0, 1/4), got {epsilon}")));
    }
    let n = values.len();
    let trim = (2.0 * epsilon * n as f64 - 1e-9).ceil().max(0.0) as usize;
    if n == 0 || 2 * trim >= n {
        return Err(DroError::TrimmedAway { n, trim });
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid("trimmed mean of NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[trim..n - trim];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_both_tails() {
        let mut v: Vec<f64> = (1..=20).map(f64::from).collect();
        v[0] = -1e9;
        v[19] = 1e9;
        // trim = ⌈2·0.1·20⌉ = 4 per side
        let m = trimmed_mean_1d(&v, 0.1).unwrap();
        assert!((m - 10.5).abs() < 1e-12);
    }

    #[test]
    fn everything_trimmed() {
        assert!(matches!(trimmed_mean_1d(&[1.0, 2.0], 0.2), Err(DroError::TrimmedAway { .. })));
        assert!(trimmed_mean_1d(&[], 0.1).is_err());
    }
}
