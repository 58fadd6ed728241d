//! Small numeric helpers shared by the density and classifier code.

/// `ln Σ exp(v)`, shifted by the maximum. Returns `-inf` for an empty slice or
/// when every term is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Turns log weights into a probability vector. Falls back to uniform when
/// the normalizer is not finite.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let n = log_weights.len() as f64;
        return vec![1.0 / n; log_weights.len()];
    }
    // Shift by the max before exponentiating: at very large magnitudes,
    // subtracting a log normalizer would lose the small differences.
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy_nats(probs: &[f64]) -> f64 {
    // 0 - x rather than -x so a point mass gives +0, not -0
    0.0 - probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation; zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let v = [0.1, -2.0, 3.5];
        let direct = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_survives_large_magnitudes() {
        let v = [-1000.0, -1000.0];
        assert!((log_sum_exp(&v) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    }

    #[test]
    fn normalize_falls_back_to_uniform() {
        let p = normalize_log_weights(&[f64::NEG_INFINITY; 4]);
        assert_eq!(p, vec![0.25; 4]);
    }

    #[test]
    fn entropy_of_half_quarter_quarter() {
        // 0.5 ln 2 + 2 * 0.25 ln 4 = 1.5 ln 2
        let h = entropy_nats(&[0.5, 0.25, 0.25]);
        assert!((h - 1.5 * 2f64.ln()).abs() < 1e-12);
        assert!((h - 1.03972).abs() < 1e-5);
        assert_eq!(entropy_nats(&[1.0, 0.0]), 0.0);
    }
}
