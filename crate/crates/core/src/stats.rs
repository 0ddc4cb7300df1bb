//! Population statistics with exact results on constant inputs.

/// Arithmetic mean; returns the common value exactly when all inputs agree.
pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty slice");
    if is_constant(values) {
        return values[0];
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (divide-by-N) standard deviation, two-pass.
pub fn population_std(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "std of empty slice");
    if is_constant(values) {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

pub fn min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Quantile by linear interpolation between order statistics at rank
/// `p * (n - 1)`; the median of an even count is the midpoint of the two
/// central values.
pub fn quantile_linear(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|v| *v == values[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_of_two_grades() {
        assert_eq!(population_std(&[0.2, 0.4]), 0.1);
        assert_eq!(population_std(&[100.0, 300.0]), 100.0);
        assert_eq!(mean(&[100.0, 300.0]), 200.0);
    }

    #[test]
    fn constant_inputs_are_exact() {
        let v = [0.1; 10];
        assert_eq!(mean(&v), 0.1);
        assert_eq!(population_std(&v), 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile_linear(&v, 0.5), 2.5);
        assert_eq!(quantile_linear(&v, 0.25), 1.75);
        assert_eq!(quantile_linear(&v, 0.75), 3.25);
        assert_eq!(quantile_linear(&v, 0.0), 1.0);
        assert_eq!(quantile_linear(&v, 1.0), 4.0);
        assert_eq!(quantile_linear(&[5.0], 0.3), 5.0);
    }
}
