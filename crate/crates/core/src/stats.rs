//! Small statistical estimators used across the crate.

use alloc::vec::Vec;

/// Sample mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    libm::sqrt(variance(xs))
}

/// Unbiased variance of the elementwise difference of two equal-length
/// slices.
pub fn difference_variance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    variance(&diffs)
}

/// Pearson sample correlation coefficient.
///
/// Returns 0 when either side has zero variance (the coefficient is
/// undefined there and 0 is the conservative value for detection).
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() < 2 {
        return 0.0;
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / libm::sqrt(saa * sbb)
}

/// Unbiased variance over disjoint blocks of `block_len` samples.
///
/// Trailing samples that do not fill a block are dropped. This is the
/// block-averaged estimator for slow noise-level traces.
pub fn block_variances(xs: &[f64], block_len: usize) -> Vec<f64> {
    if block_len < 2 {
        return Vec::new();
    }
    xs.chunks_exact(block_len).map(variance).collect()
}

/// Standard normal CDF via `libm::erfc` (platform independent).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mean_and_variance_basics() {
        assert_eq!(mean(&[]), 0.0);
        assert_eq!(mean(&[2.0, 4.0]), 3.0);
        assert_eq!(variance(&[1.0]), 0.0);
        // Var of {1,2,3,4} = 5/3 (unbiased).
        assert!((variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_of_identical_is_one() {
        let xs = vec![0.3, -1.2, 2.5, 0.0, 1.1];
        assert!((correlation(&xs, &xs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_of_negated_is_minus_one() {
        let xs = vec![0.3, -1.2, 2.5, 0.7];
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((correlation(&xs, &ys) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_degenerate_is_zero() {
        let flat = vec![1.0; 5];
        let xs = vec![0.1, 0.4, -0.3, 0.9, 0.0];
        assert_eq!(correlation(&flat, &xs), 0.0);
    }

    #[test]
    fn block_variances_drops_remainder() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(block_variances(&xs, 4).len(), 2);
        assert!(block_variances(&xs, 1).is_empty());
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Phi(1) = 0.8413447460685429
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-1.0) + normal_cdf(1.0) - 1.0).abs() < 1e-12);
    }
}
