//! Central finite-difference checking of analytic gradients.
//!
//! Verification utility used by the test suites: it evaluates a scalar
//! loss twice per coordinate and never looks at the analytic backward
//! path it is checking.

/// Step size used throughout the gradient suites.
pub const FD_STEP: f64 = 1e-5;

/// Relative error with a small floor so that near-zero pairs compare by
/// absolute difference: |a-b| / max(|a|, |b|, 1e-3).
pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Central finite difference of `loss` w.r.t. every coordinate of `x`.
pub fn finite_difference(x: &[f64], mut loss: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + FD_STEP;
        let up = loss(&probe);
        probe[i] = orig - FD_STEP;
        let down = loss(&probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * FD_STEP);
    }
    grad
}

/// Maximum relative error between an analytic gradient and the central
/// finite difference of `loss`.
pub fn max_rel_error(x: &[f64], analytic: &[f64], loss: impl FnMut(&[f64]) -> f64) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let numeric = finite_difference(x, loss);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| rel_error(a, n))
        .fold(0.0, f64::max)
}

/// A deterministic scalar loss over a buffer: a fixed pseudo-random
/// weighting of the entries, so gradients in every direction are probed.
pub fn weighted_sum(values: &[f64], salt: u64) -> f64 {
    let mut state = salt.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut acc = 0.0;
    for &v in values {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        // Map the top bits to a weight in [-1, 1).
        let w = ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0;
        acc += w * v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_of_quadratic() {
        // f(x) = sum x_i^2 has gradient 2x.
        let x = vec![1.0, -2.0, 0.5];
        let g = finite_difference(&x, |v| v.iter().map(|a| a * a).sum());
        for (gi, xi) in g.iter().zip(&x) {
            assert!(rel_error(*gi, 2.0 * xi) < 1e-8);
        }
    }

    #[test]
    fn weighted_sum_is_deterministic_and_linear() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![0.5, -1.0, 2.0];
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let w = |v: &[f64]| weighted_sum(v, 3);
        assert!((w(&a) + w(&b) - w(&sum)).abs() < 1e-12);
        assert_eq!(w(&a), w(&a));
    }
}
