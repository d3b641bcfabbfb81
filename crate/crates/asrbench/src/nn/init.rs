//! Weight initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NnError;
use crate::tensor::Matrix2D;

/// Xavier/Glorot uniform initialization: every entry is drawn from
/// U(-b, b) with b = sqrt(6 / (fan_in + fan_out)). Deterministic for a
/// fixed seed; the returned matrix is (fan_in x fan_out).
pub fn xavier_init(fan_in: usize, fan_out: usize, seed: u64) -> Result<Matrix2D, NnError> {
    if fan_in == 0 || fan_out == 0 {
        return Err(NnError::InvalidArgument(format!(
            "xavier_init requires positive fan values, got fan_in={fan_in} fan_out={fan_out}"
        )));
    }
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect();
    Ok(Matrix2D::from_vec(fan_in, fan_out, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_is_one_for_fan_three_three() {
        // sqrt(6/6) = 1, so every entry lies in [-1, 1].
        let m = xavier_init(3, 3, 7).unwrap();
        assert!(m.data().iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = xavier_init(5, 4, 42).unwrap();
        let b = xavier_init(5, 4, 42).unwrap();
        assert_eq!(a, b);
        let c = xavier_init(5, 4, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_fan_rejected() {
        assert!(xavier_init(0, 3, 1).is_err());
        assert!(xavier_init(3, 0, 1).is_err());
    }

    #[test]
    fn uniform_moments() {
        // 400x400 has bound sqrt(6/800); 1e5 samples pin the empirical
        // mean near 0 and the variance near bound^2/3.
        let m = xavier_init(400, 400, 9).unwrap();
        let n = m.data().len() as f64;
        let mean = m.data().iter().sum::<f64>() / n;
        let var = m.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let bound = (6.0_f64 / 800.0).sqrt();
        let expect_var = bound * bound / 3.0;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - expect_var).abs() < 0.1 * expect_var, "var {var} vs {expect_var}");
    }
}
