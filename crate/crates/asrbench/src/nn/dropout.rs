//! Inverted dropout: surviving units are scaled by 1/(1-rate) during
//! training so evaluation is a plain identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mode, NnError};
use crate::tensor::Matrix2D;

pub struct DropoutCache {
    // Per-unit multiplier: 0 for dropped, 1/(1-rate) for kept, 1 in eval.
    scale: Matrix2D,
}

pub fn dropout(
    input: &Matrix2D,
    rate: f64,
    seed: u64,
    mode: Mode,
) -> Result<(Matrix2D, DropoutCache), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::InvalidArgument(format!("dropout rate must be in [0,1), got {rate}")));
    }
    let (rows, cols) = (input.rows(), input.cols());
    if mode == Mode::Eval || rate == 0.0 {
        let scale = Matrix2D::from_vec(rows, cols, vec![1.0; rows * cols]);
        return Ok((input.clone(), DropoutCache { scale }));
    }
    let keep_scale = 1.0 / (1.0 - rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scale = Matrix2D::zeros(rows, cols);
    let mut out = Matrix2D::zeros(rows, cols);
    for (i, &v) in input.data().iter().enumerate() {
        let s = if rng.random_range(0.0..1.0) < rate { 0.0 } else { keep_scale };
        scale.data_mut()[i] = s;
        out.data_mut()[i] = v * s;
    }
    Ok((out, DropoutCache { scale }))
}

pub fn dropout_backward(cache: &DropoutCache, upstream: &Matrix2D) -> Result<Matrix2D, NnError> {
    if upstream.rows() != cache.scale.rows() || upstream.cols() != cache.scale.cols() {
        return Err(NnError::DimMismatch("dropout upstream gradient shape mismatch".into()));
    }
    let mut out = upstream.clone();
    for (o, &s) in out.data_mut().iter_mut().zip(cache.scale.data()) {
        *o *= s;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_identity() {
        let input = Matrix2D::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]);
        let (out, _) = dropout(&input, 0.0, 1, Mode::Train).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn eval_mode_is_identity() {
        let input = Matrix2D::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]);
        let (out, _) = dropout(&input, 0.9, 1, Mode::Eval).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn drop_fraction_and_scaling() {
        let n = 1_000_000;
        let input = Matrix2D::from_vec(1000, 1000, vec![2.0; n]);
        let (out, _) = dropout(&input, 0.05, 42, Mode::Train).unwrap();
        let dropped = out.data().iter().filter(|&&v| v == 0.0).count();
        let frac = dropped as f64 / n as f64;
        assert!((frac - 0.05).abs() < 0.002, "dropped fraction {frac}");
        let survivor = 2.0 / 0.95;
        assert!(out.data().iter().all(|&v| v == 0.0 || (v - survivor).abs() < 1e-12));
    }

    #[test]
    fn deterministic_per_seed() {
        let input = Matrix2D::from_vec(10, 10, (0..100).map(|i| i as f64).collect());
        let (a, _) = dropout(&input, 0.3, 7, Mode::Train).unwrap();
        let (b, _) = dropout(&input, 0.3, 7, Mode::Train).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_rate_rejected() {
        let input = Matrix2D::zeros(2, 2);
        assert!(dropout(&input, 1.0, 1, Mode::Train).is_err());
        assert!(dropout(&input, -0.1, 1, Mode::Train).is_err());
    }
}
