//! Batch normalization over the leading axis of an (N x K) matrix.
//!
//! The forward pass is pure: it never touches the running statistics.
//! The owning context folds batch statistics into the running estimates
//! through [`BatchNormState::update_running`], keeping all mutation in
//! one place.

use super::{Mode, NnError};
use crate::tensor::Matrix2D;

/// Learnable scale/shift plus running statistics for evaluation mode.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNormState {
    pub dim: usize,
    pub gamma: Vec<f64>,
    pub shift: Vec<f64>,
    /// Stability constant added to the variance before the square root.
    pub delta: f64,
    /// Running-statistics decay: running = momentum*running + (1-momentum)*batch.
    pub momentum: f64,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

pub const BATCHNORM_DELTA: f64 = 1e-5;
pub const BATCHNORM_MOMENTUM: f64 = 0.99;

impl BatchNormState {
    pub fn new(dim: usize) -> Self {
        BatchNormState {
            dim,
            gamma: vec![1.0; dim],
            shift: vec![0.0; dim],
            delta: BATCHNORM_DELTA,
            momentum: BATCHNORM_MOMENTUM,
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
        }
    }

    /// Folds one batch's statistics into the running estimates.
    pub fn update_running(&mut self, batch_mean: &[f64], batch_var: &[f64]) {
        for k in 0..self.dim {
            self.running_mean[k] = self.momentum * self.running_mean[k] + (1.0 - self.momentum) * batch_mean[k];
            self.running_var[k] = self.momentum * self.running_var[k] + (1.0 - self.momentum) * batch_var[k];
        }
    }
}

pub struct BatchNormCache {
    x_hat: Matrix2D,
    inv_std: Vec<f64>,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
}

/// Train mode normalizes with the batch mean and (population) variance
/// per dimension; eval mode uses the running statistics. Returns the
/// cache only in train mode.
pub fn batchnorm_forward(
    input: &Matrix2D,
    state: &BatchNormState,
    mode: Mode,
) -> Result<(Matrix2D, Option<BatchNormCache>), NnError> {
    if input.cols() != state.dim {
        return Err(NnError::DimMismatch(format!(
            "batchnorm input has {} dims, state has {}",
            input.cols(),
            state.dim
        )));
    }
    let n = input.rows();
    let k_n = state.dim;
    match mode {
        Mode::Train => {
            if n < 2 {
                return Err(NnError::InvalidArgument(format!(
                    "batchnorm train mode needs at least 2 rows, got {n}"
                )));
            }
            let mut mean = vec![0.0; k_n];
            for r in 0..n {
                for (m, &v) in mean.iter_mut().zip(input.row(r)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            let mut var = vec![0.0; k_n];
            for r in 0..n {
                for (k, &v) in input.row(r).iter().enumerate() {
                    let d = v - mean[k];
                    var[k] += d * d;
                }
            }
            var.iter_mut().for_each(|v| *v /= n as f64);
            let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + state.delta).sqrt()).collect();
            let mut x_hat = Matrix2D::zeros(n, k_n);
            let mut out = Matrix2D::zeros(n, k_n);
            for r in 0..n {
                for k in 0..k_n {
                    let xh = (input.get(r, k) - mean[k]) * inv_std[k];
                    x_hat.set(r, k, xh);
                    out.set(r, k, state.gamma[k] * xh + state.shift[k]);
                }
            }
            let cache = BatchNormCache { x_hat, inv_std, batch_mean: mean, batch_var: var };
            Ok((out, Some(cache)))
        }
        Mode::Eval => {
            let inv_std: Vec<f64> =
                state.running_var.iter().map(|&v| 1.0 / (v + state.delta).sqrt()).collect();
            let mut out = Matrix2D::zeros(n, k_n);
            for r in 0..n {
                for k in 0..k_n {
                    let xh = (input.get(r, k) - state.running_mean[k]) * inv_std[k];
                    out.set(r, k, state.gamma[k] * xh + state.shift[k]);
                }
            }
            Ok((out, None))
        }
    }
}

/// Returns (d_input, d_gamma, d_shift) for a train-mode forward.
pub fn batchnorm_backward(
    cache: &BatchNormCache,
    state: &BatchNormState,
    upstream: &Matrix2D,
) -> Result<(Matrix2D, Vec<f64>, Vec<f64>), NnError> {
    let n = cache.x_hat.rows();
    let k_n = state.dim;
    if upstream.rows() != n || upstream.cols() != k_n {
        return Err(NnError::DimMismatch("batchnorm upstream gradient shape mismatch".into()));
    }
    let mut d_gamma = vec![0.0; k_n];
    let mut d_shift = vec![0.0; k_n];
    // Per-dimension sums of d_xhat and d_xhat*x_hat feed the closed-form
    // input gradient.
    let mut sum_dxh = vec![0.0; k_n];
    let mut sum_dxh_xh = vec![0.0; k_n];
    for r in 0..n {
        for k in 0..k_n {
            let g = upstream.get(r, k);
            let xh = cache.x_hat.get(r, k);
            d_gamma[k] += g * xh;
            d_shift[k] += g;
            let dxh = g * state.gamma[k];
            sum_dxh[k] += dxh;
            sum_dxh_xh[k] += dxh * xh;
        }
    }
    let nf = n as f64;
    let mut d_input = Matrix2D::zeros(n, k_n);
    for r in 0..n {
        for k in 0..k_n {
            let dxh = upstream.get(r, k) * state.gamma[k];
            let xh = cache.x_hat.get(r, k);
            let di = cache.inv_std[k] / nf * (nf * dxh - sum_dxh[k] - xh * sum_dxh_xh[k]);
            d_input.set(r, k, di);
        }
    }
    Ok((d_input, d_gamma, d_shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_single_dimension() {
        // Batch [1,2,3]: mean 2, population variance 2/3.
        let state = BatchNormState::new(1);
        let input = Matrix2D::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let (out, cache) = batchnorm_forward(&input, &state, Mode::Train).unwrap();
        let expect = 1.0 / (2.0 / 3.0 + 1e-5).sqrt();
        assert!((out.get(0, 0) + expect).abs() < 1e-9);
        assert!(out.get(1, 0).abs() < 1e-12);
        assert!((out.get(2, 0) - expect).abs() < 1e-9);
        assert!((expect - 1.2247).abs() < 1e-3);
        let cache = cache.unwrap();
        assert!((cache.batch_mean[0] - 2.0).abs() < 1e-12);
        assert!((cache.batch_var[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_batch_normalizes_to_zero() {
        let state = BatchNormState::new(1);
        let input = Matrix2D::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]);
        let (out, _) = batchnorm_forward(&input, &state, Mode::Train).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_affine_returns_x_hat() {
        let state = BatchNormState::new(2);
        let input = Matrix2D::from_rows(&[vec![1.0, -4.0], vec![3.0, 0.5], vec![-2.0, 2.0]]);
        let (out, cache) = batchnorm_forward(&input, &state, Mode::Train).unwrap();
        let cache = cache.unwrap();
        for r in 0..3 {
            for k in 0..2 {
                assert_eq!(out.get(r, k), cache.x_hat.get(r, k));
            }
        }
    }

    #[test]
    fn train_mode_requires_two_rows() {
        let state = BatchNormState::new(1);
        let input = Matrix2D::from_rows(&[vec![1.0]]);
        assert!(batchnorm_forward(&input, &state, Mode::Train).is_err());
        assert!(batchnorm_forward(&input, &state, Mode::Eval).is_ok());
    }

    #[test]
    fn eval_uses_running_stats() {
        let mut state = BatchNormState::new(1);
        state.running_mean[0] = 10.0;
        state.running_var[0] = 4.0;
        let input = Matrix2D::from_rows(&[vec![12.0]]);
        let (out, _) = batchnorm_forward(&input, &state, Mode::Eval).unwrap();
        // (12-10)/sqrt(4+delta) ~ 1.0
        assert!((out.get(0, 0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn running_update_is_exponential_moving_average() {
        let mut state = BatchNormState::new(1);
        state.update_running(&[2.0], &[3.0]);
        assert!((state.running_mean[0] - 0.02).abs() < 1e-12);
        assert!((state.running_var[0] - (0.99 + 0.03)).abs() < 1e-12);
    }
}
