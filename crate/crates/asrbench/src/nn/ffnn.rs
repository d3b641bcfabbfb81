//! Fully connected layer: output = input . W + b.

use super::NnError;
use crate::tensor::Matrix2D;

pub struct FfnnCache {
    input: Matrix2D,
}

/// `input` is (N x in), `w` is (in x out), `b` has length out.
pub fn ffnn_forward(input: &Matrix2D, w: &Matrix2D, b: &[f64]) -> Result<(Matrix2D, FfnnCache), NnError> {
    if input.cols() != w.rows() {
        return Err(NnError::DimMismatch(format!(
            "ffnn input cols {} != weight rows {}",
            input.cols(),
            w.rows()
        )));
    }
    if b.len() != w.cols() {
        return Err(NnError::DimMismatch("ffnn bias length != weight cols".into()));
    }
    let mut out = input.matmul(w);
    for r in 0..out.rows() {
        for (v, &bias) in out.row_mut(r).iter_mut().zip(b) {
            *v += bias;
        }
    }
    Ok((out, FfnnCache { input: input.clone() }))
}

/// Returns (d_input, d_w, d_b) for upstream gradient of shape (N x out).
pub fn ffnn_backward(
    cache: &FfnnCache,
    w: &Matrix2D,
    upstream: &Matrix2D,
) -> Result<(Matrix2D, Matrix2D, Vec<f64>), NnError> {
    if upstream.rows() != cache.input.rows() || upstream.cols() != w.cols() {
        return Err(NnError::DimMismatch("ffnn upstream gradient shape mismatch".into()));
    }
    let d_input = upstream.matmul(&w.transpose());
    let d_w = cache.input.transpose().matmul(upstream);
    let mut d_b = vec![0.0; w.cols()];
    for r in 0..upstream.rows() {
        for (acc, &g) in d_b.iter_mut().zip(upstream.row(r)) {
            *acc += g;
        }
    }
    Ok((d_input, d_w, d_b))
}
