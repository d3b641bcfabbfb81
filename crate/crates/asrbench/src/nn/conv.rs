//! 1-D convolution over the time dimension.
//!
//! Only fully in-range windows are computed, and the output length
//! follows y = ceil((x - c_w) / c_s): a window starting at offset s is
//! admitted iff s + c_w < x (strict). This differs from the usual
//! "valid" count of floor((x - c_w)/c_s) + 1 exactly when (x - c_w) is
//! divisible by the stride.

use super::NnError;
use crate::tensor::Tensor3D;

/// Shape of the time-dimension convolution: kernel width and stride in
/// frames, plus input/output feature widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvSpec {
    pub width: usize,
    pub stride: usize,
    pub in_features: usize,
    pub out_features: usize,
}

impl ConvSpec {
    pub fn new(width: usize, stride: usize, in_features: usize, out_features: usize) -> Result<Self, NnError> {
        if width == 0 || stride == 0 || in_features == 0 || out_features == 0 {
            return Err(NnError::InvalidArgument(
                "conv width, stride and feature sizes must all be positive".into(),
            ));
        }
        Ok(ConvSpec { width, stride, in_features, out_features })
    }

    /// The 11 x 93 x 600, stride-2 kernel used at full scale.
    pub fn full_scale() -> Self {
        ConvSpec { width: 11, stride: 2, in_features: 93, out_features: 600 }
    }

    /// Output time length for an input of `input_len` frames:
    /// ceil((input_len - width) / stride). Inputs of `width` frames or
    /// fewer are rejected.
    pub fn output_len(&self, input_len: usize) -> Result<usize, NnError> {
        if input_len <= self.width {
            return Err(NnError::InputTooShort { got: input_len, min: self.width });
        }
        Ok((input_len - self.width).div_ceil(self.stride))
    }
}

/// Activations retained by [`conv1d_forward`] for the backward pass.
pub struct Conv1dCache {
    input: Tensor3D,
    spec: ConvSpec,
}

/// Slides `kernel` (width x in_features x out_features) over the time
/// axis of `input` (B x T x in_features) with the spec's stride and adds
/// `bias` per output feature. Returns (B x T' x out_features).
pub fn conv1d_forward(
    input: &Tensor3D,
    spec: &ConvSpec,
    kernel: &Tensor3D,
    bias: &[f64],
) -> Result<(Tensor3D, Conv1dCache), NnError> {
    if input.features() != spec.in_features {
        return Err(NnError::DimMismatch(format!(
            "conv input has {} features, spec expects {}",
            input.features(),
            spec.in_features
        )));
    }
    if kernel.batch() != spec.width || kernel.time() != spec.in_features || kernel.features() != spec.out_features {
        return Err(NnError::DimMismatch("conv kernel shape does not match spec".into()));
    }
    if bias.len() != spec.out_features {
        return Err(NnError::DimMismatch("conv bias length does not match out_features".into()));
    }
    let out_len = spec.output_len(input.time())?;
    let mut out = Tensor3D::zeros(input.batch(), out_len, spec.out_features);
    for b in 0..input.batch() {
        for t in 0..out_len {
            let start = t * spec.stride;
            let out_frame = out.frame_mut(b, t);
            out_frame.copy_from_slice(bias);
            for w in 0..spec.width {
                let in_frame = input.frame(b, start + w);
                for (f, &x) in in_frame.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let k_row = kernel.frame(w, f);
                    for (o, &k) in out_frame.iter_mut().zip(k_row) {
                        *o += x * k;
                    }
                }
            }
        }
    }
    Ok((out, Conv1dCache { input: input.clone(), spec: *spec }))
}

/// Gradients of a scalar loss w.r.t. conv input, kernel, and bias given
/// the upstream gradient at the conv output.
pub fn conv1d_backward(
    cache: &Conv1dCache,
    kernel: &Tensor3D,
    upstream: &Tensor3D,
) -> Result<(Tensor3D, Tensor3D, Vec<f64>), NnError> {
    let spec = &cache.spec;
    let out_len = spec.output_len(cache.input.time())?;
    if upstream.batch() != cache.input.batch()
        || upstream.time() != out_len
        || upstream.features() != spec.out_features
    {
        return Err(NnError::DimMismatch("conv upstream gradient shape mismatch".into()));
    }
    let mut d_input = Tensor3D::zeros(cache.input.batch(), cache.input.time(), spec.in_features);
    let mut d_kernel = Tensor3D::zeros(spec.width, spec.in_features, spec.out_features);
    let mut d_bias = vec![0.0; spec.out_features];
    for b in 0..cache.input.batch() {
        for t in 0..out_len {
            let start = t * spec.stride;
            let up = upstream.frame(b, t);
            for (o, &g) in up.iter().enumerate() {
                d_bias[o] += g;
            }
            for w in 0..spec.width {
                let in_frame = cache.input.frame(b, start + w);
                for f in 0..spec.in_features {
                    let x = in_frame[f];
                    let k_row = kernel.frame(w, f);
                    let dk_row = d_kernel.frame_mut(w, f);
                    let mut acc = 0.0;
                    for (o, &g) in up.iter().enumerate() {
                        acc += g * k_row[o];
                        dk_row[o] += g * x;
                    }
                    d_input.frame_mut(b, start + w)[f] += acc;
                }
            }
        }
    }
    Ok((d_input, d_kernel, d_bias))
}
