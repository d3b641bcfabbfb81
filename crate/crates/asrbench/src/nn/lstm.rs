//! Unidirectional LSTM with full backpropagation through time.
//!
//! Gate convention: input, forget, output, candidate. Each gate weight
//! is a ((input_size + hidden_size) x hidden_size) matrix applied to
//! the concatenation [x_t, h_{t-1}].

use super::{sigmoid, NnError};
use crate::tensor::{Matrix2D, Tensor3D};
use crate::nn::xavier_init;

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub input_size: usize,
    pub hidden_size: usize,
    pub w_input: Matrix2D,
    pub w_forget: Matrix2D,
    pub w_output: Matrix2D,
    pub w_cell: Matrix2D,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_output: Vec<f64>,
    pub b_cell: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let z = || Matrix2D::zeros(input_size + hidden_size, hidden_size);
        LstmParams {
            input_size,
            hidden_size,
            w_input: z(),
            w_forget: z(),
            w_output: z(),
            w_cell: z(),
            b_input: vec![0.0; hidden_size],
            b_forget: vec![0.0; hidden_size],
            b_output: vec![0.0; hidden_size],
            b_cell: vec![0.0; hidden_size],
        }
    }

    /// Xavier-initialized weights, zero biases except the forget gate
    /// bias which starts at 1.0.
    pub fn xavier(input_size: usize, hidden_size: usize, seed: u64) -> Result<Self, NnError> {
        let fan_in = input_size + hidden_size;
        Ok(LstmParams {
            input_size,
            hidden_size,
            w_input: xavier_init(fan_in, hidden_size, seed)?,
            w_forget: xavier_init(fan_in, hidden_size, seed.wrapping_add(1))?,
            w_output: xavier_init(fan_in, hidden_size, seed.wrapping_add(2))?,
            w_cell: xavier_init(fan_in, hidden_size, seed.wrapping_add(3))?,
            b_input: vec![0.0; hidden_size],
            b_forget: vec![1.0; hidden_size],
            b_output: vec![0.0; hidden_size],
            b_cell: vec![0.0; hidden_size],
        })
    }

    fn check(&self) -> Result<(), NnError> {
        let fan = self.input_size + self.hidden_size;
        let ok = |m: &Matrix2D| m.rows() == fan && m.cols() == self.hidden_size;
        if !(ok(&self.w_input) && ok(&self.w_forget) && ok(&self.w_output) && ok(&self.w_cell)) {
            return Err(NnError::DimMismatch("lstm gate weight shapes inconsistent".into()));
        }
        let okb = |b: &Vec<f64>| b.len() == self.hidden_size;
        if !(okb(&self.b_input) && okb(&self.b_forget) && okb(&self.b_output) && okb(&self.b_cell)) {
            return Err(NnError::DimMismatch("lstm bias lengths inconsistent".into()));
        }
        Ok(())
    }
}

/// Per-step activations retained for backpropagation through time.
pub struct LstmCache {
    input: Tensor3D,
    lengths: Vec<usize>,
    // B x T x H each; values at masked steps are unused.
    gate_i: Tensor3D,
    gate_f: Tensor3D,
    gate_o: Tensor3D,
    gate_g: Tensor3D,
    cell: Tensor3D,
    tanh_cell: Tensor3D,
    hidden: Tensor3D,
}

/// Gradients for every LSTM parameter, same shapes as [`LstmParams`].
#[derive(Clone, Debug)]
pub struct LstmGrads {
    pub w_input: Matrix2D,
    pub w_forget: Matrix2D,
    pub w_output: Matrix2D,
    pub w_cell: Matrix2D,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_output: Vec<f64>,
    pub b_cell: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros(params: &LstmParams) -> Self {
        let z = || Matrix2D::zeros(params.input_size + params.hidden_size, params.hidden_size);
        LstmGrads {
            w_input: z(),
            w_forget: z(),
            w_output: z(),
            w_cell: z(),
            b_input: vec![0.0; params.hidden_size],
            b_forget: vec![0.0; params.hidden_size],
            b_output: vec![0.0; params.hidden_size],
            b_cell: vec![0.0; params.hidden_size],
        }
    }
}

// pre = [x, h] . w + b for one gate.
fn gate_preact(x: &[f64], h: &[f64], w: &Matrix2D, b: &[f64], out: &mut [f64]) {
    out.copy_from_slice(b);
    for (j, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(w.row(j)) {
            *o += v * wv;
        }
    }
    let offset = x.len();
    for (j, &v) in h.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(w.row(offset + j)) {
            *o += v * wv;
        }
    }
}

/// Runs the LSTM recurrence over `input` (B x T x input_size). Steps at
/// or beyond `lengths[b]` emit zero output and leave the recurrent state
/// untouched.
pub fn lstm_forward(
    input: &Tensor3D,
    params: &LstmParams,
    lengths: &[usize],
) -> Result<(Tensor3D, LstmCache), NnError> {
    params.check()?;
    if input.features() != params.input_size {
        return Err(NnError::DimMismatch(format!(
            "lstm input has {} features, params expect {}",
            input.features(),
            params.input_size
        )));
    }
    if lengths.len() != input.batch() {
        return Err(NnError::DimMismatch("lengths must have one entry per batch element".into()));
    }
    if let Some(&bad) = lengths.iter().find(|&&l| l > input.time()) {
        return Err(NnError::InvalidArgument(format!(
            "length {bad} exceeds input time {}",
            input.time()
        )));
    }

    let (b_n, t_n, h_n) = (input.batch(), input.time(), params.hidden_size);
    let mut cache = LstmCache {
        input: input.clone(),
        lengths: lengths.to_vec(),
        gate_i: Tensor3D::zeros(b_n, t_n, h_n),
        gate_f: Tensor3D::zeros(b_n, t_n, h_n),
        gate_o: Tensor3D::zeros(b_n, t_n, h_n),
        gate_g: Tensor3D::zeros(b_n, t_n, h_n),
        cell: Tensor3D::zeros(b_n, t_n, h_n),
        tanh_cell: Tensor3D::zeros(b_n, t_n, h_n),
        hidden: Tensor3D::zeros(b_n, t_n, h_n),
    };
    let mut pre = vec![0.0; h_n];
    for b in 0..b_n {
        let mut h_prev = vec![0.0; h_n];
        let mut c_prev = vec![0.0; h_n];
        for t in 0..lengths[b] {
            let x = input.frame(b, t);
            gate_preact(x, &h_prev, &params.w_input, &params.b_input, &mut pre);
            for (dst, &p) in cache.gate_i.frame_mut(b, t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            gate_preact(x, &h_prev, &params.w_forget, &params.b_forget, &mut pre);
            for (dst, &p) in cache.gate_f.frame_mut(b, t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            gate_preact(x, &h_prev, &params.w_output, &params.b_output, &mut pre);
            for (dst, &p) in cache.gate_o.frame_mut(b, t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            gate_preact(x, &h_prev, &params.w_cell, &params.b_cell, &mut pre);
            for (dst, &p) in cache.gate_g.frame_mut(b, t).iter_mut().zip(&pre) {
                *dst = p.tanh();
            }
            for k in 0..h_n {
                let c = cache.gate_f.frame(b, t)[k] * c_prev[k]
                    + cache.gate_i.frame(b, t)[k] * cache.gate_g.frame(b, t)[k];
                let tc = c.tanh();
                cache.cell.frame_mut(b, t)[k] = c;
                cache.tanh_cell.frame_mut(b, t)[k] = tc;
                cache.hidden.frame_mut(b, t)[k] = cache.gate_o.frame(b, t)[k] * tc;
            }
            h_prev.copy_from_slice(cache.hidden.frame(b, t));
            c_prev.copy_from_slice(cache.cell.frame(b, t));
        }
    }
    let output = cache.hidden.clone();
    Ok((output, cache))
}

/// Backpropagation through time. Upstream gradient entries at masked
/// steps are ignored because those outputs are constant zero.
pub fn lstm_backward(
    cache: &LstmCache,
    params: &LstmParams,
    upstream: &Tensor3D,
) -> Result<(Tensor3D, LstmGrads), NnError> {
    let (b_n, t_n, h_n) = (cache.input.batch(), cache.input.time(), params.hidden_size);
    if upstream.batch() != b_n || upstream.time() != t_n || upstream.features() != h_n {
        return Err(NnError::DimMismatch("lstm upstream gradient shape mismatch".into()));
    }
    let i_n = params.input_size;
    let mut d_input = Tensor3D::zeros(b_n, t_n, i_n);
    let mut grads = LstmGrads::zeros(params);

    let mut d_pre_i = vec![0.0; h_n];
    let mut d_pre_f = vec![0.0; h_n];
    let mut d_pre_o = vec![0.0; h_n];
    let mut d_pre_g = vec![0.0; h_n];

    for b in 0..b_n {
        let len = cache.lengths[b];
        let mut d_h = vec![0.0; h_n];
        let mut d_c = vec![0.0; h_n];
        for t in (0..len).rev() {
            let i_g = cache.gate_i.frame(b, t);
            let f_g = cache.gate_f.frame(b, t);
            let o_g = cache.gate_o.frame(b, t);
            let g_g = cache.gate_g.frame(b, t);
            let tc = cache.tanh_cell.frame(b, t);
            for k in 0..h_n {
                d_h[k] += upstream.frame(b, t)[k];
                let dc = d_c[k] + d_h[k] * o_g[k] * (1.0 - tc[k] * tc[k]);
                let c_prev = if t == 0 { 0.0 } else { cache.cell.frame(b, t - 1)[k] };
                d_pre_o[k] = d_h[k] * tc[k] * o_g[k] * (1.0 - o_g[k]);
                d_pre_i[k] = dc * g_g[k] * i_g[k] * (1.0 - i_g[k]);
                d_pre_f[k] = dc * c_prev * f_g[k] * (1.0 - f_g[k]);
                d_pre_g[k] = dc * i_g[k] * (1.0 - g_g[k] * g_g[k]);
                d_c[k] = dc * f_g[k];
            }
            // Accumulate parameter gradients and push gradient to x and
            // h_{t-1} through each gate.
            let x = cache.input.frame(b, t);
            let h_prev_frame;
            let h_prev: &[f64] = if t == 0 {
                &[]
            } else {
                h_prev_frame = cache.hidden.frame(b, t - 1);
                h_prev_frame
            };
            d_h.iter_mut().for_each(|v| *v = 0.0);
            {
                let dx = d_input.frame_mut(b, t);
                let mut push = |w: &Matrix2D, gw: &mut Matrix2D, gb: &mut [f64], d_pre: &[f64]| {
                    for (k, &dp) in d_pre.iter().enumerate() {
                        gb[k] += dp;
                    }
                    for (j, &xv) in x.iter().enumerate() {
                        let w_row = w.row(j);
                        let gw_row = gw.row_mut(j);
                        let mut acc = 0.0;
                        for (k, &dp) in d_pre.iter().enumerate() {
                            acc += dp * w_row[k];
                            gw_row[k] += dp * xv;
                        }
                        dx[j] += acc;
                    }
                    for (j, &hv) in h_prev.iter().enumerate() {
                        let w_row = w.row(i_n + j);
                        let gw_row = gw.row_mut(i_n + j);
                        let mut acc = 0.0;
                        for (k, &dp) in d_pre.iter().enumerate() {
                            acc += dp * w_row[k];
                            gw_row[k] += dp * hv;
                        }
                        d_h[j] += acc;
                    }
                    // t == 0 has zero h_prev: no weight gradient from the
                    // recurrent half and nothing to propagate.
                };
                push(&params.w_input, &mut grads.w_input, &mut grads.b_input, &d_pre_i);
                push(&params.w_forget, &mut grads.w_forget, &mut grads.b_forget, &d_pre_f);
                push(&params.w_output, &mut grads.w_output, &mut grads.b_output, &d_pre_o);
                push(&params.w_cell, &mut grads.w_cell, &mut grads.b_cell, &d_pre_g);
            }
        }
    }
    Ok((d_input, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_zero_input_give_zero_output() {
        let params = LstmParams::zeros(3, 2);
        let input = Tensor3D::zeros(1, 4, 3);
        let (out, _) = lstm_forward(&input, &params, &[4]).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masked_steps_emit_zero_and_freeze_state() {
        let params = LstmParams::xavier(2, 3, 5).unwrap();
        let mut input = Tensor3D::zeros(1, 3, 2);
        for t in 0..3 {
            input.frame_mut(0, t).copy_from_slice(&[0.7, -0.3]);
        }
        let (out, _) = lstm_forward(&input, &params, &[1]).unwrap();
        assert!(out.frame(0, 0).iter().any(|&v| v != 0.0));
        assert!(out.frame(0, 1).iter().all(|&v| v == 0.0));
        assert!(out.frame(0, 2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_scalar_reimplementation() {
        // Independent step-by-step scalar recurrence for B=1, T=3, I=2, H=2.
        let params = LstmParams::xavier(2, 2, 11).unwrap();
        let input = Tensor3D::from_vec(1, 3, 2, vec![0.5, -1.0, 0.25, 0.8, -0.4, 0.1]);
        let (out, _) = lstm_forward(&input, &params, &[3]).unwrap();

        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut h = [0.0f64; 2];
        let mut c = [0.0f64; 2];
        for t in 0..3 {
            let x = input.frame(0, t);
            let z = [x[0], x[1], h[0], h[1]];
            let mut gates = [[0.0f64; 2]; 4];
            let ws = [&params.w_input, &params.w_forget, &params.w_output, &params.w_cell];
            let bs = [&params.b_input, &params.b_forget, &params.b_output, &params.b_cell];
            for (g, (w, b)) in ws.iter().zip(bs.iter()).enumerate() {
                for k in 0..2 {
                    let mut acc = b[k];
                    for (j, &zv) in z.iter().enumerate() {
                        acc += zv * w.get(j, k);
                    }
                    gates[g][k] = acc;
                }
            }
            let mut h_new = [0.0f64; 2];
            let mut c_new = [0.0f64; 2];
            for k in 0..2 {
                let i = sig(gates[0][k]);
                let f = sig(gates[1][k]);
                let o = sig(gates[2][k]);
                let g = gates[3][k].tanh();
                c_new[k] = f * c[k] + i * g;
                h_new[k] = o * c_new[k].tanh();
            }
            h = h_new;
            c = c_new;
            for k in 0..2 {
                assert!((out.frame(0, t)[k] - h[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dim_mismatch_rejected() {
        let params = LstmParams::zeros(3, 2);
        let input = Tensor3D::zeros(1, 4, 5);
        assert!(matches!(lstm_forward(&input, &params, &[4]), Err(NnError::DimMismatch(_))));
        assert!(lstm_forward(&Tensor3D::zeros(1, 4, 3), &params, &[5]).is_err());
    }
}
