//! One LSTM direction: forward recurrence and backpropagation through time.
//!
//! Gates are stacked in the order input, forget, cell candidate, output:
//!
//! ```text
//! z = W x + U h_prev + b
//! i = sigmoid(z_i)  f = sigmoid(z_f)  g = tanh(z_g)  o = sigmoid(z_o)
//! c = f * c_prev + i * g
//! h = o * tanh(c)
//! ```

use super::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirectionParams {
    /// `4H x D`
    pub input_weights: Matrix,
    /// `4H x H`
    pub recurrent_weights: Matrix,
    /// `4H`
    pub bias: Vec<f64>,
}

impl LstmDirectionParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmDirectionParams {
            input_weights: Matrix::zeros(4 * hidden, input),
            recurrent_weights: Matrix::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.recurrent_weights.cols
    }

    pub fn input(&self) -> usize {
        self.input_weights.cols
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gate activations and states of one time step.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// `[i | f | g | o]`, post-activation.
    pub gates: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

fn step_cached(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &LstmDirectionParams) -> StepCache {
    let hsz = p.hidden();
    let mut z = p.bias.clone();
    p.input_weights.mul_vec_add(x, &mut z);
    p.recurrent_weights.mul_vec_add(h_prev, &mut z);
    for (k, v) in z.iter_mut().enumerate() {
        *v = if k / hsz == 2 { v.tanh() } else { sigmoid(*v) };
    }
    let mut c = vec![0.0; hsz];
    let mut tanh_c = vec![0.0; hsz];
    let mut h = vec![0.0; hsz];
    for j in 0..hsz {
        let (i, f, g, o) = (z[j], z[hsz + j], z[2 * hsz + j], z[3 * hsz + j]);
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
    StepCache {
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates: z,
        tanh_c,
        h,
        c,
    }
}

/// One LSTM step, returning `(h, c)`.
pub fn cell_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmDirectionParams,
) -> (Vec<f64>, Vec<f64>) {
    let s = step_cached(x, h_prev, c_prev, p);
    (s.h, s.c)
}

/// Runs the recurrence over `inputs` in the given order from zero state.
pub(crate) fn run_direction(p: &LstmDirectionParams, inputs: &[&[f64]]) -> Vec<StepCache> {
    let hsz = p.hidden();
    let mut steps: Vec<StepCache> = Vec::with_capacity(inputs.len());
    let zero = vec![0.0; hsz];
    for x in inputs {
        let (h_prev, c_prev) = match steps.last() {
            Some(s) => (s.h.as_slice(), s.c.as_slice()),
            None => (zero.as_slice(), zero.as_slice()),
        };
        let s = step_cached(x, h_prev, c_prev, p);
        steps.push(s);
    }
    steps
}

/// BPTT for one direction. `dh_ext[t]` is the loss gradient reaching `h_t`
/// from outside the recurrence (processing order). Parameter gradients are
/// accumulated into `grads`; returns the gradient for each input when
/// `want_dx` is set.
pub(crate) fn backprop_direction(
    p: &LstmDirectionParams,
    inputs: &[&[f64]],
    steps: &[StepCache],
    dh_ext: &[Vec<f64>],
    grads: &mut LstmDirectionParams,
    want_dx: bool,
) -> Vec<Vec<f64>> {
    let hsz = p.hidden();
    let mut dh_next = vec![0.0; hsz];
    let mut dc_next = vec![0.0; hsz];
    let mut dz = vec![0.0; 4 * hsz];
    let mut dxs = if want_dx {
        vec![vec![0.0; p.input()]; steps.len()]
    } else {
        Vec::new()
    };
    for t in (0..steps.len()).rev() {
        let s = &steps[t];
        let g = &s.gates;
        for j in 0..hsz {
            let (i, f, cand, o) = (g[j], g[hsz + j], g[2 * hsz + j], g[3 * hsz + j]);
            let dh = dh_ext[t][j] + dh_next[j];
            let d_o = dh * s.tanh_c[j];
            let dc = dh * o * (1.0 - s.tanh_c[j] * s.tanh_c[j]) + dc_next[j];
            dz[j] = dc * cand * i * (1.0 - i);
            dz[hsz + j] = dc * s.c_prev[j] * f * (1.0 - f);
            dz[2 * hsz + j] = dc * i * (1.0 - cand * cand);
            dz[3 * hsz + j] = d_o * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        grads.input_weights.add_outer(&dz, inputs[t]);
        grads.recurrent_weights.add_outer(&dz, &s.h_prev);
        for (b, d) in grads.bias.iter_mut().zip(&dz) {
            *b += d;
        }
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        p.recurrent_weights.tr_mul_vec_add(&dz, &mut dh_next);
        if want_dx {
            p.input_weights.tr_mul_vec_add(&dz, &mut dxs[t]);
        }
    }
    dxs
}
