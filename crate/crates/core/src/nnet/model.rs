use rand::Rng;
use rayon::prelude::*;

use super::lstm::{backprop_direction, run_direction, StepCache};
use super::{LstmDirectionParams, Matrix, NnetError};
use crate::features::NUM_FEATURES;

pub const NUM_LAYERS: usize = 2;
pub const NUM_CLASSES: usize = 2;

/// Forward and backward parameter sets of one bidirectional layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLayer {
    pub forward: LstmDirectionParams,
    pub backward: LstmDirectionParams,
}

/// Two stacked bidirectional LSTM layers and a softmax head reading the
/// final states `[h_fw(T); h_bw(1)]` of the second layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmModel {
    pub layers: [BiLayer; NUM_LAYERS],
    /// `2 x 2H`
    pub head_weights: Matrix,
    pub head_bias: Vec<f64>,
    pub hidden_size: usize,
    pub input_size: usize,
}

/// Gradients and optimizer velocity share the model's shapes.
pub type Gradients = BiLstmModel;

impl BiLstmModel {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let layer = |input| BiLayer {
            forward: LstmDirectionParams::zeros(input, hidden_size),
            backward: LstmDirectionParams::zeros(input, hidden_size),
        };
        BiLstmModel {
            layers: [layer(input_size), layer(2 * hidden_size)],
            head_weights: Matrix::zeros(NUM_CLASSES, 2 * hidden_size),
            head_bias: vec![0.0; NUM_CLASSES],
            hidden_size,
            input_size,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size, self.hidden_size)
    }

    /// Parameter blocks in storage order with their names.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::with_capacity(14);
        for (li, layer) in self.layers.iter().enumerate() {
            for (dname, d) in [("forward", &layer.forward), ("backward", &layer.backward)] {
                let p = format!("layer{}.{dname}", li + 1);
                out.push((format!("{p}.input_weights"), &d.input_weights.data));
                out.push((format!("{p}.recurrent_weights"), &d.recurrent_weights.data));
                out.push((format!("{p}.bias"), &d.bias));
            }
        }
        out.push(("head.weights".into(), &self.head_weights.data));
        out.push(("head.bias".into(), &self.head_bias));
        out
    }

    /// Mutable parameter blocks in the same order as [`blocks`](Self::blocks).
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(14);
        for layer in self.layers.iter_mut() {
            for d in [&mut layer.forward, &mut layer.backward] {
                out.push(&mut d.input_weights.data);
                out.push(&mut d.recurrent_weights.data);
                out.push(&mut d.bias);
            }
        }
        out.push(&mut self.head_weights.data);
        out.push(&mut self.head_bias);
        out
    }

    /// Shapes `(rows, cols)` in storage order; vectors have one column.
    pub fn block_shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(14);
        for layer in &self.layers {
            for d in [&layer.forward, &layer.backward] {
                out.push(d.input_weights.shape());
                out.push(d.recurrent_weights.shape());
                out.push((d.bias.len(), 1));
            }
        }
        out.push(self.head_weights.shape());
        out.push((self.head_bias.len(), 1));
        out
    }

    pub fn num_params(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    /// Adds `other * scale` to every parameter.
    pub fn add_scaled(&mut self, other: &BiLstmModel, scale: f64) {
        for (dst, (_, src)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, b)| b.iter())
            .map(|v| v * v)
            .sum()
    }
}

/// Glorot-uniform weights, zero biases except the forget gate (1.0).
/// `input_size` is 10 for feature sequences.
pub fn init_model_with_input(input_size: usize, hidden: usize, seed: u64) -> BiLstmModel {
    let mut rng = crate::seed::rng(seed);
    let mut model = BiLstmModel::zeros(input_size, hidden);
    let mut glorot = |m: &mut Matrix| {
        let s = (6.0 / (m.rows + m.cols) as f64).sqrt();
        for v in m.data.iter_mut() {
            *v = rng.random_range(-s..s);
        }
    };
    for layer in model.layers.iter_mut() {
        for d in [&mut layer.forward, &mut layer.backward] {
            glorot(&mut d.input_weights);
            glorot(&mut d.recurrent_weights);
            d.bias[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        }
    }
    glorot(&mut model.head_weights);
    model
}

pub fn init_model(hidden: usize, seed: u64) -> BiLstmModel {
    init_model_with_input(NUM_FEATURES, hidden, seed)
}

/// Activations of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Vec<f64>>,
    l1_fwd: Vec<StepCache>,
    l1_bwd: Vec<StepCache>,
    /// Layer-2 input per time step, `[h1_fw(t); h1_bw(t)]`.
    l2_inputs: Vec<Vec<f64>>,
    l2_fwd: Vec<StepCache>,
    l2_bwd: Vec<StepCache>,
    head_input: Vec<f64>,
    pub probabilities: [f64; NUM_CLASSES],
}

pub(crate) fn softmax(logits: &[f64]) -> [f64; NUM_CLASSES] {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    [e[0] / s, e[1] / s]
}

/// Runs both layers over `xs` (time order) and returns the class
/// probabilities with the cache.
pub fn forward<R: AsRef<[f64]>>(model: &BiLstmModel, xs: &[R]) -> Result<ForwardCache, NnetError> {
    if xs.is_empty() {
        return Err(NnetError::EmptySequence);
    }
    let hsz = model.hidden_size;
    let t_len = xs.len();
    let inputs: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let x = x.as_ref();
            if x.len() != model.input_size {
                Err(NnetError::InputSize {
                    expected: model.input_size,
                    got: x.len(),
                })
            } else {
                Ok(x.to_vec())
            }
        })
        .collect::<Result<_, _>>()?;

    let fwd_order: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
    let rev_order: Vec<&[f64]> = inputs.iter().rev().map(Vec::as_slice).collect();
    let l1_fwd = run_direction(&model.layers[0].forward, &fwd_order);
    let l1_bwd = run_direction(&model.layers[0].backward, &rev_order);

    let l2_inputs: Vec<Vec<f64>> = (0..t_len)
        .map(|t| {
            let mut u = Vec::with_capacity(2 * hsz);
            u.extend_from_slice(&l1_fwd[t].h);
            u.extend_from_slice(&l1_bwd[t_len - 1 - t].h);
            u
        })
        .collect();
    let fwd2: Vec<&[f64]> = l2_inputs.iter().map(Vec::as_slice).collect();
    let rev2: Vec<&[f64]> = l2_inputs.iter().rev().map(Vec::as_slice).collect();
    let l2_fwd = run_direction(&model.layers[1].forward, &fwd2);
    let l2_bwd = run_direction(&model.layers[1].backward, &rev2);

    let mut head_input = Vec::with_capacity(2 * hsz);
    head_input.extend_from_slice(&l2_fwd[t_len - 1].h);
    head_input.extend_from_slice(&l2_bwd[t_len - 1].h);
    let mut logits = model.head_bias.clone();
    model.head_weights.mul_vec_add(&head_input, &mut logits);
    let probabilities = softmax(&logits);

    Ok(ForwardCache {
        inputs,
        l1_fwd,
        l1_bwd,
        l2_inputs,
        l2_fwd,
        l2_bwd,
        head_input,
        probabilities,
    })
}

/// Cross-entropy `-ln p[label]`.
pub fn loss(probabilities: &[f64; NUM_CLASSES], label: usize) -> f64 {
    -probabilities[label].max(f64::MIN_POSITIVE).ln()
}

/// Accumulates into `grads` the gradient of `scale * loss` for one example.
pub fn backward_example(model: &BiLstmModel, cache: &ForwardCache, label: usize, scale: f64, grads: &mut Gradients) {
    let hsz = model.hidden_size;
    let t_len = cache.inputs.len();

    let mut dlogits = cache.probabilities;
    dlogits[label] -= 1.0;
    dlogits.iter_mut().for_each(|d| *d *= scale);
    grads.head_weights.add_outer(&dlogits, &cache.head_input);
    for (b, d) in grads.head_bias.iter_mut().zip(&dlogits) {
        *b += d;
    }
    let mut dhead = vec![0.0; 2 * hsz];
    model.head_weights.tr_mul_vec_add(&dlogits, &mut dhead);

    // Layer 2: only the final processed step of each direction feeds the head.
    let mut dh = vec![vec![0.0; hsz]; t_len];
    dh[t_len - 1].copy_from_slice(&dhead[..hsz]);
    let fwd2: Vec<&[f64]> = cache.l2_inputs.iter().map(Vec::as_slice).collect();
    let du_f = backprop_direction(&model.layers[1].forward, &fwd2, &cache.l2_fwd, &dh, &mut grads.layers[1].forward, true);

    dh[t_len - 1].copy_from_slice(&dhead[hsz..]);
    let rev2: Vec<&[f64]> = cache.l2_inputs.iter().rev().map(Vec::as_slice).collect();
    let du_b = backprop_direction(&model.layers[1].backward, &rev2, &cache.l2_bwd, &dh, &mut grads.layers[1].backward, true);

    // Split the layer-2 input gradient back onto the two layer-1 directions.
    let mut dh1_f = vec![vec![0.0; hsz]; t_len];
    let mut dh1_b = vec![vec![0.0; hsz]; t_len];
    for t in 0..t_len {
        let s = t_len - 1 - t;
        for j in 0..hsz {
            dh1_f[t][j] = du_f[t][j] + du_b[s][j];
            // Backward direction states are indexed in its processing order.
            dh1_b[s][j] = du_f[t][hsz + j] + du_b[s][hsz + j];
        }
    }
    let fwd1: Vec<&[f64]> = cache.inputs.iter().map(Vec::as_slice).collect();
    let rev1: Vec<&[f64]> = cache.inputs.iter().rev().map(Vec::as_slice).collect();
    backprop_direction(&model.layers[0].forward, &fwd1, &cache.l1_fwd, &dh1_f, &mut grads.layers[0].forward, false);
    backprop_direction(&model.layers[0].backward, &rev1, &cache.l1_bwd, &dh1_b, &mut grads.layers[0].backward, false);
}

/// Mean loss, per-example probabilities, and exact gradients of the mean
/// batch loss. Examples run in parallel; their gradients are summed in batch
/// order.
pub fn batch_gradients<R: AsRef<[f64]> + Sync>(
    model: &BiLstmModel,
    batch: &[(&[R], usize)],
) -> Result<(f64, Vec<[f64; NUM_CLASSES]>, Gradients), NnetError> {
    let scale = 1.0 / batch.len() as f64;
    let per_example: Vec<(f64, [f64; NUM_CLASSES], Gradients)> = batch
        .par_iter()
        .map(|(xs, label)| {
            let cache = forward(model, xs)?;
            let mut g = model.zeros_like();
            backward_example(model, &cache, *label, scale, &mut g);
            Ok((loss(&cache.probabilities, *label), cache.probabilities, g))
        })
        .collect::<Result<_, NnetError>>()?;
    let mut total = model.zeros_like();
    let mut loss_sum = 0.0;
    let mut probs = Vec::with_capacity(batch.len());
    for (l, p, g) in &per_example {
        loss_sum += l;
        probs.push(*p);
        total.add_scaled(g, 1.0);
    }
    Ok((loss_sum * scale, probs, total))
}

/// Mean loss over a batch without gradients.
pub fn batch_loss<R: AsRef<[f64]> + Sync>(model: &BiLstmModel, batch: &[(&[R], usize)]) -> Result<f64, NnetError> {
    let losses: Vec<f64> = batch
        .par_iter()
        .map(|(xs, label)| forward(model, xs).map(|c| loss(&c.probabilities, *label)))
        .collect::<Result<_, _>>()?;
    Ok(losses.iter().sum::<f64>() / batch.len() as f64)
}
