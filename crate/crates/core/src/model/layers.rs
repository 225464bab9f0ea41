//! The building blocks of the network, each recorded on a caller-owned tape.

use std::sync::Arc;

use rand::Rng;

use super::{Activation, ModelError, Pooling};
use crate::frontend::PAD_INDEX;
use crate::tensor::{SparseMatrix, Tape, Var};

/// One LSTM direction's parameters.
#[derive(Clone, Copy, Debug)]
pub struct LstmWeights {
    /// `[input, 4h]`, gate blocks in the order input, forget, output, candidate.
    pub w_x: Var,
    /// `[h, 4h]`
    pub w_h: Var,
    /// `[1, 4h]`
    pub b: Var,
}

/// Learned Q/K/V maps, only present in the projected attention variant.
#[derive(Clone, Copy, Debug)]
pub struct Projections {
    pub wq: Var,
    pub wk: Var,
    pub wv: Var,
}

/// Looks up each index in `table`; PAD rows are zero and never trained.
pub fn embed(tape: &mut Tape, table: Var, indices: &[usize]) -> Result<Var, ModelError> {
    let rows = tape.shape(table)[0];
    if let Some(&index) = indices.iter().find(|&&i| i >= rows) {
        return Err(ModelError::IndexOutOfVocab { index, vocab: rows });
    }
    Ok(tape.embedding(table, indices, Some(PAD_INDEX))?)
}

/// Scaled dot-product attention with the heads splitting `d` into
/// contiguous slices. Keys at or beyond `valid` get zero weight.
#[allow(clippy::too_many_arguments)]
pub fn self_attention(
    tape: &mut Tape,
    x: Var,
    valid: usize,
    heads: usize,
    dropout: f64,
    projections: Option<Projections>,
    training: bool,
    rng: &mut impl Rng,
) -> Result<Var, ModelError> {
    let d = tape.shape(x)[1];
    if heads == 0 || !d.is_multiple_of(heads) {
        return Err(ModelError::InvalidConfig(format!(
            "{d} columns over {heads} heads"
        )));
    }
    let (q, k, v) = match projections {
        None => (x, x, x),
        Some(p) => (
            tape.matmul(x, p.wq)?,
            tape.matmul(x, p.wk)?,
            tape.matmul(x, p.wv)?,
        ),
    };
    let dk = d / heads;
    let scale = 1.0 / (dk as f64).sqrt();
    let mut outputs = Vec::with_capacity(heads);
    for head in 0..heads {
        let cols = head * dk..(head + 1) * dk;
        let qh = tape.slice(q, 1, cols.clone())?;
        let kh = if projections.is_none() {
            qh
        } else {
            tape.slice(k, 1, cols.clone())?
        };
        let vh = if projections.is_none() {
            qh
        } else {
            tape.slice(v, 1, cols)?
        };
        let kt = tape.transpose(kh)?;
        let scores = tape.matmul(qh, kt)?;
        let scores = tape.scale(scores, scale);
        let weights = tape.masked_softmax(scores, valid)?;
        let weights = tape.dropout(weights, dropout, training, rng)?;
        outputs.push(tape.matmul(weights, vh)?);
    }
    if outputs.len() == 1 {
        return Ok(outputs[0]);
    }
    Ok(tape.concat(&outputs, 1)?)
}

/// Hidden states of one LSTM direction over the first `steps` rows of `x`,
/// returned in time order as `[steps, h]`.
pub fn lstm_direction(
    tape: &mut Tape,
    x: Var,
    steps: usize,
    weights: LstmWeights,
    backward: bool,
) -> Result<Var, ModelError> {
    if steps == 0 {
        return Err(ModelError::EmptySequence);
    }
    let h = tape.shape(weights.w_h)[0];
    let x = if tape.shape(x)[0] == steps {
        x
    } else {
        tape.slice(x, 0, 0..steps)?
    };
    let projected = tape.matmul(x, weights.w_x)?;
    let projected = tape.add(projected, weights.b)?;

    let mut states: Vec<Option<Var>> = vec![None; steps];
    let mut prev: Option<(Var, Var)> = None;
    let order: Box<dyn Iterator<Item = usize>> = if backward {
        Box::new((0..steps).rev())
    } else {
        Box::new(0..steps)
    };
    for t in order {
        let mut z = tape.slice(projected, 0, t..t + 1)?;
        if let Some((h_prev, _)) = prev {
            let recurrent = tape.matmul(h_prev, weights.w_h)?;
            z = tape.add(z, recurrent)?;
        }
        let gate = |tape: &mut Tape, k: usize| tape.slice(z, 1, k * h..(k + 1) * h);
        let i = gate(tape, 0)?;
        let i = tape.sigmoid(i);
        let f = gate(tape, 1)?;
        let f = tape.sigmoid(f);
        let o = gate(tape, 2)?;
        let o = tape.sigmoid(o);
        let c_hat = gate(tape, 3)?;
        let c_hat = tape.tanh(c_hat);
        let mut c = tape.mul(i, c_hat)?;
        if let Some((_, c_prev)) = prev {
            let kept = tape.mul(f, c_prev)?;
            c = tape.add(kept, c)?;
        }
        let c_act = tape.tanh(c);
        let h_t = tape.mul(o, c_act)?;
        states[t] = Some(h_t);
        prev = Some((h_t, c));
    }
    let states: Vec<Var> = states
        .into_iter()
        .map(|s| s.expect("every step visited"))
        .collect();
    Ok(tape.concat(&states, 0)?)
}

/// Stacked bidirectional LSTM over the first `steps` rows. Returns the top
/// layer's final forward state followed by its final backward state,
/// `[1, 2h]`.
pub fn bilstm_encode(
    tape: &mut Tape,
    x: Var,
    steps: usize,
    layers: &[(LstmWeights, LstmWeights)],
    dropout: f64,
    training: bool,
    rng: &mut impl Rng,
) -> Result<Var, ModelError> {
    let mut input = x;
    let mut last = None;
    for (l, (fw, bw)) in layers.iter().enumerate() {
        if l > 0 {
            input = tape.dropout(input, dropout, training, rng)?;
        }
        let forward = lstm_direction(tape, input, steps, *fw, false)?;
        let backward = lstm_direction(tape, input, steps, *bw, true)?;
        last = Some((forward, backward));
        if l + 1 < layers.len() {
            input = tape.concat(&[forward, backward], 1)?;
        }
    }
    let (forward, backward) = last.ok_or(ModelError::InvalidConfig("no LSTM layers".into()))?;
    let fw_final = tape.slice(forward, 0, steps - 1..steps)?;
    let bw_final = tape.slice(backward, 0, 0..1)?;
    Ok(tape.concat(&[fw_final, bw_final], 1)?)
}

fn activate(tape: &mut Tape, x: Var, activation: Activation) -> Var {
    match activation {
        Activation::Relu => tape.relu(x),
        Activation::Sigmoid => tape.sigmoid(x),
        Activation::Tanh => tape.tanh(x),
    }
}

/// Graph convolutions over the real nodes: `H1 = act(A onehot(kinds) W0)`,
/// then `H(l+1) = act(A H(l) W(l))`. `adj` is the normalized adjacency of
/// the `kinds.len()` real nodes. Returns `[kinds.len(), d_out]`.
pub fn gcn_forward(
    tape: &mut Tape,
    adj: &Arc<SparseMatrix>,
    kinds: &[usize],
    weights: &[Var],
    activation: Activation,
) -> Result<Var, ModelError> {
    let first = *weights
        .first()
        .ok_or(ModelError::InvalidConfig("no GCN layers".into()))?;
    if kinds.is_empty() {
        return Err(ModelError::ZeroNodes);
    }
    // A one-hot row times W0 is just the matching row of W0.
    let mut h = embed(tape, first, kinds)?;
    for (l, &w) in weights.iter().enumerate() {
        if l > 0 {
            h = tape.matmul(h, w)?;
        }
        let propagated = tape.spmm(Arc::clone(adj), h)?;
        h = activate(tape, propagated, activation);
    }
    Ok(h)
}

/// Pools the first `node_count` rows of `h` into `[1, d_out]`.
pub fn graph_pool(
    tape: &mut Tape,
    h: Var,
    node_count: usize,
    pooling: Pooling,
) -> Result<Var, ModelError> {
    if node_count == 0 {
        return Err(ModelError::ZeroNodes);
    }
    let rows = if tape.shape(h)[0] == node_count {
        h
    } else {
        tape.slice(h, 0, 0..node_count)?
    };
    Ok(match pooling {
        Pooling::Mean => tape.mean_rows(rows)?,
        Pooling::Sum => tape.sum_rows(rows)?,
    })
}

/// Sequence features first, then graph features.
pub fn fuse(tape: &mut Tape, h_sast: Var, h_gast: Var) -> Result<Var, ModelError> {
    Ok(tape.concat(&[h_sast, h_gast], 1)?)
}

/// `softmax(h W + b)` as `[1, k]`.
pub fn classify(tape: &mut Tape, h_code: Var, w: Var, b: Var) -> Result<Var, ModelError> {
    let logits = tape.matmul(h_code, w)?;
    let logits = tape.add(logits, b)?;
    Ok(tape.softmax(logits))
}
