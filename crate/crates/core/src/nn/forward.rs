use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::ModelParams;
use super::tensor::Tensor;
use crate::num::{dot, Float};
use crate::{Error, Result};

pub const PROB_FLOOR: f64 = 1e-12;

/// Intermediate activations of one example, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache<F> {
    pub ids: Vec<usize>,
    /// `seq_len x embed_dim`
    pub emb: Vec<F>,
    /// Convolution output after ReLU, `conv_len x filters`.
    pub conv: Vec<F>,
    /// Inverted-dropout multipliers (0 or `1/(1-p)`), absent at inference.
    pub mask: Option<Vec<F>>,
    /// `pooled_len x filters`
    pub pooled: Vec<F>,
    /// Time index in the convolution output that won each pool window.
    pub argmax: Vec<usize>,
    /// LSTM step inputs `[x_t; h_{t-1}]`, `pooled_len x (filters + units)`.
    pub xh: Vec<F>,
    /// Activated gates `i, f, g, o` per step, `pooled_len x 4 units`.
    pub gates: Vec<F>,
    /// Number of LSTM steps actually run; pooled steps whose window holds
    /// only tail padding are skipped.
    pub steps: usize,
    pub cells: Vec<F>,
    pub hidden: Vec<F>,
    pub text: Vec<F>,
    pub meta_in: Vec<F>,
    pub meta: Vec<F>,
    pub concat: Vec<F>,
    pub head: Vec<F>,
    pub logits: Vec<F>,
    pub probs: Vec<F>,
}

#[inline]
pub(crate) fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `w x + b`, optionally through ReLU. `w` is `[out, in]`.
pub(crate) fn dense<F: Float>(w: &Tensor<F>, b: &Tensor<F>, x: &[F], relu: bool) -> Vec<F> {
    (0..w.shape[0])
        .map(|j| {
            let z = dot(w.row(j), x) + b.data[j];
            if relu && z < F::zero() {
                F::zero()
            } else {
                z
            }
        })
        .collect()
}

pub fn softmax<F: Float>(logits: &[F]) -> Vec<F> {
    let m = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let e: Vec<F> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: F = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Categorical cross-entropy of `probs` against class `label`, with the
/// probability clamped to `[1e-12, 1]`.
pub fn cross_entropy<F: Float>(probs: &[F], label: usize) -> F {
    let p = probs[label].max(F::lit(PROB_FLOOR)).min(F::one());
    -p.ln()
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax<F: Float>(probs: &[F]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Pooled steps that see at least one token before the tail padding, never
/// fewer than one.
pub fn lstm_steps(ids: &[usize], pool: usize, pooled_len: usize) -> usize {
    let content = ids.iter().rposition(|&id| id != 0).map_or(0, |i| i + 1);
    content.div_ceil(pool).clamp(1, pooled_len)
}

fn check_inputs<F: Float>(p: &ModelParams<F>, tokens: &[u32], metadata: &[F]) -> Result<()> {
    let c = &p.config;
    if tokens.len() != c.seq_len {
        return Err(Error::Shape(format!(
            "expected {} token ids, got {}",
            c.seq_len,
            tokens.len()
        )));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t as usize >= c.embedding_rows()) {
        return Err(Error::Shape(format!(
            "token id {bad} outside embedding table of {} rows",
            c.embedding_rows()
        )));
    }
    if metadata.len() != c.metadata_dim {
        return Err(Error::Shape(format!(
            "expected {} metadata values, got {}",
            c.metadata_dim,
            metadata.len()
        )));
    }
    Ok(())
}

/// Full forward pass. `dropout_seed` switches on training-mode dropout with
/// a mask drawn from that seed; `None` is inference.
pub fn forward_cached<F: Float>(
    p: &ModelParams<F>,
    tokens: &[u32],
    metadata: &[F],
    dropout_seed: Option<u64>,
) -> Result<Cache<F>> {
    check_inputs(p, tokens, metadata)?;
    let c = &p.config;
    let (l, e, k, nf, h) = (
        c.seq_len,
        c.embed_dim,
        c.conv_kernel,
        c.conv_filters,
        c.lstm_units,
    );
    let t_len = c.conv_len();
    let p_len = c.pooled_len();

    let ids: Vec<usize> = tokens.iter().map(|&t| t as usize).collect();
    let mut emb = Vec::with_capacity(l * e);
    for &id in &ids {
        emb.extend_from_slice(p.embedding.row(id));
    }

    let mut conv = vec![F::zero(); t_len * nf];
    for t in 0..t_len {
        let window = &emb[t * e..(t + k) * e];
        let out = &mut conv[t * nf..(t + 1) * nf];
        for (f, o) in out.iter_mut().enumerate() {
            let z = dot(p.conv_w.row(f), window) + p.conv_b.data[f];
            *o = z.max(F::zero());
        }
    }

    let mask = match dropout_seed {
        Some(seed) if c.dropout > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = F::lit(1.0 / (1.0 - c.dropout));
            Some(
                (0..conv.len())
                    .map(|_| {
                        if rng.gen::<f64>() < c.dropout {
                            F::zero()
                        } else {
                            keep
                        }
                    })
                    .collect::<Vec<F>>(),
            )
        }
        _ => None,
    };
    let dropped: Vec<F> = match &mask {
        Some(m) => conv.iter().zip(m).map(|(&a, &b)| a * b).collect(),
        None => conv.clone(),
    };

    let s = c.pool_size;
    let mut pooled = vec![F::zero(); p_len * nf];
    let mut argmax_t = vec![0usize; p_len * nf];
    for q in 0..p_len {
        for f in 0..nf {
            let mut bt = q * s;
            for t in q * s + 1..q * s + s {
                if dropped[t * nf + f] > dropped[bt * nf + f] {
                    bt = t;
                }
            }
            pooled[q * nf + f] = dropped[bt * nf + f];
            argmax_t[q * nf + f] = bt;
        }
    }

    let steps = lstm_steps(&ids, s, p_len);
    let w_in = nf + h;
    let mut xh = vec![F::zero(); p_len * w_in];
    let mut gates = vec![F::zero(); p_len * 4 * h];
    let mut cells = vec![F::zero(); p_len * h];
    let mut hidden = vec![F::zero(); p_len * h];
    for t in 0..steps {
        {
            let row = &mut xh[t * w_in..(t + 1) * w_in];
            row[..nf].copy_from_slice(&pooled[t * nf..(t + 1) * nf]);
            if t > 0 {
                row[nf..].copy_from_slice(&hidden[(t - 1) * h..t * h]);
            }
        }
        let x = &xh[t * w_in..(t + 1) * w_in];
        let g = &mut gates[t * 4 * h..(t + 1) * 4 * h];
        for (r, gv) in g.iter_mut().enumerate() {
            let z = dot(p.lstm_w.row(r), x) + p.lstm_b.data[r];
            *gv = if (2 * h..3 * h).contains(&r) {
                z.tanh()
            } else {
                sigmoid(z)
            };
        }
        for u in 0..h {
            let c_prev = if t > 0 {
                cells[(t - 1) * h + u]
            } else {
                F::zero()
            };
            let cv = g[h + u] * c_prev + g[u] * g[2 * h + u];
            cells[t * h + u] = cv;
            hidden[t * h + u] = g[3 * h + u] * cv.tanh();
        }
    }

    let last = &hidden[(steps - 1) * h..steps * h];
    let text = dense(&p.text_w, &p.text_b, last, true);
    let meta = dense(&p.meta_w, &p.meta_b, metadata, true);
    let mut concat = text.clone();
    concat.extend_from_slice(&meta);
    let head = dense(&p.head_w, &p.head_b, &concat, true);
    let logits = dense(&p.out_w, &p.out_b, &head, false);
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite logits".into()));
    }
    let probs = softmax(&logits);

    Ok(Cache {
        ids,
        emb,
        conv,
        mask,
        pooled,
        argmax: argmax_t,
        xh,
        gates,
        steps,
        cells,
        hidden,
        text,
        meta_in: metadata.to_vec(),
        meta,
        concat,
        head,
        logits,
        probs,
    })
}

/// Class probabilities.
pub fn forward<F: Float>(
    p: &ModelParams<F>,
    tokens: &[u32],
    metadata: &[F],
    dropout_seed: Option<u64>,
) -> Result<Vec<F>> {
    Ok(forward_cached(p, tokens, metadata, dropout_seed)?.probs)
}
