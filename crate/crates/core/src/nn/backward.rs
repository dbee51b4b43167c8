use super::forward::{cross_entropy, forward_cached, Cache};
use super::params::ModelParams;
use crate::num::{axpy, Float};
use crate::Result;

/// Gradient of `scale * cross_entropy` for one cached example, accumulated
/// into `g`.
pub fn backward<F: Float>(
    p: &ModelParams<F>,
    cache: &Cache<F>,
    label: usize,
    scale: F,
    g: &mut ModelParams<F>,
) {
    let c = &p.config;
    let (e, k, nf, h) = (c.embed_dim, c.conv_kernel, c.conv_filters, c.lstm_units);
    let t_len = c.conv_len();
    let p_len = c.pooled_len();
    let zero = F::zero();
    let one = F::one();

    let dlogits: Vec<F> = cache
        .probs
        .iter()
        .enumerate()
        .map(|(i, &pr)| (pr - if i == label { one } else { zero }) * scale)
        .collect();

    // Output layer, then the fused head.
    let mut dhead = vec![zero; c.head_dense];
    for (j, &d) in dlogits.iter().enumerate() {
        axpy(d, &cache.head, g.out_w.row_mut(j));
        g.out_b.data[j] += d;
        axpy(d, p.out_w.row(j), &mut dhead);
    }
    relu_mask(&mut dhead, &cache.head);

    let mut dconcat = vec![zero; c.text_dense + c.meta_dense];
    for (j, &d) in dhead.iter().enumerate() {
        if d == zero {
            continue;
        }
        axpy(d, &cache.concat, g.head_w.row_mut(j));
        g.head_b.data[j] += d;
        axpy(d, p.head_w.row(j), &mut dconcat);
    }
    let (dtext, dmeta) = dconcat.split_at_mut(c.text_dense);
    relu_mask(dtext, &cache.text);
    relu_mask(dmeta, &cache.meta);

    for (j, &d) in dmeta.iter().enumerate() {
        axpy(d, &cache.meta_in, g.meta_w.row_mut(j));
        g.meta_b.data[j] += d;
    }

    let steps = cache.steps;
    let last = &cache.hidden[(steps - 1) * h..steps * h];
    let mut dh = vec![zero; h];
    for (j, &d) in dtext.iter().enumerate() {
        if d == zero {
            continue;
        }
        axpy(d, last, g.text_w.row_mut(j));
        g.text_b.data[j] += d;
        axpy(d, p.text_w.row(j), &mut dh);
    }

    // Backpropagation through time.
    let w_in = nf + h;
    let mut dc = vec![zero; h];
    let mut dz = vec![zero; 4 * h];
    let mut dxh = vec![zero; w_in];
    let mut dpooled = vec![zero; p_len * nf];
    for t in (0..steps).rev() {
        let gt = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        for u in 0..h {
            let (i, f, gg, o) = (gt[u], gt[h + u], gt[2 * h + u], gt[3 * h + u]);
            let cv = cache.cells[t * h + u];
            let c_prev = if t > 0 {
                cache.cells[(t - 1) * h + u]
            } else {
                zero
            };
            let tc = cv.tanh();
            let d_o = dh[u] * tc;
            let dcu = dc[u] + dh[u] * o * (one - tc * tc);
            dz[u] = dcu * gg * i * (one - i);
            dz[h + u] = dcu * c_prev * f * (one - f);
            dz[2 * h + u] = dcu * i * (one - gg * gg);
            dz[3 * h + u] = d_o * o * (one - o);
            dc[u] = dcu * f;
        }
        let x = &cache.xh[t * w_in..(t + 1) * w_in];
        dxh.iter_mut().for_each(|v| *v = zero);
        for (r, &d) in dz.iter().enumerate() {
            axpy(d, x, g.lstm_w.row_mut(r));
            g.lstm_b.data[r] += d;
            axpy(d, p.lstm_w.row(r), &mut dxh);
        }
        dpooled[t * nf..(t + 1) * nf].copy_from_slice(&dxh[..nf]);
        dh.copy_from_slice(&dxh[nf..]);
    }

    // Pool, dropout and ReLU.
    let mut dconv = vec![zero; t_len * nf];
    for (q, &d) in dpooled.iter().enumerate() {
        let f = q % nf;
        dconv[cache.argmax[q] * nf + f] += d;
    }
    if let Some(m) = &cache.mask {
        dconv.iter_mut().zip(m).for_each(|(d, &m)| *d *= m);
    }
    relu_mask(&mut dconv, &cache.conv);

    let mut demb = vec![zero; c.seq_len * e];
    for t in 0..t_len {
        let window = &cache.emb[t * e..(t + k) * e];
        for f in 0..nf {
            let d = dconv[t * nf + f];
            if d == zero {
                continue;
            }
            axpy(d, window, g.conv_w.row_mut(f));
            g.conv_b.data[f] += d;
            axpy(d, p.conv_w.row(f), &mut demb[t * e..(t + k) * e]);
        }
    }
    for (l, &id) in cache.ids.iter().enumerate() {
        axpy(one, &demb[l * e..(l + 1) * e], g.embedding.row_mut(id));
    }
}

fn relu_mask<F: Float>(d: &mut [F], activ: &[F]) {
    for (dv, &a) in d.iter_mut().zip(activ) {
        if a <= F::zero() {
            *dv = F::zero();
        }
    }
}

/// One training example: token ids, normalized metadata and class index.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a, F> {
    pub tokens: &'a [u32],
    pub metadata: &'a [F],
    pub label: usize,
}

/// Mean loss over `batch` with its gradient written into `grads` (which is
/// cleared first). `dropout_seeds[i]` drives the mask of example `i`.
pub fn batch_gradient<F: Float>(
    p: &ModelParams<F>,
    batch: &[Sample<'_, F>],
    dropout_seeds: &[Option<u64>],
    grads: &mut ModelParams<F>,
) -> Result<F> {
    grads.fill(F::zero());
    if batch.is_empty() {
        return Ok(F::zero());
    }
    let scale = F::one() / F::from_usize_lossy(batch.len());
    let mut loss = F::zero();
    for (s, seed) in batch.iter().zip(dropout_seeds) {
        let cache = forward_cached(p, s.tokens, s.metadata, *seed)?;
        loss += cross_entropy(&cache.probs, s.label);
        backward(p, &cache, s.label, scale, grads);
    }
    Ok(loss * scale)
}
