use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::record::Class;

fn tiny(kernel: usize) -> ModelConfig {
    ModelConfig {
        vocab_size: 10,
        seq_len: 8,
        embed_dim: 4,
        conv_filters: 3,
        conv_kernel: kernel,
        dropout: 0.2,
        pool_size: 2,
        lstm_units: 4,
        text_dense: 5,
        meta_dense: 3,
        head_dense: 4,
        n_classes: 3,
        metadata_dim: 3,
    }
}

struct Owned {
    tokens: Vec<u32>,
    meta: Vec<f64>,
    label: usize,
}

fn random_examples(cfg: &ModelConfig, n: usize, seed: u64) -> Vec<Owned> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Owned {
            tokens: (0..cfg.seq_len)
                .map(|_| rng.gen_range(0..cfg.embedding_rows() as u32))
                .collect(),
            meta: (0..cfg.metadata_dim)
                .map(|_| rng.gen_range(-1.5..1.5))
                .collect(),
            label: i % 3,
        })
        .collect()
}

fn as_samples(ex: &[Owned]) -> Vec<Sample<'_, f64>> {
    ex.iter()
        .map(|e| Sample {
            tokens: &e.tokens,
            metadata: &e.meta,
            label: e.label,
        })
        .collect()
}

fn mean_loss(p: &ModelParams<f64>, batch: &[Sample<'_, f64>], seeds: &[Option<u64>]) -> f64 {
    let mut s = 0.0;
    for (x, seed) in batch.iter().zip(seeds) {
        let probs = forward(p, x.tokens, x.metadata, *seed).unwrap();
        s += cross_entropy(&probs, x.label);
    }
    s / batch.len() as f64
}

/// Central differences against the analytic gradient, every parameter.
fn gradient_check(cfg: ModelConfig, seeds: &[Option<u64>], content: &[usize]) -> f64 {
    let mut p = ModelParams::<f64>::init(cfg, 21).unwrap();
    let mut ex = random_examples(&cfg, seeds.len(), 4);
    for (e, &n) in ex.iter_mut().zip(content) {
        e.tokens[n..].iter_mut().for_each(|t| *t = 0);
    }
    let batch = as_samples(&ex);
    let mut g = p.zeros_like();
    batch_gradient(&p, &batch, seeds, &mut g).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for ti in 0..TENSOR_NAMES.len() {
        for j in 0..p.tensors()[ti].len() {
            let orig = p.tensors()[ti].data[j];
            p.tensors_mut()[ti].data[j] = orig + h;
            let up = mean_loss(&p, &batch, seeds);
            p.tensors_mut()[ti].data[j] = orig - h;
            let down = mean_loss(&p, &batch, seeds);
            p.tensors_mut()[ti].data[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = g.tensors()[ti].data[j];
            // Relative error with a floor so that near-zero gradients are
            // judged on absolute error.
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            let rel = (analytic - numeric).abs() / denom;
            assert!(
                rel < 1e-4,
                "{}[{j}]: analytic {analytic:e} numeric {numeric:e}",
                TENSOR_NAMES[ti]
            );
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    gradient_check(tiny(3), &[None, None, None], &[]);
}

#[test]
fn gradients_match_with_dropout() {
    gradient_check(tiny(3), &[Some(1), Some(2), Some(3)], &[]);
}

#[test]
fn gradients_match_single_lstm_step() {
    gradient_check(tiny(6), &[Some(9), None], &[]);
}

#[test]
fn gradients_match_with_tail_padding() {
    gradient_check(tiny(3), &[None, Some(5), None, Some(6)], &[0, 1, 3, 5]);
}

#[test]
fn lstm_skips_pure_padding_windows() {
    assert_eq!(lstm_steps(&[4, 5, 6, 0, 0, 0, 0, 0], 2, 3), 2);
    assert_eq!(lstm_steps(&[4, 0, 6, 0, 0, 0, 0, 0], 2, 3), 2);
    assert_eq!(lstm_steps(&[0; 8], 2, 3), 1);
    assert_eq!(lstm_steps(&[1; 8], 2, 3), 3);
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 3).unwrap();
    let meta = [0.1, 0.2, 0.3];
    let a = forward(&p, &[7, 8, 9, 0, 0, 0, 0, 0], &meta, None).unwrap();
    let b = forward(&p, &[7, 8, 9, 0, 0, 0, 0, 0], &meta, None).unwrap();
    assert_eq!(a, b);
    let cache = forward_cached(&p, &[7, 8, 9, 0, 0, 0, 0, 0], &meta, None).unwrap();
    assert_eq!(cache.steps, 2);
}

#[test]
fn zero_weights_give_uniform() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::zeros(cfg).unwrap();
    let ex = random_examples(&cfg, 1, 0);
    let probs = forward(&p, &ex[0].tokens, &ex[0].meta, Some(3)).unwrap();
    for v in probs {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn reference_model_shapes() {
    let cfg = ModelConfig::new(30, 22);
    let p = ModelParams::<f32>::init(cfg, 0).unwrap();
    let tokens = vec![1u32; 100];
    let cache = forward_cached(&p, &tokens, &[0.0; 22], None).unwrap();
    assert_eq!(cache.conv.len(), 95 * 128);
    assert_eq!(cache.pooled.len(), 47 * 128);
    assert_eq!(cache.hidden.len(), 47 * 32);
    assert_eq!(cache.concat.len(), 32);
    assert_eq!(cache.probs.len(), 3);
}

#[test]
fn shape_errors() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 0).unwrap();
    assert!(forward(&p, &[1; 7], &[0.0; 3], None).is_err());
    assert!(forward(&p, &[1; 8], &[0.0; 2], None).is_err());
    assert!(forward(&p, &[12; 8], &[0.0; 3], None).is_err());
}

#[test]
fn non_finite_input_is_numeric_error() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 0).unwrap();
    let err = forward(&p, &[1; 8], &[f64::NAN, 0.0, 0.0], None).unwrap_err();
    assert_eq!(err.kind(), crate::ErrorKind::Numeric);
}

#[test]
fn inference_is_deterministic_and_dropout_is_seeded() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 5).unwrap();
    let ex = random_examples(&cfg, 1, 2);
    let a = forward(&p, &ex[0].tokens, &ex[0].meta, None).unwrap();
    let b = forward(&p, &ex[0].tokens, &ex[0].meta, None).unwrap();
    assert_eq!(a, b);
    let c = forward(&p, &ex[0].tokens, &ex[0].meta, Some(8)).unwrap();
    let d = forward(&p, &ex[0].tokens, &ex[0].meta, Some(8)).unwrap();
    assert_eq!(c, d);
}

#[test]
fn loss_values() {
    assert!(cross_entropy(&[1.0f64, 0.0, 0.0], 0).abs() < 1e-12);
    assert!((cross_entropy(&[1.0 / 3.0; 3], 2) - 3f64.ln()).abs() < 1e-12);
    assert!((cross_entropy(&[0.7f64, 0.2, 0.1], 1) - 1.6094).abs() < 1e-4);
    assert!((cross_entropy(&[1.0f64, 0.0, 0.0], 1) - 1e-12f64.ln().abs()).abs() < 1e-9);
}

#[test]
fn argmax_ties_low() {
    assert_eq!(argmax(&[0.6, 0.3, 0.1]), 0);
    assert_eq!(argmax(&[0.5, 0.5, 0.0]), 0);
    assert_eq!(argmax(&[0.2, 0.3, 0.5]), 2);
}

#[test]
fn saturated_batch_has_tiny_gradient() {
    let cfg = tiny(3);
    let mut p = ModelParams::<f64>::zeros(cfg).unwrap();
    p.out_b.data = vec![60.0, 0.0, 0.0];
    let ex: Vec<Owned> = random_examples(&cfg, 4, 1)
        .into_iter()
        .map(|e| Owned { label: 0, ..e })
        .collect();
    let batch = as_samples(&ex);
    let mut g = p.zeros_like();
    let loss = batch_gradient(&p, &batch, &[None; 4], &mut g).unwrap();
    assert!(loss < 1e-20);
    assert!(g.sq_norm().sqrt() < 1e-6);
}

#[test]
fn duplicated_batch_same_mean_gradient() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 2).unwrap();
    let ex = random_examples(&cfg, 3, 6);
    let once = as_samples(&ex);
    let twice: Vec<_> = once.iter().chain(once.iter()).copied().collect();
    let mut g1 = p.zeros_like();
    let mut g2 = p.zeros_like();
    let l1 = batch_gradient(&p, &once, &[Some(1), Some(2), Some(3)], &mut g1).unwrap();
    let l2 = batch_gradient(
        &p,
        &twice,
        &[Some(1), Some(2), Some(3), Some(1), Some(2), Some(3)],
        &mut g2,
    )
    .unwrap();
    assert!((l1 - l2).abs() < 1e-12);
    for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}

/// Three well separated classes: class-specific token ranges and a metadata
/// coordinate that points at the class.
fn separable(cfg: &ModelConfig, n: usize, seed: u64) -> Vec<Owned> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = (cfg.vocab_size / 3) as u32;
    (0..n)
        .map(|i| {
            let label = i % 3;
            let lo = 1 + label as u32 * per;
            Owned {
                tokens: (0..cfg.seq_len)
                    .map(|_| rng.gen_range(lo..lo + per))
                    .collect(),
                meta: (0..cfg.metadata_dim)
                    .map(|j| if j == label { 2.0 } else { -1.0 } + rng.gen_range(-0.3..0.3))
                    .collect(),
                label,
            }
        })
        .collect()
}

fn toy_config() -> ModelConfig {
    ModelConfig {
        vocab_size: 30,
        seq_len: 20,
        embed_dim: 16,
        metadata_dim: 3,
        ..ModelConfig::new(30, 3)
    }
}

fn accuracy(p: &ModelParams<f64>, ex: &[Owned]) -> f64 {
    let ok = ex
        .iter()
        .filter(|e| predict(p, &e.tokens, &e.meta).unwrap().index() == e.label)
        .count();
    ok as f64 / ex.len() as f64
}

#[test]
fn learns_separable_toy_set() {
    let cfg = toy_config();
    let ex = separable(&cfg, 100, 3);
    // 100 examples at batch 32 give only 40 updates in 10 epochs.
    let tc = TrainConfig {
        seed: 11,
        batch_size: 16,
        epochs: 10,
        ..TrainConfig::default()
    };
    let (p, hist) = train(&as_samples(&ex), cfg, &tc).unwrap();
    assert_eq!(hist.epoch_loss.len(), 10);
    let acc = accuracy(&p, &ex);

    assert!(acc >= 0.95, "training accuracy {acc}");
}

#[test]
fn early_loss_non_increasing_majority() {
    let cfg = toy_config();
    let ex = separable(&cfg, 100, 8);
    let mut good = 0;
    for seed in 0..3 {
        let tc = TrainConfig {
            seed,
            epochs: 3,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let (_, h) = train(&as_samples(&ex), cfg, &tc).unwrap();
        if h.epoch_loss.windows(2).all(|w| w[1] <= w[0]) {
            good += 1;
        }
    }
    assert!(good >= 2);
}

#[test]
fn zero_epochs_and_determinism() {
    let cfg = tiny(3);
    let ex = random_examples(&cfg, 10, 1);
    let s = as_samples(&ex);
    let tc = TrainConfig {
        epochs: 0,
        seed: 4,
        ..TrainConfig::default()
    };
    let (p0, h) = train(&s, cfg, &tc).unwrap();
    assert!(h.epoch_loss.is_empty());
    assert_eq!(p0, ModelParams::init(cfg, 4).unwrap());
    let tc = TrainConfig {
        epochs: 2,
        batch_size: 3,
        ..tc
    };
    let (a, _) = train(&s, cfg, &tc).unwrap();
    let (b, _) = train(&s, cfg, &tc).unwrap();
    for (x, y) in a.tensors().iter().zip(b.tensors()) {
        assert!(x
            .data
            .iter()
            .zip(&y.data)
            .all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    assert!(train::<f64>(&[], cfg, &tc).is_err());
}

#[test]
fn golden_prediction() {
    let cfg = tiny(3);
    let p = ModelParams::<f64>::init(cfg, 2024).unwrap();
    let tokens = [1, 2, 3, 4, 5, 6, 0, 0];
    let meta = [0.5, -1.0, 2.0];
    let probs = forward(&p, &tokens, &meta, None).unwrap();
    let label = predict(&p, &tokens, &meta).unwrap();
    assert_eq!(label, GOLDEN_LABEL, "{probs:?}");
    let golden = [0.3606546382526571, 0.33557489072245594, 0.30377047102488697];
    for (a, b) in probs.iter().zip(golden) {
        assert!((a - b).abs() < 1e-12, "{probs:?}");
    }
}

const GOLDEN_LABEL: Class = Class::Bot;

fn saved<F: Float>(seed: u64) -> SavedModel<F> {
    let cfg = tiny(3);
    let rows = vec![vec![1.0, 2.0, 3.0], vec![0.3, 7.0, 1.0 / 3.0]];
    SavedModel {
        params: ModelParams::<F>::init(cfg, seed).unwrap(),
        normalizer: Normalizer::fit(&rows, &[1]).unwrap(),
        vocab_sha256: "ab".repeat(32),
    }
}

#[test]
fn model_file_roundtrip() {
    let m64 = saved::<f64>(3);
    let bytes = m64.to_bytes().unwrap();
    assert_eq!(&bytes[..8], MAGIC);
    assert_eq!(SavedModel::<f64>::from_bytes(&bytes).unwrap(), m64);
    assert!(SavedModel::<f32>::from_bytes(&bytes).is_err());
    assert!(SavedModel::<f64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(SavedModel::<f64>::from_bytes(&extra).is_err());

    let m32 = saved::<f32>(3);
    let back = SavedModel::<f32>::from_bytes(&m32.to_bytes().unwrap()).unwrap();
    for (a, b) in back.params.tensors().iter().zip(m32.params.tensors()) {
        assert!(a
            .data
            .iter()
            .zip(&b.data)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

use crate::num::Float;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn softmax_is_a_distribution(seed in any::<u64>(), drop in any::<bool>()) {
        let cfg = tiny(3);
        let p = ModelParams::<f64>::init(cfg, seed).unwrap();
        let ex = random_examples(&cfg, 1, seed ^ 1);
        let probs = forward(&p, &ex[0].tokens, &ex[0].meta, drop.then_some(seed)).unwrap();
        let s: f64 = probs.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(probs.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn softmax_stable_for_large_logits(a in -1e4f64..1e4, b in -1e4f64..1e4, c in -1e4f64..1e4) {
        let p = softmax(&[a, b, c]);
        prop_assert!(p.iter().all(|v| v.is_finite()));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
