use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backward::{batch_gradient, Sample};
use super::config::{ModelConfig, TrainConfig};
use super::forward::{argmax, forward};
use super::params::ModelParams;
use crate::num::Float;
use crate::record::Class;
use crate::{Error, Result};

const SHUFFLE_STREAM: u64 = 0x5eed_0f5a_4d11;

/// Adam with bias correction folded into the step size.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    cfg: TrainConfig,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
    step: i32,
}

impl<F: Float> Adam<F> {
    pub fn new(params: &ModelParams<F>, cfg: TrainConfig) -> Self {
        let zeros: Vec<Vec<F>> = params
            .tensors()
            .iter()
            .map(|t| vec![F::zero(); t.len()])
            .collect();
        Self {
            cfg,
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut ModelParams<F>, grads: &ModelParams<F>) {
        self.step += 1;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let lr_t =
            self.cfg.learning_rate * (1.0 - b2.powi(self.step)).sqrt() / (1.0 - b1.powi(self.step));
        let (b1, b2, lr_t, eps) = (
            F::lit(b1),
            F::lit(b2),
            F::lit(lr_t),
            F::lit(self.cfg.epsilon),
        );
        let (c1, c2) = (F::one() - b1, F::one() - b2);
        for (i, (p, g)) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .enumerate()
        {
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for j in 0..p.data.len() {
                let gj = g.data[j];
                m[j] = b1 * m[j] + c1 * gj;
                v[j] = b2 * v[j] + c2 * gj * gj;
                p.data[j] -= lr_t * m[j] / (v[j].sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training-mode loss over each epoch's batches.
    pub epoch_loss: Vec<f64>,
}

/// Trains from a fresh seeded initialization.
pub fn train<F: Float>(
    data: &[Sample<'_, F>],
    model: ModelConfig,
    cfg: &TrainConfig,
) -> Result<(ModelParams<F>, TrainHistory)> {
    let params = ModelParams::init(model, cfg.seed)?;
    train_from(params, data, cfg)
}

/// Runs `cfg.epochs` epochs of shuffled mini-batch Adam from `params`.
pub fn train_from<F: Float>(
    mut params: ModelParams<F>,
    data: &[Sample<'_, F>],
    cfg: &TrainConfig,
) -> Result<(ModelParams<F>, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if let Some(s) = data.iter().find(|s| s.label >= params.config.n_classes) {
        return Err(Error::invalid(format!("label {} out of range", s.label)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_STREAM);
    let mut adam = Adam::new(&params, *cfg);
    let mut grads = params.zeros_like();
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut seeds = Vec::with_capacity(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            seeds.clear();
            for &i in chunk {
                batch.push(data[i]);
                seeds.push(Some(rng.gen::<u64>()));
            }
            let loss = batch_gradient(&params, &batch, &seeds, &mut grads)?;
            adam.update(&mut params, &grads);
            total += loss.as_f64();
            batches += 1;
        }
        if !params.is_finite() {
            return Err(Error::Numeric(format!(
                "weights diverged in epoch {}",
                epoch + 1
            )));
        }
        let mean = total / batches as f64;
        log::info!("epoch {}/{}: loss {mean:.4}", epoch + 1, cfg.epochs);
        history.epoch_loss.push(mean);
    }
    Ok((params, history))
}

pub fn predict<F: Float>(params: &ModelParams<F>, tokens: &[u32], metadata: &[F]) -> Result<Class> {
    let probs = forward(params, tokens, metadata, None)?;
    Ok(Class::from_index(argmax(&probs)).expect("three output classes"))
}
