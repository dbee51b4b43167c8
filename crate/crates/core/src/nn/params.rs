use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::tensor::Tensor;
use crate::num::Float;
use crate::Result;

pub const TENSOR_NAMES: [&str; 13] = [
    "embedding",
    "conv_w",
    "conv_b",
    "lstm_w",
    "lstm_b",
    "text_w",
    "text_b",
    "meta_w",
    "meta_b",
    "head_w",
    "head_b",
    "out_w",
    "out_b",
];

/// All trainable weights. Dense weights are stored `[out, in]`.
///
/// * `conv_w` is `[filters, kernel * embed]`: one filter's weights over a
///   window of consecutive embedding rows, laid out time-major.
/// * `lstm_w` is `[4 * units, filters + units]`, gate blocks in the order
///   input, forget, cell, output, each row acting on `[x_t; h_{t-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub config: ModelConfig,
    pub embedding: Tensor<F>,
    pub conv_w: Tensor<F>,
    pub conv_b: Tensor<F>,
    pub lstm_w: Tensor<F>,
    pub lstm_b: Tensor<F>,
    pub text_w: Tensor<F>,
    pub text_b: Tensor<F>,
    pub meta_w: Tensor<F>,
    pub meta_b: Tensor<F>,
    pub head_w: Tensor<F>,
    pub head_b: Tensor<F>,
    pub out_w: Tensor<F>,
    pub out_b: Tensor<F>,
}

impl<F: Float> ModelParams<F> {
    pub fn shapes(c: &ModelConfig) -> [Vec<usize>; 13] {
        let h = c.lstm_units;
        [
            vec![c.embedding_rows(), c.embed_dim],
            vec![c.conv_filters, c.conv_kernel * c.embed_dim],
            vec![c.conv_filters],
            vec![4 * h, c.conv_filters + h],
            vec![4 * h],
            vec![c.text_dense, h],
            vec![c.text_dense],
            vec![c.meta_dense, c.metadata_dim],
            vec![c.meta_dense],
            vec![c.head_dense, c.text_dense + c.meta_dense],
            vec![c.head_dense],
            vec![c.n_classes, c.head_dense],
            vec![c.n_classes],
        ]
    }

    /// Fan-in used by the initializer for each tensor, in name order.
    fn fan_ins(c: &ModelConfig) -> [usize; 13] {
        let h = c.lstm_units;
        let td = c.text_dense + c.meta_dense;
        [
            c.embed_dim,
            c.conv_kernel * c.embed_dim,
            c.conv_kernel * c.embed_dim,
            c.conv_filters + h,
            c.conv_filters + h,
            h,
            h,
            c.metadata_dim,
            c.metadata_dim,
            td,
            td,
            c.head_dense,
            c.head_dense,
        ]
    }

    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let s = Self::shapes(&config);
        Ok(Self {
            config,
            embedding: Tensor::zeros(&s[0]),
            conv_w: Tensor::zeros(&s[1]),
            conv_b: Tensor::zeros(&s[2]),
            lstm_w: Tensor::zeros(&s[3]),
            lstm_b: Tensor::zeros(&s[4]),
            text_w: Tensor::zeros(&s[5]),
            text_b: Tensor::zeros(&s[6]),
            meta_w: Tensor::zeros(&s[7]),
            meta_b: Tensor::zeros(&s[8]),
            head_w: Tensor::zeros(&s[9]),
            head_b: Tensor::zeros(&s[10]),
            out_w: Tensor::zeros(&s[11]),
            out_b: Tensor::zeros(&s[12]),
        })
    }

    /// Every value uniform in `±1/sqrt(fan_in)`, drawn in tensor order from
    /// one seeded stream.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fans = Self::fan_ins(&config);
        for (t, fan) in p.tensors_mut().into_iter().zip(fans) {
            let bound = 1.0 / (fan as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for v in t.data.iter_mut() {
                *v = F::lit(dist.sample(&mut rng));
            }
        }
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.config).expect("config already validated")
    }

    pub fn tensors(&self) -> [&Tensor<F>; 13] {
        [
            &self.embedding,
            &self.conv_w,
            &self.conv_b,
            &self.lstm_w,
            &self.lstm_b,
            &self.text_w,
            &self.text_b,
            &self.meta_w,
            &self.meta_b,
            &self.head_w,
            &self.head_b,
            &self.out_w,
            &self.out_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<F>; 13] {
        [
            &mut self.embedding,
            &mut self.conv_w,
            &mut self.conv_b,
            &mut self.lstm_w,
            &mut self.lstm_b,
            &mut self.text_w,
            &mut self.text_b,
            &mut self.meta_w,
            &mut self.meta_b,
            &mut self.head_w,
            &mut self.head_b,
            &mut self.out_w,
            &mut self.out_b,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    pub fn sq_norm(&self) -> F {
        self.tensors().iter().map(|t| t.sq_norm()).sum()
    }

    pub fn fill(&mut self, v: F) {
        for t in self.tensors_mut() {
            t.fill(v);
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: F, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            crate::num::axpy(alpha, &b.data, &mut a.data);
        }
    }
}
