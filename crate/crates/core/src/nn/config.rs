use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Layer sizes. `vocab_size` counts real tokens; the embedding table has two
/// extra rows for padding and out-of-vocabulary ids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub seq_len: usize,
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub dropout: f64,
    /// Pool window; the stride equals the window.
    pub pool_size: usize,
    pub lstm_units: usize,
    pub text_dense: usize,
    pub meta_dense: usize,
    pub head_dense: usize,
    pub n_classes: usize,
    pub metadata_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::new(1, 1)
    }
}

impl ModelConfig {
    /// Reference architecture for a vocabulary and metadata width.
    pub fn new(vocab_size: usize, metadata_dim: usize) -> Self {
        Self {
            vocab_size,
            seq_len: 100,
            embed_dim: 64,
            conv_filters: 128,
            conv_kernel: 6,
            dropout: 0.2,
            pool_size: 2,
            lstm_units: 32,
            text_dense: 16,
            meta_dense: 16,
            head_dense: 16,
            n_classes: 3,
            metadata_dim,
        }
    }

    pub fn embedding_rows(&self) -> usize {
        self.vocab_size + 2
    }

    pub fn conv_len(&self) -> usize {
        self.seq_len + 1 - self.conv_kernel
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_len() / self.pool_size
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("seq_len", self.seq_len),
            ("embed_dim", self.embed_dim),
            ("conv_filters", self.conv_filters),
            ("conv_kernel", self.conv_kernel),
            ("pool_size", self.pool_size),
            ("lstm_units", self.lstm_units),
            ("text_dense", self.text_dense),
            ("meta_dense", self.meta_dense),
            ("head_dense", self.head_dense),
            ("metadata_dim", self.metadata_dim),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be positive")));
        }
        if self.n_classes != 3 {
            return Err(Error::invalid("the classifier has exactly 3 classes"));
        }
        if self.seq_len < self.conv_kernel {
            return Err(Error::invalid(
                "seq_len shorter than the convolution kernel",
            ));
        }
        if self.pooled_len() == 0 {
            return Err(Error::invalid("pooling leaves no time steps"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must be in [0, 1)"));
        }
        if self.vocab_size + 2 > u32::MAX as usize {
            return Err(Error::invalid("vocabulary too large"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 30,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("Adam betas must be in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("Adam epsilon must be positive"));
        }
        Ok(())
    }
}
