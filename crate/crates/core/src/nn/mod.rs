//! Post classifier: token embedding, 1D convolution, dropout, max-pooling
//! and an LSTM for the text; a dense layer for the metadata; a fused dense
//! head and a softmax over the three classes. Gradients are analytic.

mod backward;
mod config;
mod forward;
mod io;
mod normalizer;
mod params;
mod tensor;
mod train;

pub use backward::{backward, batch_gradient, Sample};
pub use config::{ModelConfig, TrainConfig};
pub use forward::{
    argmax, cross_entropy, forward, forward_cached, lstm_steps, softmax, Cache, PROB_FLOOR,
};
pub use io::{SavedModel, FORMAT_VERSION, MAGIC};
pub use normalizer::Normalizer;
pub use params::{ModelParams, TENSOR_NAMES};
pub use tensor::Tensor;
pub use train::{predict, train, train_from, Adam, TrainHistory};

use crate::balance::LabeledExample;
use crate::num::Float;

/// Borrowed training samples over balanced examples.
pub fn samples<F: Float>(examples: &[LabeledExample<F>]) -> Vec<Sample<'_, F>> {
    examples
        .iter()
        .map(|e| Sample {
            tokens: &e.tokens,
            metadata: &e.features,
            label: e.label.index(),
        })
        .collect()
}

#[cfg(test)]
mod tests;
