//! Impersonator identification and post classification.
//!
//! The crate covers the whole offline pipeline: text preprocessing, profile
//! similarity scoring against genuine accounts, K-means clustering of
//! impersonators into bots and fans, class balancing, feature engineering,
//! a convolutional/recurrent neural classifier trained from scratch, a
//! TF-IDF random-forest baseline, an evaluation protocol, and a synthetic
//! population generator.
//!
//! Numeric modules are generic over [`num::Float`]; the aliases below fix
//! the scalar to `f64` (or `f32` where noted) for everyday use.

// Index loops mirror the math in the numeric kernels, and `!(x > 0.0)`
// deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod clustering;
pub mod error;
pub mod eval;
pub mod features;
pub mod nn;
pub mod num;
pub mod pipeline;
pub mod record;
pub mod similarity;
pub mod synth;
pub mod textprep;

pub use error::{Error, ErrorKind, Result};
pub use num::{Float, Matrix};
pub use record::{Class, MediaType, PostRecord, ProfileRecord};

pub type Matrix64 = num::Matrix<f64>;
pub type ClusterModel64 = clustering::ClusterModel<f64>;
pub type LabeledExample64 = balance::LabeledExample<f64>;
pub type ModelParams64 = nn::ModelParams<f64>;
pub type ModelParams32 = nn::ModelParams<f32>;
pub type SavedModel64 = nn::SavedModel<f64>;
pub type SavedModel32 = nn::SavedModel<f32>;
pub type Forest64 = eval::ForestModel<f64>;
