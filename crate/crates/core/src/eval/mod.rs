//! Evaluation protocol: stratified splitting and folding, classification
//! metrics, and the TF-IDF random-forest baseline compared against the
//! network.

mod benchmark;
mod forest;
mod metrics;
mod split;
mod tfidf;

pub use benchmark::{
    balanced_examples, evaluate_once, run_benchmark, BenchmarkConfig, BenchmarkReport,
    BenchmarkRow, FoldRecord, ModelKind, PreparedPost, Scores, POST_ONLY_NOTE,
};
pub use forest::{forest_predict, forest_train, ForestModel, ForestParams, Node, Tree};
pub use metrics::{metrics, MetricsReport};
pub use split::{kfold, split};
pub use tfidf::{Tfidf, DEFAULT_TFIDF_CAP};
