use serde::{Deserialize, Serialize};

use super::forest::{forest_train, ForestParams};
use super::metrics::{metrics, MetricsReport};
use super::split::kfold;
use super::tfidf::{Tfidf, DEFAULT_TFIDF_CAP};
use crate::balance::{balance, LabeledExample};
use crate::nn::{self, ModelConfig, TrainConfig};
use crate::num::Float;
use crate::record::Class;
use crate::Result;

/// A post ready for every classifier. `text` and `tokens` are the fused
/// post and profile document; `post_text` and `post_tokens` hold only the
/// post side and feed the forest and the post-only network.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPost<F> {
    pub text: Vec<String>,
    pub tokens: Vec<u32>,
    pub post_text: Vec<String>,
    pub post_tokens: Vec<u32>,
    pub metadata: Vec<F>,
    pub label: Class,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    RandomForest,
    DnnPostOnly,
    DnnPostProfile,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::RandomForest,
        ModelKind::DnnPostOnly,
        ModelKind::DnnPostProfile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "RF + TF-IDF",
            ModelKind::DnnPostOnly => "DNN (post)",
            ModelKind::DnnPostProfile => "DNN (post + profile)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub forest: ForestParams,
    pub tfidf_cap: usize,
    pub forest_seed: u64,
    pub balance: bool,
    pub balance_seed: u64,
    /// Cross-validation folds over the training portion; 0 skips CV.
    pub folds: usize,
    pub fold_seed: u64,
}

impl BenchmarkConfig {
    pub fn new(model: ModelConfig, train: TrainConfig) -> Self {
        Self {
            model,
            train,
            forest: ForestParams::default(),
            tfidf_cap: DEFAULT_TFIDF_CAP,
            forest_seed: train.seed,
            balance: true,
            balance_seed: train.seed,
            folds: 10,
            fold_seed: train.seed,
        }
    }
}

/// Accuracy and macro precision, recall, F1.
pub type Scores = [f64; 4];

fn scores(m: &MetricsReport) -> Scores {
    [m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub model: String,
    pub heldout: MetricsReport,
    pub cv_mean: Option<Scores>,
    pub cv_std: Option<Scores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub model: String,
    pub fold: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub folds: Vec<FoldRecord>,
    pub n_train: usize,
    pub n_test: usize,
}

pub const POST_ONLY_NOTE: &str =
    "DNN (post) is the same network with its metadata input set to zero";

impl BenchmarkReport {
    pub fn row(&self, kind: ModelKind) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.model == kind.name())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "model,accuracy,precision,recall,f1,cv_accuracy_mean,cv_accuracy_std,cv_precision_mean,cv_precision_std,cv_recall_mean,cv_recall_std,cv_f1_mean,cv_f1_std\n",
        );
        for r in &self.rows {
            let h = scores(&r.heldout);
            s.push_str(&r.model);
            for v in h {
                s.push_str(&format!(",{v:.6}"));
            }
            for j in 0..4 {
                match (r.cv_mean, r.cv_std) {
                    (Some(m), Some(sd)) => s.push_str(&format!(",{:.6},{:.6}", m[j], sd[j])),
                    _ => s.push_str(",,"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<22} {:>9} {:>9} {:>9} {:>9}\n",
            "model", "accuracy", "precision", "recall", "f1"
        );
        for r in &self.rows {
            let h = scores(&r.heldout);
            s.push_str(&format!(
                "{:<22} {:>9.4} {:>9.4} {:>9.4} {:>9.4}\n",
                r.model, h[0], h[1], h[2], h[3]
            ));
            if let (Some(m), Some(sd)) = (r.cv_mean, r.cv_std) {
                let cells: Vec<String> = (0..4)
                    .map(|j| format!("{:.3}±{:.3}", m[j], sd[j]))
                    .collect();
                s.push_str(&format!(
                    "{:<22} {:>9} {:>9} {:>9} {:>9}\n",
                    "  cv mean±std", cells[0], cells[1], cells[2], cells[3]
                ));
            }
        }
        s.push_str(&format!(
            "held-out: {} test posts, {} training posts\n{POST_ONLY_NOTE}\n",
            self.n_test, self.n_train
        ));
        s
    }

    pub fn folds_jsonl(&self) -> String {
        self.folds
            .iter()
            .map(|f| serde_json::to_string(f).expect("plain struct") + "\n")
            .collect()
    }
}

/// Training examples for the classifiers, class-balanced when the config
/// asks for it. `source` indexes into `train`.
pub fn balanced_examples<F: Float>(
    train: &[&PreparedPost<F>],
    cfg: &BenchmarkConfig,
) -> Result<Vec<LabeledExample<F>>> {
    let ex: Vec<LabeledExample<F>> = train
        .iter()
        .enumerate()
        .map(|(i, p)| LabeledExample::real(p.tokens.clone(), p.metadata.clone(), p.label, i))
        .collect();
    if cfg.balance {
        balance(&ex, cfg.balance_seed)
    } else {
        Ok(ex)
    }
}

/// Trains the three classifiers on `train` and scores them on `test`.
pub fn evaluate_once<F: Float>(
    train: &[&PreparedPost<F>],
    test: &[&PreparedPost<F>],
    cfg: &BenchmarkConfig,
) -> Result<[MetricsReport; 3]> {
    let examples = balanced_examples(train, cfg)?;
    let truth: Vec<Class> = test.iter().map(|p| p.label).collect();

    let docs: Vec<&Vec<String>> = examples
        .iter()
        .map(|e| &train[e.source].post_text)
        .collect();
    let docs: Vec<Vec<&str>> = docs
        .iter()
        .map(|d| d.iter().map(String::as_str).collect())
        .collect();
    let tfidf = Tfidf::fit(&docs, cfg.tfidf_cap)?;
    let x = tfidf.transform::<F, &str>(&docs);
    let y: Vec<Class> = examples.iter().map(|e| e.label).collect();
    let forest = forest_train(&x, &y, &cfg.forest, cfg.forest_seed)?;
    let test_docs: Vec<Vec<&str>> = test
        .iter()
        .map(|p| p.post_text.iter().map(String::as_str).collect())
        .collect();
    let rf_pred = forest.predict(&tfidf.transform::<F, &str>(&test_docs))?;
    log::info!("forest trained on {} examples", examples.len());

    let zero_meta = vec![F::zero(); cfg.model.metadata_dim];
    let mut blind = examples.clone();
    for e in &mut blind {
        e.tokens = train[e.source].post_tokens.clone();
        e.features = zero_meta.clone();
    }
    let (post_only, _) = nn::train(&nn::samples(&blind), cfg.model, &cfg.train)?;
    let post_pred = test
        .iter()
        .map(|p| nn::predict(&post_only, &p.post_tokens, &zero_meta))
        .collect::<Result<Vec<_>>>()?;

    let (full, _) = nn::train(&nn::samples(&examples), cfg.model, &cfg.train)?;
    let full_pred = test
        .iter()
        .map(|p| nn::predict(&full, &p.tokens, &p.metadata))
        .collect::<Result<Vec<_>>>()?;

    Ok([
        metrics(&rf_pred, &truth)?,
        metrics(&post_pred, &truth)?,
        metrics(&full_pred, &truth)?,
    ])
}

fn mean_std(v: &[Scores]) -> (Scores, Scores) {
    let n = v.len() as f64;
    let mut m = [0.0; 4];
    let mut s = [0.0; 4];
    for j in 0..4 {
        m[j] = v.iter().map(|r| r[j]).sum::<f64>() / n;
        if v.len() > 1 {
            s[j] = (v.iter().map(|r| (r[j] - m[j]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        }
    }
    (m, s)
}

/// Held-out scores for the three classifiers, plus optional stratified
/// cross-validation over the training portion.
pub fn run_benchmark<F: Float>(
    train: &[PreparedPost<F>],
    test: &[PreparedPost<F>],
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    let mut fold_records = Vec::new();
    let mut per_model: [Vec<Scores>; 3] = Default::default();
    if cfg.folds > 0 {
        let labels: Vec<Class> = train.iter().map(|p| p.label).collect();
        for (f, (tr, va)) in kfold(&labels, cfg.folds, cfg.fold_seed)?
            .into_iter()
            .enumerate()
        {
            let tr: Vec<&PreparedPost<F>> = tr.iter().map(|&i| &train[i]).collect();
            let va: Vec<&PreparedPost<F>> = va.iter().map(|&i| &train[i]).collect();
            let reports = evaluate_once(&tr, &va, cfg)?;
            for (k, r) in reports.iter().enumerate() {
                let s = scores(r);
                per_model[k].push(s);
                fold_records.push(FoldRecord {
                    model: ModelKind::ALL[k].name().to_string(),
                    fold: f,
                    accuracy: s[0],
                    precision: s[1],
                    recall: s[2],
                    f1: s[3],
                });
            }
            log::info!("fold {}/{} done", f + 1, cfg.folds);
        }
    }
    let tr: Vec<&PreparedPost<F>> = train.iter().collect();
    let te: Vec<&PreparedPost<F>> = test.iter().collect();
    let held = evaluate_once(&tr, &te, cfg)?;
    let rows = held
        .into_iter()
        .enumerate()
        .map(|(k, heldout)| {
            let (cv_mean, cv_std) = if per_model[k].is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&per_model[k]);
                (Some(m), Some(s))
            };
            BenchmarkRow {
                model: ModelKind::ALL[k].name().to_string(),
                heldout,
                cv_mean,
                cv_std,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        rows,
        folds: fold_records,
        n_train: train.len(),
        n_test: test.len(),
    })
}
