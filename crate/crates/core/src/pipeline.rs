//! Stages wired together: identification, clustering, post labeling,
//! feature extraction and the classifier benchmark.
//!
//! Every fitted transform (topic model, vocabulary, metadata scaling) is
//! learned on the training portion only and then applied to all posts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{
    assignments, build_cluster_features, compress_counts, elbow_select, label_clusters, Assignment,
    ClusterFeatureVector, ClusterModel, ElbowCurve, KMeansParams, DEFAULT_RESTARTS,
};
use crate::eval::{
    balanced_examples, run_benchmark, split, BenchmarkConfig, BenchmarkReport, PreparedPost,
};
use crate::features::{
    analyze_post, analyze_profile, build_corpus_entry, lda_fit, metadata_vector, topic_document,
    topic_words, LdaParams, Lexicon, MetadataInputs, MetadataVector, PostText, ProfileText,
    TopicModel, Vocabulary, COUNT_COLUMNS, DEFAULT_SEQUENCE_LEN, DEFAULT_VOCAB_CAP, METADATA_DIM,
};
use crate::nn::{self, ModelConfig, ModelParams, Normalizer, TrainConfig, TrainHistory};
use crate::num::{Float, Matrix};
use crate::record::{Class, PostRecord, ProfileRecord};
use crate::similarity::{
    assess_profile, identify, Identification, PhotoOracle, SimilarityReport, DEFAULT_THRESHOLD,
};
use crate::textprep::TextPipeline;
use crate::{Error, Result};

/// The cluster count used for naming: one fan and one bot cluster.
pub const LABEL_K: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub cluster_seed: u64,
    pub lda: LdaParams,
    pub lda_seed: u64,
    pub vocab_cap: usize,
    pub seq_len: usize,
    pub train_frac: f64,
    pub split_seed: u64,
    /// Epoch seconds post ages are measured from.
    pub reference_time: i64,
    /// Network shape; vocabulary size and metadata width are filled in from
    /// the data.
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub benchmark: BenchmarkSettings,
}

/// Benchmark options besides the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSettings {
    pub forest: crate::eval::ForestParams,
    pub tfidf_cap: usize,
    pub forest_seed: u64,
    pub balance: bool,
    pub balance_seed: u64,
    pub folds: usize,
    pub fold_seed: u64,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        let b = BenchmarkConfig::new(ModelConfig::new(1, 1), TrainConfig::default());
        Self {
            forest: b.forest,
            tfidf_cap: b.tfidf_cap,
            forest_seed: 1,
            balance: true,
            balance_seed: 1,
            folds: 0,
            fold_seed: 1,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            k_min: 1,
            k_max: 8,
            restarts: DEFAULT_RESTARTS,
            cluster_seed: 1,
            lda: LdaParams::default(),
            lda_seed: 1,
            vocab_cap: DEFAULT_VOCAB_CAP,
            seq_len: DEFAULT_SEQUENCE_LEN,
            train_frac: 0.75,
            split_seed: 1,
            reference_time: 1_580_515_200,
            model: ModelConfig::new(1, METADATA_DIM),
            train: TrainConfig::default(),
            benchmark: BenchmarkSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::invalid("threshold must be in (0, 1]"));
        }
        if self.k_min == 0 || self.k_max < self.k_min + 2 {
            return Err(Error::invalid(
                "k range needs k_min >= 1 and at least 3 values",
            ));
        }
        if self.k_min > LABEL_K || self.k_max < LABEL_K {
            return Err(Error::invalid("k range must include 2"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::invalid("train_frac must be in (0, 1)"));
        }
        if self.vocab_cap == 0 {
            return Err(Error::invalid("vocab_cap must be positive"));
        }
        if self.lda.k == 0 || self.lda.iters == 0 {
            return Err(Error::invalid("lda needs k >= 1 and iters >= 1"));
        }
        let mut model = self.model;
        model.seq_len = self.seq_len;
        model.vocab_size = model.vocab_size.max(1);
        model.metadata_dim = METADATA_DIM;
        model.validate()?;
        self.train.validate()
    }

    /// Network shape for a vocabulary of `vocab_size` tokens.
    pub fn model_for(&self, vocab_size: usize) -> ModelConfig {
        let mut m = self.model;
        m.vocab_size = vocab_size;
        m.seq_len = self.seq_len;
        m.metadata_dim = METADATA_DIM;
        m
    }

    pub fn benchmark_for(&self, vocab_size: usize) -> BenchmarkConfig {
        let b = &self.benchmark;
        BenchmarkConfig {
            model: self.model_for(vocab_size),
            train: self.train,
            forest: b.forest,
            tfidf_cap: b.tfidf_cap,
            forest_seed: b.forest_seed,
            balance: b.balance,
            balance_seed: b.balance_seed,
            folds: b.folds,
            fold_seed: b.fold_seed,
        }
    }
}

/// Raw records the pipeline runs on.
pub struct Inputs<'a> {
    pub genuine: &'a [ProfileRecord],
    pub candidates: &'a [ProfileRecord],
    pub posts: &'a [PostRecord],
    pub oracle: &'a dyn PhotoOracle,
}

/// Identification of every candidate against the whole genuine community.
pub fn identify_all(inputs: &Inputs<'_>, threshold: f64) -> Result<Vec<Identification>> {
    let emoji = TextPipeline::bundled().emoji;
    inputs
        .candidates
        .iter()
        .map(|c| identify(c, inputs.genuine, threshold, inputs.oracle, &emoji))
        .collect()
}

/// A genuine account compared with itself: every score is 1.
pub fn self_report(account: &ProfileRecord, threshold: f64) -> Result<SimilarityReport> {
    struct NoPhotos;
    impl PhotoOracle for NoPhotos {
        fn lookup(&self, _: &str, _: &str) -> Option<bool> {
            None
        }
    }
    let emoji = TextPipeline::bundled().emoji;
    assess_profile(account, account, threshold, &NoPhotos, &emoji)
}

/// Posts grouped by publisher.
pub fn posts_by_publisher(posts: &[PostRecord]) -> HashMap<&str, Vec<&PostRecord>> {
    let mut map: HashMap<&str, Vec<&PostRecord>> = HashMap::new();
    for p in posts {
        map.entry(p.publisher_id.as_str()).or_default().push(p);
    }
    map
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub features: Vec<ClusterFeatureVector>,
    pub curve: ElbowCurve<f64>,
    pub model: ClusterModel<f64>,
    pub assignments: Vec<Assignment>,
}

impl Clustering {
    pub fn label_of(&self, username: &str) -> Option<Class> {
        self.assignments
            .iter()
            .find(|a| a.profile_id == username)
            .map(|a| a.label)
    }
}

/// Clusters the candidates flagged as impersonators. The elbow curve is
/// reported as computed; naming needs exactly two clusters, so the labeled
/// model always has k = 2.
pub fn cluster_impersonators(
    inputs: &Inputs<'_>,
    identifications: &[Identification],
    cfg: &PipelineConfig,
) -> Result<Clustering> {
    if identifications.len() != inputs.candidates.len() {
        return Err(Error::Shape(format!(
            "{} identifications for {} candidates",
            identifications.len(),
            inputs.candidates.len()
        )));
    }
    let by_publisher = posts_by_publisher(inputs.posts);
    let features: Vec<ClusterFeatureVector> = inputs
        .candidates
        .iter()
        .zip(identifications)
        .filter(|(_, id)| id.report.is_impersonator)
        .map(|(c, id)| {
            let posts = by_publisher
                .get(c.username.as_str())
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            build_cluster_features(c, id, posts)
        })
        .collect();
    if features.len() < cfg.k_min + 2 {
        return Err(Error::invalid(format!(
            "{} impersonators are too few to cluster",
            features.len()
        )));
    }
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.values.clone()).collect();
    let matrix = compress_counts(&Matrix::from_rows(&rows)?);
    let params = KMeansParams::default();
    let z = crate::clustering::standardize(&matrix)?;
    let k_max = cfg.k_max.min(features.len());
    let curve = elbow_select(
        &z.matrix,
        cfg.k_min..=k_max,
        cfg.cluster_seed,
        cfg.restarts,
        params,
    )?;
    if curve.k_star != LABEL_K {
        log::warn!(
            "elbow suggests k = {}; fans and bots are still split with k = {LABEL_K}",
            curve.k_star
        );
    }
    let model = ClusterModel::fit(&matrix, LABEL_K, cfg.cluster_seed, cfg.restarts, params)?;
    let model = label_clusters(model)?;
    let ids: Vec<String> = features.iter().map(|f| f.profile_id.clone()).collect();
    let assignments = assignments(&model, &ids)?;
    Ok(Clustering {
        features,
        curve,
        model,
        assignments,
    })
}

/// Class of every account whose posts can be labeled: genuine accounts
/// plus clustered impersonators.
pub fn account_labels(
    genuine: &[ProfileRecord],
    clustering: &Clustering,
) -> HashMap<String, Class> {
    let mut map: HashMap<String, Class> = clustering
        .assignments
        .iter()
        .map(|a| (a.profile_id.clone(), a.label))
        .collect();
    for g in genuine {
        map.insert(g.username.clone(), Class::Genuine);
    }
    map
}

/// Similarity report describing each labeled account's publisher: its own
/// identification for impersonators, a self comparison for genuine ones.
pub fn publisher_reports(
    inputs: &Inputs<'_>,
    identifications: &[Identification],
    threshold: f64,
) -> Result<HashMap<String, SimilarityReport>> {
    let mut map = HashMap::new();
    for (c, id) in inputs.candidates.iter().zip(identifications) {
        map.insert(c.username.clone(), id.report.clone());
    }
    for g in inputs.genuine {
        map.insert(g.username.clone(), self_report(g, threshold)?);
    }
    Ok(map)
}

/// Indices of posts whose publisher has a label, with that label.
pub fn label_posts(posts: &[PostRecord], labels: &HashMap<String, Class>) -> Vec<(usize, Class)> {
    posts
        .iter()
        .enumerate()
        .filter_map(|(i, p)| labels.get(&p.publisher_id).map(|&c| (i, c)))
        .collect()
}

/// Fitted text and metadata transforms.
#[derive(Debug, Clone)]
pub struct FeatureModel {
    pub topics: TopicModel,
    pub vocab: Vocabulary,
    pub normalizer: Normalizer,
    pub seq_len: usize,
    pub reference_time: i64,
}

/// One post with everything derived from it before fitting.
struct Analyzed<'a> {
    post: &'a PostRecord,
    text: PostText,
    profile: &'a ProfileRecord,
    report: &'a SimilarityReport,
}

/// Text and raw metadata of one post, given the fitted topic model.
fn derive(
    a: &Analyzed<'_>,
    profile_text: &ProfileText,
    topics: &TopicModel,
    reference_time: i64,
    lexicon: &Lexicon,
) -> Result<(String, String, MetadataVector)> {
    let words = topic_words(topics, &a.text);
    let entry = build_corpus_entry(&a.text, profile_text, &words);
    let post_entry = build_corpus_entry(&a.text, &ProfileText::default(), &words);
    let meta = metadata_vector(
        &MetadataInputs {
            post: a.post,
            post_text: &a.text,
            profile: a.profile,
            profile_text,
            similarity: a.report,
            reference_time,
        },
        lexicon,
    )?;
    Ok((entry, post_entry, meta))
}

impl FeatureModel {
    /// Token ids and normalized metadata of a post.
    pub fn encode<F: Float>(
        &self,
        post: &PostRecord,
        profile: &ProfileRecord,
        report: &SimilarityReport,
        lexicon: &Lexicon,
    ) -> Result<(Vec<String>, Vec<u32>, Vec<F>)> {
        let pipe = TextPipeline::bundled();
        let a = Analyzed {
            post,
            text: analyze_post(&pipe, post),
            profile,
            report,
        };
        let profile_text = analyze_profile(&pipe, profile);
        let (entry, _, meta) = derive(
            &a,
            &profile_text,
            &self.topics,
            self.reference_time,
            lexicon,
        )?;
        let tokens = self.vocab.encode(&entry, self.seq_len);
        let metadata = self.normalizer.transform::<F>(meta.as_slice())?;
        Ok((
            entry.split_whitespace().map(str::to_string).collect(),
            tokens,
            metadata,
        ))
    }
}

/// Train and test posts ready for the classifiers.
#[derive(Debug, Clone)]
pub struct Prepared<F> {
    pub features: FeatureModel,
    pub train: Vec<PreparedPost<F>>,
    pub test: Vec<PreparedPost<F>>,
    pub train_posts: Vec<usize>,
    pub test_posts: Vec<usize>,
    /// Raw metadata rows of every labeled post, in `labeled` order.
    pub raw_metadata: Vec<MetadataVector>,
}

/// Splits the labeled posts, fits topics, vocabulary and scaling on the
/// training side and encodes everything.
pub fn prepare<F: Float>(
    inputs: &Inputs<'_>,
    labeled: &[(usize, Class)],
    reports: &HashMap<String, SimilarityReport>,
    cfg: &PipelineConfig,
    lexicon: &Lexicon,
) -> Result<Prepared<F>> {
    let pipe = TextPipeline::bundled();
    let profiles: HashMap<&str, &ProfileRecord> = inputs
        .genuine
        .iter()
        .chain(inputs.candidates)
        .map(|p| (p.username.as_str(), p))
        .collect();
    let mut profile_texts: HashMap<&str, ProfileText> = HashMap::new();
    let mut analyzed = Vec::with_capacity(labeled.len());
    for &(i, _) in labeled {
        let post = &inputs.posts[i];
        let name = post.publisher_id.as_str();
        let profile = *profiles
            .get(name)
            .ok_or_else(|| Error::invalid(format!("no profile for publisher {name}")))?;
        let report = reports
            .get(name)
            .ok_or_else(|| Error::invalid(format!("no similarity report for {name}")))?;
        profile_texts
            .entry(name)
            .or_insert_with(|| analyze_profile(&pipe, profile));
        analyzed.push(Analyzed {
            post,
            text: analyze_post(&pipe, post),
            profile,
            report,
        });
    }

    let labels: Vec<Class> = labeled.iter().map(|&(_, c)| c).collect();
    let (train_idx, test_idx) = split(&labels, cfg.train_frac, cfg.split_seed)?;

    let topic_docs: Vec<Vec<String>> = train_idx
        .iter()
        .map(|&j| topic_document(&analyzed[j].text))
        .collect();
    let topics = lda_fit(&topic_docs, cfg.lda, cfg.lda_seed)?;

    let mut entries = Vec::with_capacity(analyzed.len());
    let mut post_entries = Vec::with_capacity(analyzed.len());
    let mut raw = Vec::with_capacity(analyzed.len());
    for a in &analyzed {
        let pt = &profile_texts[a.post.publisher_id.as_str()];
        let (entry, post_entry, meta) = derive(a, pt, &topics, cfg.reference_time, lexicon)?;
        entries.push(entry);
        post_entries.push(post_entry);
        raw.push(meta);
    }
    let train_entries: Vec<&str> = train_idx.iter().map(|&j| entries[j].as_str()).collect();
    let vocab = Vocabulary::fit(&train_entries, cfg.vocab_cap)?;
    let train_rows: Vec<&[f64]> = train_idx.iter().map(|&j| raw[j].as_slice()).collect();
    let normalizer = Normalizer::fit(&train_rows, &COUNT_COLUMNS)?;

    let build = |idx: &[usize]| -> Result<Vec<PreparedPost<F>>> {
        idx.iter()
            .map(|&j| {
                Ok(PreparedPost {
                    text: entries[j].split_whitespace().map(str::to_string).collect(),
                    tokens: vocab.encode(&entries[j], cfg.seq_len),
                    post_text: post_entries[j]
                        .split_whitespace()
                        .map(str::to_string)
                        .collect(),
                    post_tokens: vocab.encode(&post_entries[j], cfg.seq_len),
                    metadata: normalizer.transform::<F>(raw[j].as_slice())?,
                    label: labels[j],
                })
            })
            .collect()
    };
    let train = build(&train_idx)?;
    let test = build(&test_idx)?;
    Ok(Prepared {
        train,
        test,
        train_posts: train_idx.iter().map(|&j| labeled[j].0).collect(),
        test_posts: test_idx.iter().map(|&j| labeled[j].0).collect(),
        raw_metadata: raw,
        features: FeatureModel {
            topics,
            vocab,
            normalizer,
            seq_len: cfg.seq_len,
            reference_time: cfg.reference_time,
        },
    })
}

/// Trains the full network (post and profile inputs) on the balanced
/// training side.
pub fn train_model<F: Float>(
    prepared: &Prepared<F>,
    cfg: &PipelineConfig,
) -> Result<(ModelParams<F>, TrainHistory)> {
    let bench = cfg.benchmark_for(prepared.features.vocab.len());
    let refs: Vec<&PreparedPost<F>> = prepared.train.iter().collect();
    let examples = balanced_examples(&refs, &bench)?;
    nn::train(&nn::samples(&examples), bench.model, &bench.train)
}

/// Everything one end-to-end run produces.
#[derive(Debug)]
pub struct PipelineRun<F> {
    pub identifications: Vec<Identification>,
    pub clustering: Clustering,
    pub labeled: Vec<(usize, Class)>,
    pub prepared: Prepared<F>,
    pub report: BenchmarkReport,
}

/// Identification, clustering, labeling, feature extraction and the
/// three-way classifier benchmark.
pub fn run<F: Float>(inputs: &Inputs<'_>, cfg: &PipelineConfig) -> Result<PipelineRun<F>> {
    cfg.validate()?;
    let identifications = identify_all(inputs, cfg.threshold)?;
    log::info!(
        "{} of {} candidates are impersonators",
        identifications
            .iter()
            .filter(|i| i.report.is_impersonator)
            .count(),
        identifications.len()
    );
    let clustering = cluster_impersonators(inputs, &identifications, cfg)?;
    let labels = account_labels(inputs.genuine, &clustering);
    let labeled = label_posts(inputs.posts, &labels);
    let reports = publisher_reports(inputs, &identifications, cfg.threshold)?;
    let lexicon = Lexicon::bundled();
    let prepared = prepare::<F>(inputs, &labeled, &reports, cfg, &lexicon)?;
    let bench = cfg.benchmark_for(prepared.features.vocab.len());
    let report = run_benchmark(&prepared.train, &prepared.test, &bench)?;
    Ok(PipelineRun {
        identifications,
        clustering,
        labeled,
        prepared,
        report,
    })
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;
    use crate::synth::{gen_dataset, GeneratorConfig};

    fn small_config() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.seq_len = 20;
        cfg.model.embed_dim = 8;
        cfg.model.conv_filters = 8;
        cfg.model.conv_kernel = 3;
        cfg.model.lstm_units = 4;
        cfg.train.epochs = 2;
        cfg.lda.iters = 20;
        cfg.lda.k = 4;
        cfg.benchmark.forest.n_trees = 10;
        cfg
    }

    #[test]
    fn end_to_end_small() {
        let mut g = GeneratorConfig::new(15, 30, 20, 3);
        g.genuine.posts_per_account = 4;
        let ds = gen_dataset(&g).unwrap();
        let inputs = Inputs {
            genuine: &ds.genuine,
            candidates: &ds.candidates,
            posts: &ds.posts,
            oracle: &ds.oracle,
        };
        let run = run::<f64>(&inputs, &small_config()).unwrap();
        assert_eq!(run.report.rows.len(), 3);
        assert_eq!(run.clustering.assignments.len(), 50);
        assert_eq!(
            run.prepared.train.len() + run.prepared.test.len(),
            run.labeled.len()
        );
        let agree = run
            .clustering
            .assignments
            .iter()
            .filter(|a| ds.label_of(&a.profile_id) == Some(a.label))
            .count();
        assert!(agree >= 40, "cluster agreement {agree}/50");
    }

    #[test]
    fn genuine_self_report_is_all_similar() {
        let g = &gen_dataset(&GeneratorConfig::new(1, 0, 0, 1))
            .unwrap()
            .genuine[0];
        let r = self_report(g, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(
            (
                r.sim_username,
                r.sim_full_name,
                r.sim_biography,
                r.photo_similar
            ),
            (1.0, 1.0, 1.0, true)
        );
    }

    #[test]
    fn unlabeled_publishers_skipped() {
        let posts = gen_dataset(&GeneratorConfig::new(2, 0, 0, 1))
            .unwrap()
            .posts;
        let mut labels = HashMap::new();
        labels.insert(posts[0].publisher_id.clone(), Class::Genuine);
        let got = label_posts(&posts, &labels);
        assert!(!got.is_empty());
        assert!(got
            .iter()
            .all(|&(i, _)| posts[i].publisher_id == posts[0].publisher_id));
    }

    #[test]
    fn config_requires_two_in_k_range() {
        let mut cfg = PipelineConfig::default();
        cfg.k_min = 3;
        cfg.k_max = 8;
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::default().validate().is_ok());
    }
}
