use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use impostor::clustering::assignments_to_csv;
use impostor::eval::run_benchmark;
use impostor::features::{Lexicon, TopicModel, TopicState, Vocabulary};
use impostor::nn::{self, SavedModel};
use impostor::pipeline::{
    account_labels, cluster_impersonators, identify_all, label_posts, prepare, publisher_reports,
    train_model, Clustering, FeatureModel, Inputs, Prepared,
};
use impostor::record::read_jsonl;
use impostor::similarity::{Identification, TablePhotoOracle};
use impostor::synth::{gen_dataset, GENUINE_FILE, PHOTO_ORACLE_FILE, POSTS_FILE, PROFILES_FILE};
use impostor::{Class, PostRecord, ProfileRecord};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{sha256_hex, RunManifest};

pub const SIMILARITY_FILE: &str = "similarity.csv";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const ELBOW_FILE: &str = "elbow.csv";
pub const MODEL_FILE: &str = "model.bin";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const FEATURES_FILE: &str = "features.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const FOLDS_FILE: &str = "folds.jsonl";
pub const VERDICTS_FILE: &str = "verdicts.jsonl";

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub config: Config,
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

impl Context {
    pub fn new(command: &str, config: Config, out_dir: PathBuf) -> Result<Self, CliError> {
        config.validate()?;
        fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
        let manifest = RunManifest::start(command, &config)?;
        Ok(Self {
            config,
            out_dir,
            manifest,
        })
    }

    fn output(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        self.manifest.write_output(&path, bytes)
    }

    fn input_path(&self, set: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
        let path = self.config.resolve(set, &self.out_dir, name)?;
        if !path.exists() {
            return Err(CliError::Config(format!(
                "input {} does not exist",
                path.display()
            )));
        }
        Ok(path)
    }

    fn read_records<T>(&mut self, set: &Option<PathBuf>, name: &str) -> Result<Vec<T>, CliError>
    where
        T: serde::de::DeserializeOwned + impostor::record::Validate,
    {
        let path = self.input_path(set, name)?;
        let bytes = self.manifest.read_input(&path)?;
        read_jsonl(bytes.as_slice()).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    fn load_inputs(&mut self, with_posts: bool) -> Result<Loaded, CliError> {
        let paths = self.config.paths.clone();
        let genuine = self.read_records(&paths.genuine, GENUINE_FILE)?;
        let candidates = self.read_records(&paths.profiles, PROFILES_FILE)?;
        let posts = if with_posts {
            self.read_records(&paths.posts, POSTS_FILE)?
        } else {
            Vec::new()
        };
        let oracle_path =
            self.config
                .resolve(&paths.photo_oracle, &self.out_dir, PHOTO_ORACLE_FILE)?;
        let oracle = if oracle_path.exists() {
            TablePhotoOracle::parse(&self.manifest.read_input_string(&oracle_path)?)?
        } else {
            log::warn!(
                "no photo oracle at {}; no photos count as similar",
                oracle_path.display()
            );
            TablePhotoOracle::new()
        };
        Ok(Loaded {
            genuine,
            candidates,
            posts,
            oracle,
        })
    }

    fn lexicon(&mut self) -> Result<Lexicon, CliError> {
        match self.config.paths.lexicon.clone() {
            None => Ok(Lexicon::bundled()),
            Some(p) => {
                let p = self.input_path(&Some(p), "")?;
                Ok(Lexicon::parse(&self.manifest.read_input_string(&p)?)?)
            }
        }
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        self.manifest.finish(&self.out_dir)
    }
}

pub struct Loaded {
    pub genuine: Vec<ProfileRecord>,
    pub candidates: Vec<ProfileRecord>,
    pub posts: Vec<PostRecord>,
    pub oracle: TablePhotoOracle,
}

impl Loaded {
    pub fn inputs(&self) -> Inputs<'_> {
        Inputs {
            genuine: &self.genuine,
            candidates: &self.candidates,
            posts: &self.posts,
            oracle: &self.oracle,
        }
    }
}

pub fn synth(ctx: &mut Context) -> Result<(), CliError> {
    let ds = gen_dataset(&ctx.config.synth)?;
    for (name, body) in ds.files()? {
        ctx.output(name, body.as_bytes())?;
    }
    log::info!(
        "{} genuine accounts, {} candidates, {} posts",
        ds.genuine.len(),
        ds.candidates.len(),
        ds.posts.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct SimilarityRow<'a> {
    candidate: &'a str,
    genuine_target: &'a str,
    sim_username: f64,
    sim_full_name: f64,
    sim_biography: f64,
    photo_similar: bool,
    similar_feature_count: u8,
    is_impersonator: bool,
    msf: u8,
    lsf: u8,
}

fn similarity_csv(ids: &[Identification]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for id in ids {
        let r = &id.report;
        w.serialize(SimilarityRow {
            candidate: &r.candidate,
            genuine_target: &r.genuine_target,
            sim_username: r.sim_username,
            sim_full_name: r.sim_full_name,
            sim_biography: r.sim_biography,
            photo_similar: r.photo_similar,
            similar_feature_count: r.similar_feature_count,
            is_impersonator: r.is_impersonator,
            msf: id.msf,
            lsf: id.lsf,
        })
        .map_err(|e| CliError::data(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::data(e.to_string()))
}

pub fn identify(ctx: &mut Context) -> Result<(), CliError> {
    let loaded = ctx.load_inputs(false)?;
    let ids = identify_all(&loaded.inputs(), ctx.config.pipeline.threshold)?;
    log::info!(
        "{} of {} candidates are impersonators",
        ids.iter().filter(|i| i.report.is_impersonator).count(),
        ids.len()
    );
    ctx.output(SIMILARITY_FILE, &similarity_csv(&ids)?)
}

fn clustered(
    ctx: &mut Context,
    loaded: &Loaded,
) -> Result<(Vec<Identification>, Clustering), CliError> {
    let inputs = loaded.inputs();
    let ids = identify_all(&inputs, ctx.config.pipeline.threshold)?;
    let clustering = cluster_impersonators(&inputs, &ids, &ctx.config.pipeline)?;
    log::info!(
        "elbow picks k = {}; {} impersonators labeled",
        clustering.curve.k_star,
        clustering.assignments.len()
    );
    Ok((ids, clustering))
}

pub fn cluster(ctx: &mut Context) -> Result<(), CliError> {
    let loaded = ctx.load_inputs(true)?;
    let (_, clustering) = clustered(ctx, &loaded)?;
    ctx.output(
        ASSIGNMENTS_FILE,
        assignments_to_csv(&clustering.assignments).as_bytes(),
    )?;
    ctx.output(ELBOW_FILE, clustering.curve.to_csv().as_bytes())
}

fn prepared(ctx: &mut Context) -> Result<Prepared<f64>, CliError> {
    let loaded = ctx.load_inputs(true)?;
    let lexicon = ctx.lexicon()?;
    let (ids, clustering) = clustered(ctx, &loaded)?;
    let inputs = loaded.inputs();
    let cfg = &ctx.config.pipeline;
    let labels = account_labels(inputs.genuine, &clustering);
    let labeled = label_posts(inputs.posts, &labels);
    let reports = publisher_reports(&inputs, &ids, cfg.threshold)?;
    let p = prepare::<f64>(&inputs, &labeled, &reports, cfg, &lexicon)?;
    log::info!(
        "{} labeled posts: {} train, {} test, vocabulary {}",
        labeled.len(),
        p.train.len(),
        p.test.len(),
        p.features.vocab.len()
    );
    Ok(p)
}

/// Fitted text transforms stored next to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureState {
    pub reference_time: i64,
    pub seq_len: usize,
    pub topics: TopicState,
}

pub fn train(ctx: &mut Context) -> Result<(), CliError> {
    let prepared = prepared(ctx)?;
    let (params, history) = train_model(&prepared, &ctx.config.pipeline)?;
    let features = &prepared.features;
    let vocab = features.vocab.to_tsv();
    let saved = SavedModel {
        params,
        normalizer: features.normalizer.clone(),
        vocab_sha256: sha256_hex(vocab.as_bytes()),
    };
    let state = FeatureState {
        reference_time: features.reference_time,
        seq_len: features.seq_len,
        topics: features.topics.state(),
    };
    let mut hist = String::from("epoch,loss\n");
    for (i, l) in history.epoch_loss.iter().enumerate() {
        hist.push_str(&format!("{},{l:?}\n", i + 1));
    }
    ctx.output(MODEL_FILE, &saved.to_bytes()?)?;
    ctx.output(VOCAB_FILE, vocab.as_bytes())?;
    let mut json = serde_json::to_string_pretty(&state).expect("plain struct");
    json.push('\n');
    ctx.output(FEATURES_FILE, json.as_bytes())?;
    ctx.output(HISTORY_FILE, hist.as_bytes())
}

pub fn eval(ctx: &mut Context) -> Result<String, CliError> {
    let prepared = prepared(ctx)?;
    let bench = ctx
        .config
        .pipeline
        .benchmark_for(prepared.features.vocab.len());
    let report = run_benchmark(&prepared.train, &prepared.test, &bench)?;
    let table = report.to_table();
    ctx.output(REPORT_CSV, report.to_csv().as_bytes())?;
    ctx.output(REPORT_TXT, table.as_bytes())?;
    ctx.output(FOLDS_FILE, report.folds_jsonl().as_bytes())?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probs {
    pub bot: f64,
    pub fan: f64,
    pub genuine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub post_id: String,
    pub label: Class,
    pub probs: Probs,
}

fn load_model(ctx: &mut Context) -> Result<(SavedModel<f64>, FeatureModel), CliError> {
    let dir = ctx
        .config
        .paths
        .model_dir
        .clone()
        .unwrap_or_else(|| ctx.out_dir.clone());
    let mut read = |name: &str| -> Result<Vec<u8>, CliError> {
        let path = dir.join(name);
        if !path.exists() {
            return Err(CliError::Config(format!(
                "model artifact {} does not exist",
                path.display()
            )));
        }
        ctx.manifest.read_input(&path)
    };
    let model_bytes = read(MODEL_FILE)?;
    let vocab_bytes = read(VOCAB_FILE)?;
    let state_bytes = read(FEATURES_FILE)?;
    let saved = SavedModel::<f64>::from_bytes(&model_bytes)?;
    if saved.vocab_sha256 != sha256_hex(&vocab_bytes) {
        return Err(CliError::data(format!(
            "{VOCAB_FILE} does not match the vocabulary the model was trained with"
        )));
    }
    let vocab = Vocabulary::from_tsv(
        std::str::from_utf8(&vocab_bytes)
            .map_err(|_| CliError::data(format!("{VOCAB_FILE} is not UTF-8")))?,
    )?;
    let state: FeatureState = serde_json::from_slice(&state_bytes)
        .map_err(|e| CliError::data(format!("{FEATURES_FILE}: {e}")))?;
    if state.seq_len != saved.params.config.seq_len {
        return Err(CliError::data(format!(
            "{FEATURES_FILE} has sequence length {}, the model {}",
            state.seq_len, saved.params.config.seq_len
        )));
    }
    let features = FeatureModel {
        topics: TopicModel::from_state(state.topics)?,
        vocab,
        normalizer: saved.normalizer.clone(),
        seq_len: state.seq_len,
        reference_time: state.reference_time,
    };
    Ok((saved, features))
}

pub fn predict(ctx: &mut Context, input: &Path) -> Result<(), CliError> {
    if !input.exists() {
        return Err(CliError::Config(format!(
            "input {} does not exist",
            input.display()
        )));
    }
    let (saved, features) = load_model(ctx)?;
    let lexicon = ctx.lexicon()?;
    let bytes = ctx.manifest.read_input(input)?;
    let posts: Vec<PostRecord> = read_jsonl(bytes.as_slice())
        .map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
    let mut loaded = ctx.load_inputs(false)?;

    // Only publishers that appear in the input are compared.
    let wanted: std::collections::HashSet<&str> =
        posts.iter().map(|p| p.publisher_id.as_str()).collect();
    loaded
        .candidates
        .retain(|c| wanted.contains(c.username.as_str()));
    let inputs = loaded.inputs();
    let ids = identify_all(&inputs, ctx.config.pipeline.threshold)?;
    let reports = publisher_reports(&inputs, &ids, ctx.config.pipeline.threshold)?;
    let profiles: HashMap<&str, &ProfileRecord> = loaded
        .genuine
        .iter()
        .chain(&loaded.candidates)
        .map(|p| (p.username.as_str(), p))
        .collect();

    let mut out = String::new();
    for (line, post) in posts.iter().enumerate() {
        let publisher = post.publisher_id.as_str();
        let (Some(profile), Some(report)) = (profiles.get(publisher), reports.get(publisher))
        else {
            return Err(CliError::data(format!(
                "{} line {}: unknown publisher {publisher}",
                input.display(),
                line + 1
            )));
        };
        let (_, tokens, metadata) = features.encode::<f64>(post, profile, report, &lexicon)?;
        let p = nn::forward(&saved.params, &tokens, &metadata, None)?;
        let verdict = Verdict {
            post_id: post.post_id.clone(),
            label: Class::from_index(nn::argmax(&p)).expect("three classes"),
            probs: Probs {
                bot: p[Class::Bot.index()],
                fan: p[Class::Fan.index()],
                genuine: p[Class::Genuine.index()],
            },
        };
        out.push_str(&serde_json::to_string(&verdict).expect("plain struct"));
        out.push('\n');
    }
    ctx.output(VERDICTS_FILE, out.as_bytes())
}
