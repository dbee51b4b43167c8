use std::fs;
use std::path::{Path, PathBuf};

use impostor::pipeline::PipelineConfig;
use impostor::synth::GeneratorConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Input locations. Unset paths fall back to the standard file name inside
/// the output directory, so stages can be chained on one directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub genuine: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub photo_oracle: Option<PathBuf>,
    /// Sentiment lexicon TSV; the bundled one when unset.
    pub lexicon: Option<PathBuf>,
    /// Directory holding `model.bin`, `vocab.tsv` and `features.json`.
    pub model_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub paths: Paths,
    pub synth: GeneratorConfig,
    pub pipeline: PipelineConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Sets every seed in the configuration to `seed`.
    pub fn apply_seed(&mut self, seed: u64) {
        self.synth.seed = seed;
        let p = &mut self.pipeline;
        p.cluster_seed = seed;
        p.lda_seed = seed;
        p.split_seed = seed;
        p.train.seed = seed;
        p.benchmark.forest_seed = seed;
        p.benchmark.balance_seed = seed;
        p.benchmark.fold_seed = seed;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.synth.validate().map_err(config_error)?;
        self.pipeline.validate().map_err(config_error)
    }

    /// Configured path, or `default_name` inside `out_dir`. A path set
    /// explicitly must exist.
    pub fn resolve(
        &self,
        set: &Option<PathBuf>,
        out_dir: &Path,
        default_name: &str,
    ) -> Result<PathBuf, CliError> {
        match set {
            Some(p) if !p.exists() => Err(CliError::Config(format!(
                "configured file {} does not exist",
                p.display()
            ))),
            Some(p) => Ok(p.clone()),
            None => Ok(out_dir.join(default_name)),
        }
    }

    pub fn seeds(&self) -> Vec<(&'static str, u64)> {
        let p = &self.pipeline;
        vec![
            ("synth", self.synth.seed),
            ("cluster", p.cluster_seed),
            ("lda", p.lda_seed),
            ("split", p.split_seed),
            ("train", p.train.seed),
            ("forest", p.benchmark.forest_seed),
            ("balance", p.benchmark.balance_seed),
            ("fold", p.benchmark.fold_seed),
        ]
    }
}

fn config_error(e: impostor::Error) -> CliError {
    CliError::Config(e.to_string())
}
