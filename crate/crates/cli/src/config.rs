//! Run configuration: one TOML file, overridable from the command line.

use serde::{Deserialize, Serialize};
use specbench_core::genrepair::{ModelConfig, PromptStyle};
use specbench_core::mutate::MutationOperator;
use specbench_core::verify::VerifierConfig;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelBackend {
    #[default]
    Http,
    Scripted,
    Replay,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub backend: ModelBackend,
    /// JSON object `{record_id: [response, ...]}` for the scripted backend.
    pub script: Option<PathBuf>,
    /// Recorded responses (JSON lines) for the replay backend.
    pub replay: Option<PathBuf>,
    #[serde(flatten)]
    pub config: ModelConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifierKind {
    #[default]
    Process,
    Replay,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifierSection {
    pub backend: VerifierKind,
    pub replay_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub config: VerifierConfig,
}

/// Which corpus the generate/verify stages run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantSet {
    /// Base records and every applicable variant.
    #[default]
    All,
    /// Base records and the natural half of the variants.
    Natural,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub out: PathBuf,
    pub label: String,
    pub style: String,
    /// Annotated Java files used as demonstrations.
    pub demos: Vec<PathBuf>,
    pub variants: VariantSet,
    /// Mutation operators by name or code; empty means all.
    pub operators: Vec<String>,
    pub max_repair_iters: usize,
    /// Verifier calls for the spec-mutation fallback; off when unset.
    pub mutation_budget: Option<usize>,
    pub workers: usize,
    /// Reserved: nothing in the pipeline draws random numbers.
    pub seed: u64,
    pub cr_all_specs: bool,
    pub top_k: usize,
    pub ngram_order: usize,
    pub prompts: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub model: ModelSection,
    pub verifier: VerifierSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            out: PathBuf::from("specbench-out"),
            label: "model".into(),
            style: "ZeroShot".into(),
            demos: Vec::new(),
            variants: VariantSet::All,
            operators: Vec::new(),
            max_repair_iters: 5,
            mutation_budget: None,
            workers: 4,
            seed: 0,
            cr_all_specs: false,
            top_k: 10,
            ngram_order: 3,
            prompts: None,
            patterns: None,
            model: ModelSection::default(),
            verifier: VerifierSection::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    /// Reads a config file; relative paths in it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.corpus.as_mut().map(fix);
        fix(&mut cfg.out);
        cfg.demos.iter_mut().for_each(fix);
        cfg.prompts.as_mut().map(fix);
        cfg.patterns.as_mut().map(fix);
        cfg.model.script.as_mut().map(fix);
        cfg.model.replay.as_mut().map(fix);
        cfg.verifier.replay_dir.as_mut().map(fix);
        Ok(cfg)
    }

    pub fn style(&self) -> Result<PromptStyle, ConfigError> {
        self.style.parse().map_err(ConfigError)
    }

    pub fn operators(&self) -> Result<BTreeSet<MutationOperator>, ConfigError> {
        if self.operators.is_empty() {
            return Ok(MutationOperator::all());
        }
        self.operators.iter().map(|o| o.parse::<MutationOperator>().map_err(ConfigError)).collect()
    }

    /// Checks values and that every referenced file exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let exists = |what: &str, p: &Option<PathBuf>| match p {
            Some(p) if !p.exists() => Err(ConfigError(format!("{what} {} does not exist", p.display()))),
            _ => Ok(()),
        };
        exists("corpus", &self.corpus)?;
        exists("prompt templates", &self.prompts)?;
        exists("pattern table", &self.patterns)?;
        for d in &self.demos {
            exists("demo", &Some(d.clone()))?;
        }
        self.style()?;
        self.operators()?;
        if self.workers == 0 {
            return Err(ConfigError("workers must be at least 1".into()));
        }
        if self.max_repair_iters == 0 {
            return Err(ConfigError("max_repair_iters must be at least 1".into()));
        }
        if self.mutation_budget == Some(0) {
            return Err(ConfigError("mutation_budget must be at least 1".into()));
        }
        self.model.config.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.verifier.config.validate().map_err(|e| ConfigError(e.to_string()))?;
        match self.model.backend {
            ModelBackend::Scripted if self.model.script.is_none() => {
                return Err(ConfigError("model.backend = \"scripted\" needs model.script".into()))
            }
            ModelBackend::Replay if self.model.replay.is_none() => {
                return Err(ConfigError("model.backend = \"replay\" needs model.replay".into()))
            }
            _ => {}
        }
        exists("model script", &self.model.script)?;
        exists("model replay", &self.model.replay)?;
        if self.verifier.backend == VerifierKind::Replay && self.verifier.replay_dir.is_none() {
            return Err(ConfigError("verifier.backend = \"replay\" needs verifier.replay_dir".into()));
        }
        exists("verifier replay dir", &self.verifier.replay_dir)?;
        Ok(())
    }

    /// Canonical text of the effective config, hashed into provenance.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
