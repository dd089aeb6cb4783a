//! Run configuration document and flag overrides.

use std::path::{Path, PathBuf};

use causecommit::embedding::{DEFAULT_EXPANSION_SIZE, DEFAULT_RELEVANCE_THRESHOLD};
use causecommit::features::{feature_grid, FeatureConfig};
use causecommit::learn::{DEFAULT_LAMBDAS, GridPoint};
use causecommit::pipeline::DEFAULT_TAU;
use causecommit::audit::DEFAULT_TOP_K;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MessageFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauseSpec {
    pub name: String,
    pub seed_keywords: Vec<String>,
    #[serde(default = "default_expansion")]
    pub expansion_size: usize,
}

fn default_expansion() -> usize {
    DEFAULT_EXPANSION_SIZE
}

/// Feature/lambda grid for model selection. Each axis defaults to the full
/// default grid when left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub presets: Vec<String>,
    pub min_dfs: Vec<usize>,
    pub max_dfs: Vec<f64>,
    pub ngram_maxes: Vec<usize>,
    pub lambdas: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            presets: causecommit::features::PRESETS.iter().map(|s| s.to_string()).collect(),
            min_dfs: vec![1, 2, 3],
            max_dfs: vec![0.5, 0.8, 1.0],
            ngram_maxes: vec![1, 2, 3],
            lambdas: DEFAULT_LAMBDAS.to_vec(),
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<GridPoint<f64>>, CliError> {
        let presets: Vec<&str> = self.presets.iter().map(String::as_str).collect();
        let configs = feature_grid(&presets, &self.min_dfs, &self.max_dfs, &self.ngram_maxes)
            .map_err(|e| CliError::Usage(format!("invalid grid: {e}")))?;
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(CliError::Usage("grid lambdas must be a non-empty list of positive numbers".into()));
        }
        Ok(causecommit::learn::grid_points(&configs, &self.lambdas))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    pub positive: PathBuf,
    pub negative: PathBuf,
}

/// The JSON run configuration. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cause: Option<CauseSpec>,
    /// Embedding text file; the bundled toy table when absent.
    pub embeddings: Option<PathBuf>,
    pub messages: Option<PathBuf>,
    pub format: MessageFormat,
    pub labels: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub relevance_threshold: f64,
    /// Named feature preset; ignored when `features` is given.
    pub preset: Option<String>,
    pub features: Option<FeatureConfig>,
    pub lambda: f64,
    /// When present, `train` and `cv` select features and lambda by grid search.
    pub grid: Option<GridSpec>,
    pub folds: usize,
    pub seed: Option<u64>,
    pub tau: f64,
    pub top_k: usize,
    pub per_entity_top_n: usize,
    pub lexicon: Option<LexiconPaths>,
    pub support_model: Option<PathBuf>,
    pub commitment_model: Option<PathBuf>,
    pub classifications: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cause: None,
            embeddings: None,
            messages: None,
            format: MessageFormat::Jsonl,
            labels: None,
            ratings: None,
            relevance_threshold: DEFAULT_RELEVANCE_THRESHOLD,
            preset: None,
            features: None,
            lambda: 1.0,
            grid: None,
            folds: 10,
            seed: None,
            tau: DEFAULT_TAU,
            top_k: DEFAULT_TOP_K,
            per_entity_top_n: 1,
            lexicon: None,
            support_model: None,
            commitment_model: None,
            classifications: None,
        }
    }
}

/// Flag values that take precedence over the config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub tau: Option<f64>,
    pub top_k: Option<usize>,
    pub folds: Option<usize>,
    pub format: Option<MessageFormat>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.embeddings);
        fix(&mut self.messages);
        fix(&mut self.labels);
        fix(&mut self.ratings);
        fix(&mut self.support_model);
        fix(&mut self.commitment_model);
        fix(&mut self.classifications);
        if let Some(lex) = &mut self.lexicon {
            for p in [&mut lex.positive, &mut lex.negative] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = Some(v);
        }
        if let Some(v) = o.threshold {
            self.relevance_threshold = v;
        }
        if let Some(v) = o.tau {
            self.tau = v;
        }
        if let Some(v) = o.top_k {
            self.top_k = v;
        }
        if let Some(v) = o.folds {
            self.folds = v;
        }
        if let Some(v) = o.format {
            self.format = v;
        }
    }

    /// Range checks, and every input path that is set must exist.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(-1.0..=1.0).contains(&self.relevance_threshold) {
            return usage(format!("threshold {} outside [-1, 1]", self.relevance_threshold));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return usage(format!("tau {} outside [0, 1]", self.tau));
        }
        if self.top_k == 0 {
            return usage("top-k must be at least 1".into());
        }
        if self.folds < 2 {
            return usage("folds must be at least 2".into());
        }
        if self.per_entity_top_n == 0 {
            return usage("per_entity_top_n must be at least 1".into());
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return usage(format!("lambda {} must be positive", self.lambda));
        }
        if let Some(c) = &self.cause {
            if c.name.trim().is_empty() || c.seed_keywords.is_empty() {
                return usage("cause needs a name and at least one seed keyword".into());
            }
        }
        self.feature_config()?;
        if let Some(g) = &self.grid {
            g.points()?;
        }
        let lex = self.lexicon.iter().flat_map(|l| [&l.positive, &l.negative]);
        for p in [&self.embeddings, &self.messages, &self.labels, &self.ratings].into_iter().flatten().chain(lex) {
            if !p.exists() {
                return usage(format!("input file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn feature_config(&self) -> Result<FeatureConfig, CliError> {
        let cfg = match (&self.features, &self.preset) {
            (Some(f), _) => f.clone(),
            (None, Some(name)) => FeatureConfig::preset(name)
                .ok_or_else(|| CliError::Usage(format!("unknown feature preset `{name}`")))?,
            (None, None) => FeatureConfig::preset("best-combination").expect("known preset"),
        };
        cfg.validate().map_err(|e| CliError::Usage(format!("invalid features: {e}")))?;
        Ok(cfg)
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        value.as_deref().ok_or_else(|| CliError::Usage(format!("config key `{key}` is required for this command")))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("a seed is required (--seed or config `seed`)".into()))
    }

    pub fn require_cause(&self) -> Result<&CauseSpec, CliError> {
        self.cause.as_ref().ok_or_else(|| CliError::Usage("config key `cause` is required for this command".into()))
    }
}
