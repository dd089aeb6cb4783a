//! Hybrid sparse + dense message features.
//!
//! Sparse columns are counts of word n-grams and cue tokens, indexed by a
//! pruned, lexicographically ordered [`Vocabulary`]. Dense columns are
//! embedding blocks placed after the sparse ones; every dense block ends
//! with a presence flag so an undefined vector is distinguishable from a
//! zero vector.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::embedding::{
    average_vector, message_vector, relevance_score, select_top_relevant_words, CauseProfile, EmbeddingTable,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textproc::{keyword_contexts, AnnotatedMessage, Person, Pos, TokenKind};

pub const NEG_PREFIX: &str = "_NEG_";
pub const CTX_PREFIX: &str = "ctx_";
pub const KEYWORD_COUNT: &str = "<keyword_count>";
pub const MENTIONS_SELF: &str = "<mentions_self>";
pub const RETWEET: &str = "<retweet>";
pub const RETWEET_OF_SELF: &str = "<retweet_of_self>";

/// Named feature recipes.
pub const PRESETS: [&str; 4] = ["bow", "bow+cues", "embed", "best-combination"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CueFlags {
    pub negation: bool,
    pub persons: bool,
    pub keyword_count: bool,
    pub context_words: bool,
    pub self_interactions: bool,
    pub pos_counts: bool,
}

impl CueFlags {
    pub fn all() -> Self {
        Self {
            negation: true,
            persons: true,
            keyword_count: true,
            context_words: true,
            self_interactions: true,
            pos_counts: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DenseFlags {
    pub message_vector: bool,
    pub keywords_vector: bool,
    pub context_vector: bool,
    pub relevance_scalar: bool,
}

impl DenseFlags {
    pub fn all() -> Self {
        Self { message_vector: true, keywords_vector: true, context_vector: true, relevance_scalar: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Emit word n-grams at all. Off only for embedding-only recipes.
    pub ngrams: bool,
    pub ngram_min: usize,
    pub ngram_max: usize,
    /// Minimum absolute document frequency.
    pub min_df: usize,
    /// Maximum document frequency as a fraction of the corpus.
    pub max_df: f64,
    pub cues: CueFlags,
    pub dense: DenseFlags,
    /// Words averaged into the keywords vector.
    pub keywords_n: usize,
    /// Context words collected on each side of a keyword.
    pub context_window: usize,
    /// Z-score dense columns with training-set statistics.
    pub standardize_dense: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            ngrams: true,
            ngram_min: 1,
            ngram_max: 1,
            min_df: 1,
            max_df: 1.0,
            cues: CueFlags::default(),
            dense: DenseFlags::default(),
            keywords_n: 3,
            context_window: 1,
            standardize_dense: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.ngram_min && self.ngram_min <= self.ngram_max && self.ngram_max <= 3) {
            return Err(Error::InvalidArgument(format!(
                "n-gram range {}..={} must satisfy 1 <= min <= max <= 3",
                self.ngram_min, self.ngram_max
            )));
        }
        if self.min_df < 1 {
            return Err(Error::InvalidArgument("min_df must be at least 1".into()));
        }
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return Err(Error::InvalidArgument(format!("max_df {} outside (0, 1]", self.max_df)));
        }
        if self.dense.keywords_vector && self.keywords_n == 0 {
            return Err(Error::InvalidArgument("keywords_n must be positive".into()));
        }
        if self.cues.context_words && self.context_window == 0 {
            return Err(Error::InvalidArgument("context_window must be positive".into()));
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::default();
        match name {
            "bow" => Some(base),
            "bow+cues" => Some(Self { cues: CueFlags::all(), ..base }),
            "embed" => Some(Self { ngrams: false, dense: DenseFlags::all(), ..base }),
            "best-combination" => Some(Self { cues: CueFlags::all(), dense: DenseFlags::all(), ..base }),
            _ => None,
        }
    }
}

/// Cartesian grid over document-frequency bounds and n-gram order for each
/// named preset: `min_df × max_df × ngram_max × presets`.
pub fn feature_grid(presets: &[&str], min_dfs: &[usize], max_dfs: &[f64], ngram_maxes: &[usize]) -> Result<Vec<FeatureConfig>> {
    let mut grid = Vec::new();
    for name in presets {
        let base = FeatureConfig::preset(name).ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{name}`")))?;
        for &min_df in min_dfs {
            for &max_df in max_dfs {
                for &ngram_max in ngram_maxes {
                    let cfg = FeatureConfig { min_df, max_df, ngram_max, ..base.clone() };
                    cfg.validate()?;
                    grid.push(cfg);
                }
            }
        }
    }
    Ok(grid)
}

/// The default search grid: min_df ∈ {1,3,5}, max_df ∈ {0.6,0.8,1.0},
/// ngram_max ∈ {1,2,3} over all presets.
pub fn default_feature_grid() -> Vec<FeatureConfig> {
    feature_grid(&PRESETS, &[1, 3, 5], &[0.6, 0.8, 1.0], &[1, 2, 3]).expect("default grid is valid")
}

/// Feature name → column index, ordered lexicographically by name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    pub index: BTreeMap<String, usize>,
    /// Document frequency per column, in column order.
    pub document_frequencies: Vec<usize>,
    pub n_documents: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Names in column order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenseBlock {
    MessageVector,
    KeywordsVector,
    ContextVector,
    Relevance,
}

impl DenseBlock {
    fn label(self) -> &'static str {
        match self {
            DenseBlock::MessageVector => "mvec",
            DenseBlock::KeywordsVector => "kvec",
            DenseBlock::ContextVector => "cvec",
            DenseBlock::Relevance => "relevance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSpan {
    pub block: DenseBlock,
    /// Offset within the dense part.
    pub offset: usize,
    pub len: usize,
}

/// Offsets of the enabled dense blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DenseLayout {
    pub spans: Vec<DenseSpan>,
}

impl DenseLayout {
    pub fn new(flags: &DenseFlags, dimension: usize) -> Self {
        let mut spans = Vec::new();
        let mut offset = 0;
        let mut push = |enabled: bool, block: DenseBlock, len: usize| {
            if enabled {
                spans.push(DenseSpan { block, offset, len });
                offset += len;
            }
        };
        push(flags.message_vector, DenseBlock::MessageVector, dimension + 1);
        push(flags.keywords_vector, DenseBlock::KeywordsVector, dimension + 1);
        push(flags.context_vector, DenseBlock::ContextVector, dimension + 1);
        push(flags.relevance_scalar, DenseBlock::Relevance, 2);
        Self { spans }
    }

    pub fn width(&self) -> usize {
        self.spans.iter().map(|s| s.len).sum()
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for span in &self.spans {
            let label = span.block.label();
            if span.block == DenseBlock::Relevance {
                names.push(label.to_string());
            } else {
                names.extend((0..span.len - 1).map(|i| format!("{label}_{i}")));
            }
            names.push(format!("{label}_present"));
        }
        names
    }
}

/// One message as sparse counts over a vocabulary plus dense blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    /// `(column, count)` with strictly increasing columns.
    pub sparse: Vec<(usize, u32)>,
    pub dense: Vec<T>,
    /// Number of sparse columns; dense column `j` is column `sparse_width + j`.
    pub sparse_width: usize,
}

impl<T: Scalar> FeatureVector<T> {
    /// Dense-only vector, for callers that build design rows directly.
    pub fn from_dense(dense: Vec<T>) -> Self {
        Self { sparse: Vec::new(), dense, sparse_width: 0 }
    }

    pub fn width(&self) -> usize {
        self.sparse_width + self.dense.len()
    }

    pub fn dot(&self, weights: &[T]) -> T {
        let sparse = self.sparse.iter().fold(T::zero(), |acc, &(i, c)| acc + weights[i] * T::from(c).unwrap());
        let dense = self.dense.iter().zip(&weights[self.sparse_width..]).fold(T::zero(), |acc, (&x, &w)| acc + x * w);
        sparse + dense
    }

    /// Adds `scale * x` into `out`.
    pub fn axpy(&self, scale: T, out: &mut [T]) {
        for &(i, c) in &self.sparse {
            out[i] = out[i] + scale * T::from(c).unwrap();
        }
        for (o, &x) in out[self.sparse_width..].iter_mut().zip(&self.dense) {
            *o = *o + scale * x;
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.width()];
        self.axpy(T::one(), &mut out);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.dense.iter().all(|x| x.is_finite())
    }
}

/// Turns annotated messages into feature vectors for one cause.
#[derive(Debug, Clone)]
pub struct Featurizer<'a, T> {
    config: FeatureConfig,
    table: &'a EmbeddingTable<T>,
    profile: &'a CauseProfile<T>,
    keywords: HashSet<String>,
    layout: DenseLayout,
}

impl<'a, T: Scalar> Featurizer<'a, T> {
    pub fn new(config: FeatureConfig, table: &'a EmbeddingTable<T>, profile: &'a CauseProfile<T>) -> Result<Self> {
        config.validate()?;
        if profile.cause_vector.len() != table.dimension() {
            return Err(Error::DimensionMismatch { expected: table.dimension(), found: profile.cause_vector.len() });
        }
        let layout = DenseLayout::new(&config.dense, table.dimension());
        Ok(Self { keywords: profile.keyword_set(), config, table, profile, layout })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn dense_layout(&self) -> &DenseLayout {
        &self.layout
    }

    pub fn table(&self) -> &'a EmbeddingTable<T> {
        self.table
    }

    /// Sparse feature names of a message, repeated once per occurrence.
    pub fn sparse_terms(&self, msg: &AnnotatedMessage) -> Vec<String> {
        let cfg = &self.config;
        let mut terms = Vec::new();

        if cfg.ngrams {
            // Runs of words and hashtags; n-grams never cross other tokens.
            let mut segment: Vec<&str> = Vec::new();
            let flush = |segment: &mut Vec<&str>, terms: &mut Vec<String>| {
                for n in cfg.ngram_min..=cfg.ngram_max {
                    terms.extend(segment.windows(n).map(|w| w.join(" ")));
                }
                segment.clear();
            };
            for t in &msg.tokens {
                if matches!(t.kind, TokenKind::Word | TokenKind::Hashtag) {
                    segment.push(&t.surface);
                } else {
                    flush(&mut segment, &mut terms);
                }
            }
            flush(&mut segment, &mut terms);
        }

        if cfg.cues.negation {
            terms.extend(msg.tokens.iter().filter(|t| t.is_word() && t.negated).map(|t| format!("{NEG_PREFIX}{}", t.surface)));
        }
        if cfg.cues.persons {
            for p in Person::ALL {
                terms.extend(std::iter::repeat_n(p.marker().to_string(), msg.person_markers.get(p)));
            }
        }
        if cfg.cues.keyword_count {
            let n = msg.tokens.iter().filter(|t| t.is_word() && self.keywords.contains(&t.surface)).count();
            terms.extend(std::iter::repeat_n(KEYWORD_COUNT.to_string(), n));
        }
        if cfg.cues.context_words {
            terms.extend(
                keyword_contexts(&msg.tokens, &self.keywords, cfg.context_window)
                    .into_iter()
                    .map(|w| format!("{CTX_PREFIX}{w}")),
            );
        }
        if cfg.cues.self_interactions {
            for (flag, name) in [(msg.mentions_self, MENTIONS_SELF), (msg.is_retweet, RETWEET), (msg.retweet_of_self, RETWEET_OF_SELF)] {
                if flag {
                    terms.push(name.to_string());
                }
            }
        }
        if cfg.cues.pos_counts {
            for (pos, n) in msg.pos_counts() {
                if pos != Pos::Other {
                    terms.extend(std::iter::repeat_n(pos_feature(pos), n));
                }
            }
        }
        terms
    }

    /// Collects features over the corpus and prunes them by document
    /// frequency: kept iff `min_df <= df <= max_df * |corpus|`.
    pub fn build_vocabulary(&self, corpus: &[AnnotatedMessage]) -> Result<Vocabulary> {
        if corpus.is_empty() {
            return Err(Error::Empty("corpus for vocabulary"));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for msg in corpus {
            let unique: HashSet<String> = self.sparse_terms(msg).into_iter().collect();
            for term in unique {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let max_count = self.config.max_df * corpus.len() as f64;
        let kept: BTreeMap<String, usize> =
            df.into_iter().filter(|&(_, d)| d >= self.config.min_df && d as f64 <= max_count).collect();
        let document_frequencies = kept.values().copied().collect();
        let index = kept.into_keys().enumerate().map(|(i, name)| (name, i)).collect();
        Ok(Vocabulary { index, document_frequencies, n_documents: corpus.len() })
    }

    pub fn dense_features(&self, msg: &AnnotatedMessage) -> Vec<T> {
        let mut dense = Vec::with_capacity(self.layout.width());
        let terms = msg.embedding_terms();
        let d = self.table.dimension();
        let push_vector = |v: Option<Vec<T>>, dense: &mut Vec<T>| match v {
            Some(v) => {
                dense.extend(v);
                dense.push(T::one());
            }
            None => dense.extend(std::iter::repeat_n(T::zero(), d + 1)),
        };
        for span in &self.layout.spans {
            match span.block {
                DenseBlock::MessageVector => push_vector(message_vector(&terms, self.table), &mut dense),
                DenseBlock::KeywordsVector => {
                    let top = select_top_relevant_words(&terms, self.profile, self.table, self.config.keywords_n);
                    let vectors: Vec<&[T]> = top.iter().filter_map(|w| self.table.get(w)).collect();
                    push_vector(average_vector(&vectors).ok(), &mut dense);
                }
                DenseBlock::ContextVector => {
                    let ctx = keyword_contexts(&msg.tokens, &self.keywords, self.config.context_window);
                    push_vector(message_vector(&ctx, self.table), &mut dense);
                }
                DenseBlock::Relevance => match relevance_score(&terms, self.profile, self.table).value() {
                    Some(s) => dense.extend([s, T::one()]),
                    None => dense.extend([T::zero(), T::zero()]),
                },
            }
        }
        dense
    }

    /// Features of one message. Terms outside the vocabulary are dropped.
    pub fn featurize(&self, msg: &AnnotatedMessage, vocab: &Vocabulary) -> FeatureVector<T> {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for term in self.sparse_terms(msg) {
            if let Some(i) = vocab.get(&term) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        FeatureVector { sparse: counts.into_iter().collect(), dense: self.dense_features(msg), sparse_width: vocab.len() }
    }

    pub fn featurize_all(&self, corpus: &[AnnotatedMessage], vocab: &Vocabulary) -> Vec<FeatureVector<T>> {
        use rayon::prelude::*;
        corpus.par_iter().map(|m| self.featurize(m, vocab)).collect()
    }
}

pub fn pos_feature(pos: Pos) -> String {
    format!("<pos_{}>", pos.name())
}

/// Column names: sparse names in index order, then dense block labels.
pub fn feature_names(vocab: &Vocabulary, config: &FeatureConfig, dimension: usize) -> Vec<String> {
    let mut names: Vec<String> = vocab.names().map(str::to_string).collect();
    names.extend(DenseLayout::new(&config.dense, dimension).names());
    names
}
