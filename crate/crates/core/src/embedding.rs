//! Word-embedding tables, cause vectors and relevance scoring.
//!
//! A message is scored against a cause by the cosine between the mean vector
//! of its in-vocabulary words and the mean vector of the cause's seed
//! keywords. Messages without any resolvable word have an undefined score and
//! never pass the relevance gate.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Default minimum relevance score for a message to count as on-cause.
pub const DEFAULT_RELEVANCE_THRESHOLD: f64 = 0.3;

/// Default number of expanded keywords per cause.
pub const DEFAULT_EXPANSION_SIZE: usize = 100;

const TOY_TABLE: &str = include_str!("../data/toy_embeddings.txt");

/// Synthetic tokens such as `<url>` or `<first_person>` are never looked up.
pub fn is_marker_token(token: &str) -> bool {
    token.len() > 2 && token.starts_with('<') && token.ends_with('>')
}

fn fold_case(word: &str) -> std::borrow::Cow<'_, str> {
    if word.chars().any(char::is_uppercase) {
        std::borrow::Cow::Owned(word.to_lowercase())
    } else {
        std::borrow::Cow::Borrowed(word)
    }
}

/// Immutable word → vector map with a fixed dimension. Keys are case-folded.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(Self { dimension, words: Vec::new(), index: HashMap::new(), data: Vec::new() })
    }

    /// Inserts a vector; returns `false` and keeps the existing entry when the
    /// (case-folded) word is already present.
    pub fn insert(&mut self, word: &str, vector: &[T]) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: vector.len() });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding vector"));
        }
        let key = fold_case(word).into_owned();
        if self.index.contains_key(&key) {
            return Ok(false);
        }
        self.index.insert(key.clone(), self.words.len());
        self.words.push(key);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        let &i = self.index.get(fold_case(word).as_ref())?;
        Some(&self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(fold_case(word).as_ref())
    }

    /// Entries in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> + '_ {
        self.words
            .iter()
            .zip(self.data.chunks_exact(self.dimension))
            .map(|(w, v)| (w.as_str(), v))
    }

    /// Small bundled table (16 dimensions) with eco, health, leisure and
    /// politics clusters plus common function words. Meant for tests and demos.
    pub fn toy() -> Self {
        load_embeddings(TOY_TABLE.as_bytes()).expect("bundled toy table parses")
    }
}

/// Parses the plain-text embedding format: one `word v1 … vd` entry per line,
/// with an optional `count d` header line. Duplicate words keep their first
/// occurrence.
pub fn load_embeddings<T: Scalar, R: BufRead>(reader: R) -> Result<EmbeddingTable<T>> {
    let mut table: Option<EmbeddingTable<T>> = None;
    let mut buf: Vec<T> = Vec::new();
    let mut first_content_line = true;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();

        if first_content_line {
            first_content_line = false;
            if let ([dim], Ok(_count)) = (rest.as_slice(), word.parse::<usize>()) {
                if let Ok(d) = dim.parse::<usize>() {
                    table = Some(EmbeddingTable::new(d).map_err(|_| Error::Format {
                        line: line_no,
                        message: "header declares zero dimension".into(),
                    })?);
                    continue;
                }
            }
        }

        if rest.is_empty() {
            return Err(Error::Format { line: line_no, message: format!("entry `{word}` has no vector") });
        }
        buf.clear();
        for field in &rest {
            let value: T = field.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("unparsable value `{field}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Format { line: line_no, message: format!("non-finite value `{field}`") });
            }
            buf.push(value);
        }
        let table = match table.as_mut() {
            Some(t) => t,
            None => table.insert(EmbeddingTable::new(buf.len())?),
        };
        if buf.len() != table.dimension() {
            return Err(Error::Format { line: line_no, message: "dimension mismatch".into() });
        }
        table.insert(word, &buf)?;
    }

    match table {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(Error::Empty("embedding stream has no entries")),
    }
}

/// Cosine of the angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let na = dot(a, a);
    let nb = dot(b, b);
    if na <= T::zero() || nb <= T::zero() {
        return Err(Error::UndefinedSimilarity);
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): cos(v, v) comes out as exactly 1.
    let denom = (na * nb).sqrt();
    let cos = if denom.is_finite() && denom > T::zero() {
        dot(a, b) / denom
    } else {
        dot(a, b) / (na.sqrt() * nb.sqrt())
    };
    Ok(cos.max(-T::one()).min(T::one()))
}

/// Componentwise mean of a nonempty list of equal-length vectors.
pub fn average_vector<T: Scalar, V: AsRef<[T]>>(vectors: &[V]) -> Result<Vec<T>> {
    let first = vectors.first().ok_or(Error::Empty("no vectors to average"))?.as_ref();
    let mut sum = first.to_vec();
    for v in &vectors[1..] {
        let v = v.as_ref();
        if v.len() != sum.len() {
            return Err(Error::DimensionMismatch { expected: sum.len(), found: v.len() });
        }
        for (s, &x) in sum.iter_mut().zip(v) {
            *s = *s + x;
        }
    }
    let n = T::from_count(vectors.len());
    sum.iter_mut().for_each(|s| *s = *s / n);
    Ok(sum)
}

/// A cause: its seed keywords, their mean vector, and the nearest other
/// vocabulary words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CauseProfile<T> {
    pub name: String,
    pub seed_keywords: Vec<String>,
    pub cause_vector: Vec<T>,
    pub expanded_keywords: Vec<String>,
}

impl<T: Scalar> CauseProfile<T> {
    /// Seed and expanded keywords together.
    pub fn keyword_set(&self) -> HashSet<String> {
        self.seed_keywords.iter().chain(&self.expanded_keywords).cloned().collect()
    }
}

/// Builds a cause profile. Seeds missing from the table are ignored; at least
/// one must resolve. Expansion ranks every non-seed word by cosine to the
/// cause vector, ties broken by word order.
pub fn build_cause_profile<T: Scalar, S: AsRef<str>>(
    name: &str,
    seed_keywords: &[S],
    table: &EmbeddingTable<T>,
    expansion_size: usize,
) -> Result<CauseProfile<T>> {
    let mut seeds: Vec<String> = Vec::new();
    for s in seed_keywords {
        let folded = fold_case(s.as_ref().trim()).into_owned();
        if !folded.is_empty() && !seeds.contains(&folded) {
            seeds.push(folded);
        }
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument(format!("cause `{name}` has no seed keywords")));
    }
    let resolved: Vec<&[T]> = seeds.iter().filter_map(|s| table.get(s)).collect();
    if resolved.is_empty() {
        return Err(Error::NoResolvableSeeds(name.to_string()));
    }
    let cause_vector = average_vector(&resolved)?;

    let expanded_keywords = if expansion_size == 0 {
        Vec::new()
    } else {
        let seed_set: HashSet<&str> = seeds.iter().map(String::as_str).collect();
        let mut scored: Vec<(T, &str)> = table
            .iter()
            .filter(|(w, _)| !seed_set.contains(w))
            .filter_map(|(w, v)| cosine_similarity(v, &cause_vector).ok().map(|c| (c, w)))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite cosines").then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(expansion_size).map(|(_, w)| w.to_string()).collect()
    };

    Ok(CauseProfile { name: name.to_string(), seed_keywords: seeds, cause_vector, expanded_keywords })
}

/// Mean vector of the in-vocabulary tokens; `None` when no token resolves.
/// Marker tokens are skipped.
pub fn message_vector<T: Scalar, S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable<T>) -> Option<Vec<T>> {
    let resolved: Vec<&[T]> = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_marker_token(t))
        .filter_map(|t| table.get(t))
        .collect();
    if resolved.is_empty() {
        None
    } else {
        average_vector(&resolved).ok()
    }
}

/// Cosine between a message vector and a cause vector, or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", transparent)]
pub struct RelevanceScore<T>(pub Option<T>);

impl<T: Scalar> RelevanceScore<T> {
    pub const UNDEFINED: Self = RelevanceScore(None);

    pub fn value(self) -> Option<T> {
        self.0
    }

    pub fn is_defined(self) -> bool {
        self.0.is_some()
    }

    /// Undefined scores never pass.
    pub fn passes(self, threshold: T) -> bool {
        matches!(self.0, Some(s) if s >= threshold)
    }
}

pub fn relevance_score<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    profile: &CauseProfile<T>,
    table: &EmbeddingTable<T>,
) -> RelevanceScore<T> {
    let score = message_vector(tokens, table).and_then(|mv| cosine_similarity(&mv, &profile.cause_vector).ok());
    RelevanceScore(score)
}

/// The `n` distinct in-vocabulary tokens closest to the cause vector, in
/// descending cosine order; ties keep first-occurrence order.
pub fn select_top_relevant_words<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    profile: &CauseProfile<T>,
    table: &EmbeddingTable<T>,
    n: usize,
) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut scored: Vec<(T, String)> = Vec::new();
    for token in tokens.iter().map(AsRef::as_ref) {
        if is_marker_token(token) {
            continue;
        }
        let key = fold_case(token).into_owned();
        if seen.contains(&key) {
            continue;
        }
        if let Some(v) = table.get(&key) {
            seen.insert(key.clone());
            if let Ok(c) = cosine_similarity(v, &profile.cause_vector) {
                scored.push((c, key));
            }
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite cosines"));
    scored.into_iter().take(n).map(|(_, w)| w).collect()
}
