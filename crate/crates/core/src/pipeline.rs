//! Relevance gate → support classifier → commitment classifier.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{relevance_score, CauseProfile, EmbeddingTable, RelevanceScore};
use crate::error::{Error, Result};
use crate::features::Featurizer;
use crate::learn::{LogisticModel, Stage};
use crate::scalar::Scalar;
use crate::textproc::AnnotatedMessage;

/// Default posterior above which a prediction counts as confident.
pub const DEFAULT_TAU: f64 = 0.7;

/// Default stage decision boundary.
pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.5;

/// Commitment labels of the 4-point annotation scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommitmentLabel {
    /// Not about the cause.
    NotAbout = 0,
    /// About the cause, no support expressed.
    NoSupport = 1,
    /// Support in words only.
    LowCommitment = 2,
    /// Claims action taken for the cause.
    HighCommitment = 3,
}

impl CommitmentLabel {
    pub const ALL: [CommitmentLabel; 4] =
        [CommitmentLabel::NotAbout, CommitmentLabel::NoSupport, CommitmentLabel::LowCommitment, CommitmentLabel::HighCommitment];

    pub fn value(self) -> u8 {
        self as u8
    }
}

impl TryFrom<i64> for CommitmentLabel {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            0 => Ok(CommitmentLabel::NotAbout),
            1 => Ok(CommitmentLabel::NoSupport),
            2 => Ok(CommitmentLabel::LowCommitment),
            3 => Ok(CommitmentLabel::HighCommitment),
            _ => Err(Error::InvalidArgument(format!("label {v} outside 0..=3"))),
        }
    }
}

/// Outcome of the two-stage scheme. Stage 1 does not separate labels 0 and
/// 1, so both land in `NonSupport`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FinalLabel {
    #[serde(rename = "IRRELEVANT")]
    Irrelevant,
    #[serde(rename = "0/1")]
    NonSupport,
    #[serde(rename = "2")]
    LowCommitment,
    #[serde(rename = "3")]
    HighCommitment,
}

impl FinalLabel {
    pub const ALL: [FinalLabel; 4] =
        [FinalLabel::Irrelevant, FinalLabel::NonSupport, FinalLabel::LowCommitment, FinalLabel::HighCommitment];

    pub fn as_str(self) -> &'static str {
        match self {
            FinalLabel::Irrelevant => "IRRELEVANT",
            FinalLabel::NonSupport => "0/1",
            FinalLabel::LowCommitment => "2",
            FinalLabel::HighCommitment => "3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MessageClassification<T> {
    pub message_id: String,
    pub entity_id: String,
    pub relevance: RelevanceScore<T>,
    /// P(SUPPORT); absent when the gate rejected the message.
    pub p_support: Option<T>,
    /// P(HIGH_COMMIT); present only for supporting messages.
    pub p_high: Option<T>,
    pub final_label: FinalLabel,
}

impl<T: Scalar> MessageClassification<T> {
    pub fn irrelevant(message_id: &str, entity_id: &str, relevance: RelevanceScore<T>) -> Self {
        Self {
            message_id: message_id.into(),
            entity_id: entity_id.into(),
            relevance,
            p_support: None,
            p_high: None,
            final_label: FinalLabel::Irrelevant,
        }
    }

    /// Posterior of the assigned side at the last stage taken. Gate
    /// rejections are deterministic and report 1.
    pub fn confidence(&self) -> T {
        match self.final_label {
            FinalLabel::Irrelevant => T::one(),
            FinalLabel::NonSupport => T::one() - self.p_support.unwrap_or(T::zero()),
            FinalLabel::LowCommitment => T::one() - self.p_high.unwrap_or(T::zero()),
            FinalLabel::HighCommitment => self.p_high.unwrap_or(T::zero()),
        }
    }

    pub fn is_confident(&self, tau: T) -> bool {
        self.confidence() > tau
    }
}

/// Classifications whose confidence exceeds `tau`.
pub fn confident_subset<T: Scalar>(classifications: &[MessageClassification<T>], tau: T) -> Vec<&MessageClassification<T>> {
    classifications.iter().filter(|c| c.is_confident(tau)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageError {
    pub message_id: String,
    pub entity_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CorpusClassification<T> {
    pub classifications: Vec<MessageClassification<T>>,
    pub errors: Vec<MessageError>,
}

/// The two trained stages plus the cause they were trained for.
#[derive(Debug)]
pub struct Pipeline<'a, T> {
    support: &'a LogisticModel<T>,
    commitment: &'a LogisticModel<T>,
    support_features: Featurizer<'a, T>,
    commitment_features: Featurizer<'a, T>,
    profile: &'a CauseProfile<T>,
    table: &'a EmbeddingTable<T>,
    relevance_threshold: T,
    decision_threshold: T,
    support_calls: AtomicUsize,
    commitment_calls: AtomicUsize,
}

impl<'a, T: Scalar> Pipeline<'a, T> {
    pub fn new(
        support: &'a LogisticModel<T>,
        commitment: &'a LogisticModel<T>,
        profile: &'a CauseProfile<T>,
        table: &'a EmbeddingTable<T>,
        relevance_threshold: T,
    ) -> Result<Self> {
        if support.stage != Stage::Support || commitment.stage != Stage::Commitment {
            return Err(Error::InvalidArgument("models must be tagged support and commitment respectively".into()));
        }
        if !(relevance_threshold >= -T::one() && relevance_threshold <= T::one()) {
            return Err(Error::InvalidArgument(format!("relevance threshold {relevance_threshold} outside [-1, 1]")));
        }
        Ok(Self {
            support_features: support.featurizer(table, profile)?,
            commitment_features: commitment.featurizer(table, profile)?,
            support,
            commitment,
            profile,
            table,
            relevance_threshold,
            decision_threshold: T::lit(DEFAULT_DECISION_THRESHOLD),
            support_calls: AtomicUsize::new(0),
            commitment_calls: AtomicUsize::new(0),
        })
    }

    pub fn with_decision_threshold(mut self, threshold: T) -> Self {
        self.decision_threshold = threshold;
        self
    }

    /// Number of support and commitment model evaluations so far.
    pub fn stage_calls(&self) -> (usize, usize) {
        (self.support_calls.load(Ordering::Relaxed), self.commitment_calls.load(Ordering::Relaxed))
    }

    pub fn classify_message(&self, msg: &AnnotatedMessage) -> Result<MessageClassification<T>> {
        let relevance = relevance_score(&msg.embedding_terms(), self.profile, self.table);
        let mut out = MessageClassification::irrelevant(&msg.raw.message_id, &msg.raw.entity_id, relevance);
        if !relevance.passes(self.relevance_threshold) {
            return Ok(out);
        }

        let fv = self.support_features.featurize(msg, &self.support.vocabulary);
        self.support_calls.fetch_add(1, Ordering::Relaxed);
        let p_support = self.support.predict_proba(&fv)?;
        out.p_support = Some(p_support);
        if p_support < self.decision_threshold {
            out.final_label = FinalLabel::NonSupport;
            return Ok(out);
        }

        let fv = self.commitment_features.featurize(msg, &self.commitment.vocabulary);
        self.commitment_calls.fetch_add(1, Ordering::Relaxed);
        let p_high = self.commitment.predict_proba(&fv)?;
        out.p_high = Some(p_high);
        out.final_label =
            if p_high >= self.decision_threshold { FinalLabel::HighCommitment } else { FinalLabel::LowCommitment };
        Ok(out)
    }

    /// Classifies every message in order. Per-message failures are collected
    /// in `errors` and the message is skipped.
    pub fn classify_corpus(&self, messages: &[AnnotatedMessage]) -> CorpusClassification<T> {
        let results: Vec<Result<MessageClassification<T>>> = messages.par_iter().map(|m| self.classify_message(m)).collect();
        let mut classifications = Vec::with_capacity(results.len());
        let mut errors = Vec::new();
        for (m, r) in messages.iter().zip(results) {
            match r {
                Ok(c) => classifications.push(c),
                Err(e) => errors.push(MessageError {
                    message_id: m.raw.message_id.clone(),
                    entity_id: m.raw.entity_id.clone(),
                    error: e.to_string(),
                }),
            }
        }
        CorpusClassification { classifications, errors }
    }
}
