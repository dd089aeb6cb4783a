//! Cause-commitment classification for short public messages.
//!
//! The crate scores messages for relevance to a cause with word embeddings,
//! classifies relevant messages with two binary logistic models (support,
//! then commitment), aggregates the labels per entity, correlates the
//! aggregates with third-party action ratings by OLS, and flags entities
//! whose messaging commitment outruns their ratings.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the command-line
//! front end uses.

pub mod audit;
pub mod embedding;
pub mod error;
pub mod features;
pub mod learn;
pub mod pipeline;
pub mod scalar;
pub mod stats;
pub mod textproc;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type EmbeddingTableF64 = embedding::EmbeddingTable<f64>;
pub type EmbeddingTableF32 = embedding::EmbeddingTable<f32>;
pub type CauseProfileF64 = embedding::CauseProfile<f64>;
pub type RelevanceScoreF64 = embedding::RelevanceScore<f64>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type LogisticModelF64 = learn::LogisticModel<f64>;
pub type LogisticModelF32 = learn::LogisticModel<f32>;
pub type MessageClassificationF64 = pipeline::MessageClassification<f64>;
pub type RegressionResultF64 = stats::RegressionResult<f64>;
pub type EntityProfileF64 = audit::EntityProfile<f64>;
pub type AuditReportF64 = audit::AuditReport<f64>;
