//! Per-entity commitment aggregates and the words-versus-ratings audit.
//!
//! Entities are ranked by three measures of confident high-commitment
//! messaging (count, fraction of all messages, mean posterior). Entities in
//! all three top-k sets whose rating is below the population mean are
//! flagged for review.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{FinalLabel, MessageClassification};
use crate::scalar::Scalar;

/// Default size of each top-k set.
pub const DEFAULT_TOP_K: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Evidence<T> {
    pub message_id: String,
    pub p_high: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntityProfile<T> {
    pub entity_id: String,
    pub rating: Option<T>,
    /// Confidence threshold the confident counts were computed with.
    pub tau: T,
    pub total_messages: usize,
    pub irrelevant: usize,
    pub non_support: usize,
    pub low_commitment: usize,
    pub high_commitment: usize,
    pub confident_non_support: usize,
    pub confident_low_commitment: usize,
    pub confident_high_commitment: usize,
    /// Mean P(HIGH) over confident label-3 messages.
    pub mean_high_probability: Option<T>,
    /// Confident label-3 messages, most probable first.
    pub evidence: Vec<Evidence<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AggregateMetrics<T> {
    pub high_count: usize,
    pub high_fraction: T,
    pub mean_high_prob: Option<T>,
}

impl<T: Scalar> EntityProfile<T> {
    pub fn metrics(&self) -> AggregateMetrics<T> {
        let high_fraction = if self.total_messages == 0 {
            T::zero()
        } else {
            T::from_count(self.confident_high_commitment) / T::from_count(self.total_messages)
        };
        AggregateMetrics {
            high_count: self.confident_high_commitment,
            high_fraction,
            mean_high_prob: self.mean_high_probability,
        }
    }

    /// An entity known only from the ratings file.
    pub fn empty(entity_id: &str, rating: Option<T>, tau: T) -> Self {
        Self {
            entity_id: entity_id.to_string(),
            rating,
            tau,
            total_messages: 0,
            irrelevant: 0,
            non_support: 0,
            low_commitment: 0,
            high_commitment: 0,
            confident_non_support: 0,
            confident_low_commitment: 0,
            confident_high_commitment: 0,
            mean_high_probability: None,
            evidence: Vec::new(),
        }
    }
}

/// Counts one entity's classifications by label, raw and above `tau`.
pub fn aggregate_entity<T: Scalar>(
    entity_id: &str,
    classifications: &[MessageClassification<T>],
    tau: T,
    rating: Option<T>,
) -> Result<EntityProfile<T>> {
    let mut p = EntityProfile::empty(entity_id, rating, tau);
    for c in classifications {
        if c.entity_id != entity_id {
            return Err(Error::MixedEntities { expected: entity_id.to_string(), found: c.entity_id.clone() });
        }
        p.total_messages += 1;
        let confident = c.is_confident(tau);
        match c.final_label {
            FinalLabel::Irrelevant => p.irrelevant += 1,
            FinalLabel::NonSupport => {
                p.non_support += 1;
                p.confident_non_support += usize::from(confident);
            }
            FinalLabel::LowCommitment => {
                p.low_commitment += 1;
                p.confident_low_commitment += usize::from(confident);
            }
            FinalLabel::HighCommitment => {
                p.high_commitment += 1;
                if confident {
                    p.confident_high_commitment += 1;
                    p.evidence.push(Evidence { message_id: c.message_id.clone(), p_high: c.confidence() });
                }
            }
        }
    }
    if !p.evidence.is_empty() {
        let sum: T = p.evidence.iter().map(|e| e.p_high).sum();
        p.mean_high_probability = Some(sum / T::from_count(p.evidence.len()));
    }
    p.evidence.sort_by(|a, b| {
        b.p_high.partial_cmp(&a.p_high).unwrap_or(Ordering::Equal).then_with(|| a.message_id.cmp(&b.message_id))
    });
    Ok(p)
}

/// Groups classifications by entity and aggregates each group. Rated entities
/// without messages are included with zero counts. Output is ordered by
/// entity id.
pub fn aggregate_corpus<T: Scalar>(
    classifications: &[MessageClassification<T>],
    ratings: &HashMap<String, T>,
    tau: T,
) -> Result<Vec<EntityProfile<T>>> {
    let mut groups: BTreeMap<&str, Vec<MessageClassification<T>>> = BTreeMap::new();
    for c in classifications {
        groups.entry(c.entity_id.as_str()).or_default().push(c.clone());
    }
    for id in ratings.keys() {
        groups.entry(id.as_str()).or_default();
    }
    groups
        .into_iter()
        .map(|(id, cs)| aggregate_entity(id, &cs, tau, ratings.get(id).copied()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Count,
    Fraction,
    MeanProb,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Count, Metric::Fraction, Metric::MeanProb];
}

fn compare_by<T: Scalar>(metric: Metric, a: &EntityProfile<T>, b: &EntityProfile<T>) -> Ordering {
    let (ma, mb) = (a.metrics(), b.metrics());
    let by_value = match metric {
        Metric::Count => mb.high_count.cmp(&ma.high_count),
        Metric::Fraction => mb.high_fraction.partial_cmp(&ma.high_fraction).unwrap_or(Ordering::Equal),
        Metric::MeanProb => match (ma.mean_high_prob, mb.mean_high_prob) {
            (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        },
    };
    by_value.then_with(|| a.entity_id.cmp(&b.entity_id))
}

/// The `k` highest entities under `metric`, best first. Ties go to the
/// smaller entity id; undefined mean probabilities rank last. Entities with
/// no messages are not ranked.
pub fn rank_top_k<T: Scalar>(profiles: &[EntityProfile<T>], metric: Metric, k: usize) -> Vec<String> {
    let mut active: Vec<&EntityProfile<T>> = profiles.iter().filter(|p| p.total_messages > 0).collect();
    active.sort_by(|a, b| compare_by(metric, a, b));
    active.into_iter().take(k).map(|p| p.entity_id.clone()).collect()
}

pub fn intersect_top_sets(sets: &[BTreeSet<String>]) -> BTreeSet<String> {
    let Some((first, rest)) = sets.split_first() else { return BTreeSet::new() };
    first.iter().filter(|id| rest.iter().all(|s| s.contains(*id))).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AuditParameters<T> {
    pub k: usize,
    pub tau: T,
    /// Mean rating over every entity that has at least one message.
    pub rating_mean: T,
    pub rated_entities: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopSets {
    pub count: Vec<String>,
    pub fraction: Vec<String>,
    pub mean_probability: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlaggedEntity<T> {
    pub entity_id: String,
    pub rating: T,
    pub metrics: AggregateMetrics<T>,
    pub total_messages: usize,
    pub evidence: Vec<Evidence<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AuditReport<T> {
    pub parameters: AuditParameters<T>,
    pub top_sets: TopSets,
    pub intersection: Vec<String>,
    /// Ascending by rating.
    pub flagged: Vec<FlaggedEntity<T>>,
}

/// Intersects the three top-k sets and flags members rated below the mean.
pub fn flag_inauthentic<T: Scalar>(profiles: &[EntityProfile<T>], k: usize, tau: T) -> Result<AuditReport<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("top-k must be at least 1".into()));
    }
    let active: Vec<&EntityProfile<T>> = profiles.iter().filter(|p| p.total_messages > 0).collect();
    if let Some(p) = active.iter().find(|p| p.tau != tau) {
        return Err(Error::InvalidArgument(format!(
            "profile `{}` was aggregated with tau {} but the audit uses {tau}",
            p.entity_id, p.tau
        )));
    }
    let missing: Vec<String> = active.iter().filter(|p| p.rating.is_none()).map(|p| p.entity_id.clone()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingRatings(missing));
    }
    if active.is_empty() {
        return Err(Error::Empty("no entity has messages"));
    }
    let ratings: HashMap<&str, T> = active.iter().map(|p| (p.entity_id.as_str(), p.rating.unwrap())).collect();
    let rating_mean = active.iter().map(|p| p.rating.unwrap()).sum::<T>() / T::from_count(active.len());

    let [count, fraction, mean_probability] = Metric::ALL.map(|m| rank_top_k(profiles, m, k));
    let sets: Vec<BTreeSet<String>> =
        [&count, &fraction, &mean_probability].iter().map(|v| v.iter().cloned().collect()).collect();
    let intersection = intersect_top_sets(&sets);

    let by_id: HashMap<&str, &EntityProfile<T>> = active.iter().map(|p| (p.entity_id.as_str(), *p)).collect();
    let mut flagged: Vec<FlaggedEntity<T>> = intersection
        .iter()
        .filter(|id| ratings[id.as_str()] < rating_mean)
        .map(|id| {
            let p = by_id[id.as_str()];
            FlaggedEntity {
                entity_id: id.clone(),
                rating: ratings[id.as_str()],
                metrics: p.metrics(),
                total_messages: p.total_messages,
                evidence: p.evidence.clone(),
            }
        })
        .collect();
    flagged.sort_by(|a, b| a.rating.partial_cmp(&b.rating).unwrap_or(Ordering::Equal).then_with(|| a.entity_id.cmp(&b.entity_id)));

    Ok(AuditReport {
        parameters: AuditParameters { k, tau, rating_mean, rated_entities: ratings.len() },
        top_sets: TopSets { count, fraction, mean_probability },
        intersection: intersection.into_iter().collect(),
        flagged,
    })
}

impl<T: Scalar> AuditReport<T> {
    pub fn flagged_ids(&self) -> Vec<&str> {
        self.flagged.iter().map(|f| f.entity_id.as_str()).collect()
    }

    /// Plain-text summary for reviewers.
    pub fn summary_text(&self) -> String {
        let p = &self.parameters;
        let mut s = String::new();
        let _ = writeln!(s, "audit: top-{} sets, tau {}, {} rated entities, mean rating {}", p.k, p.tau, p.rated_entities, p.rating_mean);
        let _ = writeln!(s, "top-k intersection: {} entities", self.intersection.len());
        let _ = writeln!(s, "flagged below the mean rating: {}", self.flagged.len());
        for f in &self.flagged {
            let mean = f.metrics.mean_high_prob.map_or_else(|| "n/a".to_string(), |m| format!("{m:.4}"));
            let _ = writeln!(
                s,
                "  {}  rating {}  high {} of {} ({:.4})  mean P(high) {}",
                f.entity_id, f.rating, f.metrics.high_count, f.total_messages, f.metrics.high_fraction, mean
            );
        }
        s
    }
}
