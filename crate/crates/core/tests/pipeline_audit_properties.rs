use std::collections::{BTreeSet, HashMap};

use causecommit::audit::{aggregate_corpus, aggregate_entity, flag_inauthentic, rank_top_k, Metric};
use causecommit::embedding::{build_cause_profile, CauseProfile, EmbeddingTable, RelevanceScore};
use causecommit::features::{FeatureConfig, Featurizer};
use causecommit::learn::{LogisticModel, OptimizerBudget, Stage};
use causecommit::pipeline::{confident_subset, FinalLabel, MessageClassification, Pipeline};
use causecommit::textproc::{AnnotatedMessage, Annotator, RawMessage};
use proptest::prelude::*;

fn annotate(texts: &[&str]) -> Vec<AnnotatedMessage> {
    let a = Annotator::default();
    texts.iter().enumerate().map(|(i, t)| a.annotate(&RawMessage::new("e", format!("m{i}"), *t).unwrap(), None)).collect()
}

fn models(table: &EmbeddingTable<f64>, profile: &CauseProfile<f64>) -> (LogisticModel<f64>, LogisticModel<f64>) {
    let f = Featurizer::new(FeatureConfig::preset("bow+cues").unwrap(), table, profile).unwrap();
    let support = annotate(&[
        "we support conservation of the environment",
        "protect wildlife and habitats",
        "we planted trees for earthday",
        "recycling keeps the ocean green",
        "the environment is on the news",
        "ecosystem documentary today",
        "climate report from the senate",
        "forest fire on the news",
    ]);
    let ys = [true, true, true, true, false, false, false, false];
    let commit = annotate(&[
        "we planted trees for earthday",
        "our team cleaned the reef today",
        "we installed solar on our stores",
        "we recycled all our products",
        "protect wildlife and habitats",
        "we support conservation of the environment",
        "love the ocean",
        "go green everyone",
    ]);
    let yc = [true, true, true, true, false, false, false, false];
    let b = OptimizerBudget::default();
    (
        LogisticModel::fit(Stage::Support, &support, &ys, &f, &profile.name, 0.1, b).unwrap(),
        LogisticModel::fit(Stage::Commitment, &commit, &yc, &f, &profile.name, 0.1, b).unwrap(),
    )
}

const POOL: &[&str] = &[
    "we", "planted", "trees", "environment", "conservation", "ocean", "happy", "party", "music", "solar", "recycled",
    "our", "products", "support", "wildlife", "not", "news", "today", "green", "!",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pipeline_invariants(msgs in prop::collection::vec(prop::collection::vec(prop::sample::select(POOL), 0..10), 1..40)) {
        let table = EmbeddingTable::<f64>::toy();
        let profile = build_cause_profile("eco", &["environment", "ecosystem", "conservation"], &table, 30).unwrap();
        let (s, c) = models(&table, &profile);
        let texts: Vec<String> = msgs.iter().map(|w| w.join(" ")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let corpus = annotate(&refs);

        let batch = Pipeline::new(&s, &c, &profile, &table, 0.3).unwrap();
        let out = batch.classify_corpus(&corpus);
        prop_assert!(out.errors.is_empty());
        let (_, commitment_calls) = batch.stage_calls();
        let reached_stage_two = out
            .classifications
            .iter()
            .filter(|m| matches!(m.final_label, FinalLabel::LowCommitment | FinalLabel::HighCommitment))
            .count();
        prop_assert_eq!(commitment_calls, reached_stage_two);

        let single = Pipeline::new(&s, &c, &profile, &table, 0.3).unwrap();
        let one_by_one: Vec<_> = corpus.iter().map(|m| single.classify_message(m).unwrap()).collect();
        prop_assert_eq!(&out.classifications, &one_by_one);

        for m in &out.classifications {
            let consistent = match m.final_label {
                FinalLabel::Irrelevant => m.p_support.is_none() && m.p_high.is_none(),
                FinalLabel::NonSupport => m.p_support.is_some_and(|p| p < 0.5) && m.p_high.is_none(),
                FinalLabel::LowCommitment => m.p_support.is_some_and(|p| p >= 0.5) && m.p_high.is_some_and(|p| p < 0.5),
                FinalLabel::HighCommitment => m.p_support.is_some_and(|p| p >= 0.5) && m.p_high.is_some_and(|p| p >= 0.5),
            };
            prop_assert!(consistent, "{:?}", m);
        }

        let taus = [0.0, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0];
        for pair in taus.windows(2) {
            let loose: BTreeSet<&str> = confident_subset(&out.classifications, pair[0]).iter().map(|m| m.message_id.as_str()).collect();
            let strict: BTreeSet<&str> = confident_subset(&out.classifications, pair[1]).iter().map(|m| m.message_id.as_str()).collect();
            prop_assert!(strict.is_subset(&loose));
        }
    }
}

fn message(entity: &str, i: usize, label: FinalLabel, p: f64) -> MessageClassification<f64> {
    let (p_support, p_high) = match label {
        FinalLabel::Irrelevant => (None, None),
        FinalLabel::NonSupport => (Some(1.0 - p), None),
        FinalLabel::LowCommitment => (Some(0.9), Some(1.0 - p)),
        FinalLabel::HighCommitment => (Some(0.9), Some(p)),
    };
    MessageClassification {
        message_id: format!("{entity}-{i}"),
        entity_id: entity.into(),
        relevance: RelevanceScore(Some(0.5)),
        p_support,
        p_high,
        final_label: label,
    }
}

fn population() -> impl Strategy<Value = (Vec<MessageClassification<f64>>, HashMap<String, f64>)> {
    let msg = (0usize..4, 0.5f64..1.0);
    prop::collection::vec((prop::collection::vec(msg, 1..20), 0.0f64..10.0), 1..25).prop_map(|entities| {
        let mut all = Vec::new();
        let mut ratings = HashMap::new();
        for (e, (msgs, rating)) in entities.into_iter().enumerate() {
            let id = format!("e{e:02}");
            for (i, (l, p)) in msgs.into_iter().enumerate() {
                all.push(message(&id, i, FinalLabel::ALL[l], p));
            }
            ratings.insert(id, (rating * 4.0).round() / 4.0);
        }
        (all, ratings)
    })
}

proptest! {
    #[test]
    fn audit_sets_nest((msgs, ratings) in population(), k in 1usize..30) {
        let profiles = aggregate_corpus(&msgs, &ratings, 0.7).unwrap();
        let report = flag_inauthentic(&profiles, k, 0.7).unwrap();
        let inter: BTreeSet<&String> = report.intersection.iter().collect();
        for set in [&report.top_sets.count, &report.top_sets.fraction, &report.top_sets.mean_probability] {
            let s: BTreeSet<&String> = set.iter().collect();
            prop_assert!(inter.is_subset(&s));
            prop_assert!(set.len() <= k);
        }
        for f in &report.flagged {
            prop_assert!(inter.contains(&f.entity_id));
            prop_assert!(f.rating < report.parameters.rating_mean);
        }
        prop_assert!(report.flagged.windows(2).all(|w| w[0].rating <= w[1].rating));
        prop_assert_eq!(&report, &flag_inauthentic(&profiles, k, 0.7).unwrap());
    }

    #[test]
    fn rating_shift_keeps_flagged_set((msgs, ratings) in population(), k in 1usize..30, c in -50.0f64..50.0) {
        let c = (c * 4.0).round() / 4.0;
        let shifted: HashMap<String, f64> = ratings.iter().map(|(e, r)| (e.clone(), r + c)).collect();
        let a = flag_inauthentic(&aggregate_corpus(&msgs, &ratings, 0.7).unwrap(), k, 0.7).unwrap();
        let b = flag_inauthentic(&aggregate_corpus(&msgs, &shifted, 0.7).unwrap(), k, 0.7).unwrap();
        prop_assert_eq!(a.flagged_ids(), b.flagged_ids());
    }

    #[test]
    fn raising_tau_never_adds_confident_highs((msgs, ratings) in population(), t1 in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let lo = aggregate_corpus(&msgs, &ratings, t1).unwrap();
        let hi = aggregate_corpus(&msgs, &ratings, (t1 + dt).min(1.0)).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(b.confident_high_commitment <= a.confident_high_commitment);
        }
    }

    #[test]
    fn extra_non_high_message_lowers_fraction(n_high in 1usize..10, n_other in 0usize..10, extra in 0usize..3) {
        let mut msgs: Vec<_> = (0..n_high).map(|i| message("a", i, FinalLabel::HighCommitment, 0.95)).collect();
        msgs.extend((0..n_other).map(|i| message("a", n_high + i, FinalLabel::Irrelevant, 1.0)));
        let before = aggregate_entity("a", &msgs, 0.7, None).unwrap().metrics();
        msgs.push(message("a", 999, FinalLabel::ALL[extra], 0.95));
        let after = aggregate_entity("a", &msgs, 0.7, None).unwrap().metrics();
        prop_assert!(after.high_fraction < before.high_fraction);
        prop_assert!((0.0..=1.0).contains(&after.high_fraction));
    }
}

#[test]
fn top_three_matches_exhaustive_sort() {
    let counts = [4usize, 9, 1, 9, 0, 7, 3, 7, 2, 5];
    let msgs: Vec<_> = counts
        .iter()
        .enumerate()
        .flat_map(|(e, &n)| {
            let id = format!("x{e}");
            (0..n.max(1)).map(move |i| message(&id, i, if i < n { FinalLabel::HighCommitment } else { FinalLabel::Irrelevant }, 0.9))
        })
        .collect();
    let profiles = aggregate_corpus(&msgs, &HashMap::new(), 0.7).unwrap();
    let mut order: Vec<(usize, String)> = counts.iter().enumerate().map(|(e, &n)| (n, format!("x{e}"))).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let expected: Vec<String> = order.into_iter().take(3).map(|(_, id)| id).collect();
    assert_eq!(rank_top_k(&profiles, Metric::Count, 3), expected);
}
