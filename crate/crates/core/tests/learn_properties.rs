use std::collections::HashSet;

use causecommit::embedding::{build_cause_profile, EmbeddingTable};
use causecommit::features::{FeatureConfig, FeatureVector, Featurizer};
use causecommit::learn::{
    kfold_cv, loss, loss_and_gradient, prf1, stratified_folds, train_logistic, OptimizerBudget,
};
use causecommit::textproc::{AnnotatedMessage, Annotator, RawMessage};
use proptest::prelude::*;

/// A batch of mixed sparse/dense rows with both classes present.
fn problem() -> impl Strategy<Value = (Vec<FeatureVector<f64>>, Vec<bool>, Vec<f64>, f64)> {
    (2usize..40, 0usize..15, 1usize..15).prop_flat_map(|(n, sparse_w, dense_w)| {
        let row = (
            prop::collection::btree_map(0..sparse_w.max(1), 1u32..4, 0..=sparse_w.min(4)),
            prop::collection::vec(-3.0f64..3.0, dense_w),
        )
            .prop_map(move |(sp, dense)| FeatureVector {
                sparse: sp.into_iter().filter(|(i, _)| *i < sparse_w).collect(),
                dense,
                sparse_width: sparse_w,
            });
        (
            prop::collection::vec(row, n),
            prop::collection::vec(any::<bool>(), n).prop_map(|mut y| {
                y[0] = true;
                y[1] = false;
                y
            }),
            prop::collection::vec(-2.0f64..2.0, sparse_w + dense_w),
            prop::sample::select(&[0.0, 0.01, 0.1, 1.0, 10.0][..]),
        )
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_central_differences((x, y, w, lambda) in problem(), bias in -1.0f64..1.0) {
        let (_, g) = loss_and_gradient(&w, bias, &x, &y, lambda).unwrap();
        let h = 1e-6;
        for j in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let fd = (loss(&wp, bias, &x, &y, lambda).unwrap() - loss(&wm, bias, &x, &y, lambda).unwrap()) / (2.0 * h);
            prop_assert!(rel_err(g.weights[j], fd) < 1e-4, "w[{}]: {} vs {}", j, g.weights[j], fd);
        }
        let fd = (loss(&w, bias + h, &x, &y, lambda).unwrap() - loss(&w, bias - h, &x, &y, lambda).unwrap()) / (2.0 * h);
        prop_assert!(rel_err(g.bias, fd) < 1e-4);
    }

    #[test]
    fn loss_is_midpoint_convex((x, y, w1, lambda) in problem(), shift in prop::collection::vec(-2.0f64..2.0, 30), b1 in -1.0f64..1.0, b2 in -1.0f64..1.0) {
        let w2: Vec<f64> = w1.iter().zip(shift.iter().cycle()).map(|(a, s)| a + s).collect();
        let mid: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| (a + b) / 2.0).collect();
        let f = |w: &[f64], b: f64| loss(w, b, &x, &y, lambda).unwrap();
        prop_assert!(f(&mid, (b1 + b2) / 2.0) <= (f(&w1, b1) + f(&w2, b2)) / 2.0 + 1e-9);
    }

    #[test]
    fn training_ignores_row_order((x, y, _w, lambda) in problem(), seed in any::<u64>()) {
        let a = train_logistic(&x, &y, lambda.max(0.01), OptimizerBudget::default()).unwrap();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        let mut s = seed;
        for i in (1..idx.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            idx.swap(i, (s >> 33) as usize % (i + 1));
        }
        let xp: Vec<_> = idx.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<_> = idx.iter().map(|&i| y[i]).collect();
        let b = train_logistic(&xp, &yp, lambda.max(0.01), OptimizerBudget::default()).unwrap();
        for (p, q) in a.weights.iter().zip(&b.weights) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
        prop_assert!((a.bias - b.bias).abs() <= 1e-10);
    }

    #[test]
    fn stronger_regularization_shrinks_weights((x, y, _w, _l) in problem()) {
        let budget = OptimizerBudget { max_iterations: 5000, tolerance: 1e-9 };
        let norms: Vec<f64> = [0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&l| train_logistic(&x, &y, l, budget).unwrap().weight_norm())
            .collect();
        for pair in norms.windows(2) {
            prop_assert!(pair[0] + 1e-6 >= pair[1], "{:?}", norms);
        }
    }

    #[test]
    fn prf1_matches_confusion_counting(pairs in prop::collection::vec((0u8..3, 0u8..3), 0..60), positive in 0u8..3) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let m = prf1(&t, &p, &positive);
        let count = |a: bool, b: bool| t.iter().zip(&p).filter(|(x, y)| (**x == positive) == a && (**y == positive) == b).count();
        let (tp, fp, fn_, tn) = (count(true, true), count(false, true), count(true, false), count(false, false));
        prop_assert_eq!((m.tp, m.fp, m.fn_, m.tn), (tp, fp, fn_, tn));
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        prop_assert!((m.precision - precision).abs() < 1e-12);
        prop_assert!((m.recall - recall).abs() < 1e-12);
        prop_assert!((m.f1 - f1).abs() < 1e-12);
    }
}

#[test]
fn training_works_in_single_precision() {
    let x: Vec<FeatureVector<f32>> = [[1.0f32, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.8]]
        .iter()
        .map(|r| FeatureVector::from_dense(r.to_vec()))
        .collect();
    let y = [true, true, false, false];
    let m = train_logistic(&x, &y, 0.1f32, OptimizerBudget { max_iterations: 1000, tolerance: 1e-4 }).unwrap();
    assert!(m.predict_proba(&x[0]).unwrap() > 0.5);
    assert!(m.predict_proba(&x[2]).unwrap() < 0.5);
}

#[test]
fn folds_never_leak_test_vocabulary() {
    let table = EmbeddingTable::<f64>::toy();
    let profile = build_cause_profile("eco", &["environment", "ecosystem"], &table, 10).unwrap();
    let a = Annotator::default();
    let corpus: Vec<AnnotatedMessage> = (0..40)
        .map(|i| {
            let pos = i % 2 == 0;
            let text = if pos {
                format!("we planted trees for the environment uniqpos{i}")
            } else {
                format!("happy party today with music uniqneg{i}")
            };
            a.annotate(&RawMessage::new("e", format!("m{i}"), text).unwrap(), None)
        })
        .collect();
    let labels: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
    let cfg = FeatureConfig::preset("bow+cues").unwrap();
    let report = kfold_cv(&corpus, &labels, &table, &profile, &cfg, 1.0, 5, 11).unwrap();
    let featurizer = Featurizer::new(cfg, &table, &profile).unwrap();
    for (fold, result) in stratified_folds(&labels, 5, 11).unwrap().iter().zip(&report.folds) {
        let train: Vec<AnnotatedMessage> = fold.train.iter().map(|&i| corpus[i].clone()).collect();
        let vocab = featurizer.build_vocabulary(&train).unwrap();
        assert_eq!(vocab.len(), result.vocabulary_size);
        let train_terms: HashSet<String> = train.iter().flat_map(|m| featurizer.sparse_terms(m)).collect();
        for &i in &fold.test {
            for term in featurizer.sparse_terms(&corpus[i]) {
                if !train_terms.contains(&term) {
                    assert!(!vocab.contains(&term), "test-only term {term} leaked");
                }
            }
        }
    }
    assert!(report.mean_f1 > 0.9);
}
