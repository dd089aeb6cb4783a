//! L2-regularized binary logistic regression, cross-validation and grid
//! search.
//!
//! Training is full-batch gradient descent with a backtracking (Armijo) line
//! search started from the zero vector. The trial step is the
//! Barzilai-Borwein step from the previous iteration. Training rows are put in
//! a canonical order first, so the result does not depend on input order.

use std::cmp::Ordering;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embedding::{CauseProfile, EmbeddingTable};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureVector, Featurizer, Vocabulary};
use crate::scalar::{sigmoid, softplus, Scalar};
use crate::textproc::AnnotatedMessage;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Default L2 strengths searched when none are given.
pub const DEFAULT_LAMBDAS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerBudget {
    pub max_iterations: usize,
    /// Stop once the gradient's infinity norm drops below this.
    pub tolerance: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self { max_iterations: 1000, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub weights: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> Gradient<T> {
    pub fn inf_norm(&self) -> T {
        self.weights.iter().fold(self.bias.abs(), |m, g| m.max(g.abs()))
    }

    fn sq_norm(&self) -> T {
        self.weights.iter().fold(self.bias * self.bias, |s, &g| s + g * g)
    }
}

fn check_batch<T: Scalar>(weights: &[T], x: &[FeatureVector<T>], y: &[bool]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    for fv in x {
        if fv.width() != weights.len() {
            return Err(Error::LayoutMismatch { expected: weights.len(), found: fv.width() });
        }
    }
    Ok(())
}

fn regularizer<T: Scalar>(weights: &[T], lambda: T) -> T {
    lambda / T::lit(2.0) * weights.iter().fold(T::zero(), |s, &w| s + w * w)
}

/// Mean cross-entropy plus `(lambda / 2) * ||weights||^2`; the bias is not
/// penalized.
pub fn loss<T: Scalar>(weights: &[T], bias: T, x: &[FeatureVector<T>], y: &[bool], lambda: T) -> Result<T> {
    check_batch(weights, x, y)?;
    let n = T::from_count(x.len());
    let data = x.iter().zip(y).fold(T::zero(), |acc, (fv, &label)| {
        let z = fv.dot(weights) + bias;
        acc + if label { softplus(-z) } else { softplus(z) }
    }) / n;
    let total = data + regularizer(weights, lambda);
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("logistic loss"))
    }
}

/// Loss and its exact gradient.
pub fn loss_and_gradient<T: Scalar>(
    weights: &[T],
    bias: T,
    x: &[FeatureVector<T>],
    y: &[bool],
    lambda: T,
) -> Result<(T, Gradient<T>)> {
    check_batch(weights, x, y)?;
    let n = T::from_count(x.len());
    let mut grad = vec![T::zero(); weights.len()];
    let mut grad_bias = T::zero();
    let mut data = T::zero();
    for (fv, &label) in x.iter().zip(y) {
        let z = fv.dot(weights) + bias;
        let target = if label { T::one() } else { T::zero() };
        data = data + if label { softplus(-z) } else { softplus(z) };
        let residual = sigmoid(z) - target;
        fv.axpy(residual / n, &mut grad);
        grad_bias = grad_bias + residual;
    }
    for (g, &w) in grad.iter_mut().zip(weights) {
        *g = *g + lambda * w;
    }
    let total = data / n + regularizer(weights, lambda);
    let grad = Gradient { weights: grad, bias: grad_bias / n };
    if !total.is_finite() || !grad.inf_norm().is_finite() {
        return Err(Error::NonFinite("logistic loss or gradient"));
    }
    Ok((total, grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Weights and bias of a trained binary logistic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearClassifier<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub lambda: T,
    pub meta: TrainingMeta,
}

impl<T: Scalar> LinearClassifier<T> {
    pub fn decision(&self, fv: &FeatureVector<T>) -> Result<T> {
        if fv.width() != self.weights.len() {
            return Err(Error::LayoutMismatch { expected: self.weights.len(), found: fv.width() });
        }
        Ok(fv.dot(&self.weights) + self.bias)
    }

    pub fn predict_proba(&self, fv: &FeatureVector<T>) -> Result<T> {
        self.decision(fv).map(sigmoid)
    }

    pub fn weight_norm(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, &w| s + w * w).sqrt()
    }
}

fn compare_rows<T: Scalar>(a: (&FeatureVector<T>, bool), b: (&FeatureVector<T>, bool)) -> Ordering {
    a.1.cmp(&b.1).then_with(|| a.0.sparse.cmp(&b.0.sparse)).then_with(|| {
        for (x, y) in a.0.dense.iter().zip(&b.0.dense) {
            match x.partial_cmp(y) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        a.0.dense.len().cmp(&b.0.dense.len())
    })
}

/// Trains a logistic model from the zero vector.
///
/// Stops when the gradient's infinity norm falls below the budget tolerance,
/// the iteration budget runs out, or the line search can no longer decrease
/// the loss.
pub fn train_logistic<T: Scalar>(
    x: &[FeatureVector<T>],
    y: &[bool],
    lambda: T,
    budget: OptimizerBudget,
) -> Result<LinearClassifier<T>> {
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} must be finite and nonnegative")));
    }
    if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
        return Err(Error::DegenerateLabels);
    }
    if x.iter().any(|fv| !fv.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    let width = x[0].width();

    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| compare_rows((&x[i], y[i]), (&x[j], y[j])));
    let xs: Vec<FeatureVector<T>> = order.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<bool> = order.iter().map(|&i| y[i]).collect();

    let tol = T::lit(budget.tolerance);
    let armijo = T::lit(1e-4);
    let mut w = vec![T::zero(); width];
    let mut b = T::zero();
    let (mut f, mut g) = loss_and_gradient(&w, b, &xs, &ys, lambda)?;
    let mut step = T::one();
    let mut iterations = 0;
    let mut converged = g.inf_norm() < tol;

    while !converged && iterations < budget.max_iterations {
        let g_sq = g.sq_norm();
        let mut t = step;
        let (w_new, b_new, f_new) = loop {
            let w_try: Vec<T> = w.iter().zip(&g.weights).map(|(&wi, &gi)| wi - t * gi).collect();
            let b_try = b - t * g.bias;
            let f_try = loss(&w_try, b_try, &xs, &ys, lambda)?;
            if f_try <= f - armijo * t * g_sq {
                break (w_try, b_try, f_try);
            }
            t = t * T::lit(0.5);
            if t < T::epsilon() * T::epsilon() {
                break (w.clone(), b, f);
            }
        };
        iterations += 1;
        if f_new >= f && w_new == w {
            // Line search stalled at machine precision.
            break;
        }
        let (_, g_new) = loss_and_gradient(&w_new, b_new, &xs, &ys, lambda)?;

        // Barzilai-Borwein trial step for the next iteration.
        let mut ss = T::zero();
        let mut sy = T::zero();
        for ((&wn, &wo), (&gn, &go)) in w_new.iter().zip(&w).zip(g_new.weights.iter().zip(&g.weights)) {
            let s = wn - wo;
            ss = ss + s * s;
            sy = sy + s * (gn - go);
        }
        let sb = b_new - b;
        ss = ss + sb * sb;
        sy = sy + sb * (g_new.bias - g.bias);
        step = if sy > T::zero() && (ss / sy).is_finite() { ss / sy } else { t * T::lit(2.0) };

        w = w_new;
        b = b_new;
        f = f_new;
        g = g_new;
        converged = g.inf_norm() < tol;
    }

    Ok(LinearClassifier {
        weights: w,
        bias: b,
        lambda,
        meta: TrainingMeta { iterations, gradient_norm: g.inf_norm().to_f64_lossy(), converged },
    })
}

/// Which binary decision a model makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Labels {2, 3} against {0, 1}.
    Support,
    /// Label 3 against label 2, among supporting messages.
    Commitment,
}

impl Stage {
    pub fn positive_labels(self) -> &'static [u8] {
        match self {
            Stage::Support => &[2, 3],
            Stage::Commitment => &[3],
        }
    }

    /// Whether a message with this label takes part in training the stage.
    pub fn admits(self, label: u8) -> bool {
        match self {
            Stage::Support => label <= 3,
            Stage::Commitment => label == 2 || label == 3,
        }
    }

    pub fn is_positive(self, label: u8) -> bool {
        self.positive_labels().contains(&label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ColumnScaling<T> {
    pub mean: T,
    pub scale: T,
}

/// A trained stage classifier together with everything needed to featurize
/// new messages the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LogisticModel<T> {
    pub format_version: u32,
    pub stage: Stage,
    pub positive_labels: Vec<u8>,
    pub cause: String,
    pub config: FeatureConfig,
    /// Embedding dimension the dense blocks were built with.
    pub dimension: usize,
    pub vocabulary: Vocabulary,
    pub weights: Vec<T>,
    pub bias: T,
    pub lambda: T,
    /// Z-score parameters per dense column when `config.standardize_dense`.
    pub dense_scaling: Option<Vec<ColumnScaling<T>>>,
    pub training_meta: TrainingMeta,
    /// SHA-256 over the training messages and labels.
    pub corpus_digest: String,
}

fn dense_scaling<T: Scalar>(x: &[FeatureVector<T>]) -> Vec<ColumnScaling<T>> {
    let width = x.first().map_or(0, |fv| fv.dense.len());
    let n = T::from_count(x.len());
    (0..width)
        .map(|j| {
            let mean = x.iter().map(|fv| fv.dense[j]).sum::<T>() / n;
            let var = x.iter().map(|fv| (fv.dense[j] - mean).powi(2)).sum::<T>() / n;
            let sd = var.sqrt();
            ColumnScaling { mean, scale: if sd > T::epsilon() { sd } else { T::one() } }
        })
        .collect()
}

fn apply_scaling<T: Scalar>(fv: &mut FeatureVector<T>, scaling: &[ColumnScaling<T>]) {
    for (x, s) in fv.dense.iter_mut().zip(scaling) {
        *x = (*x - s.mean) / s.scale;
    }
}

/// SHA-256 over `message_id \t label \t text` lines.
pub fn corpus_digest(corpus: &[AnnotatedMessage], labels: &[bool]) -> String {
    let mut hasher = Sha256::new();
    for (m, &l) in corpus.iter().zip(labels) {
        hasher.update(m.raw.message_id.as_bytes());
        hasher.update(if l { b"\t1\t" } else { b"\t0\t" });
        hasher.update(m.raw.text.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl<T: Scalar> LogisticModel<T> {
    /// Builds the vocabulary on `corpus`, featurizes it and trains.
    pub fn fit(
        stage: Stage,
        corpus: &[AnnotatedMessage],
        labels: &[bool],
        featurizer: &Featurizer<'_, T>,
        cause: &str,
        lambda: T,
        budget: OptimizerBudget,
    ) -> Result<Self> {
        let vocabulary = featurizer.build_vocabulary(corpus)?;
        let mut x = featurizer.featurize_all(corpus, &vocabulary);
        let scaling = featurizer.config().standardize_dense.then(|| dense_scaling(&x));
        if let Some(s) = &scaling {
            x.iter_mut().for_each(|fv| apply_scaling(fv, s));
        }
        let clf = train_logistic(&x, labels, lambda, budget)?;
        Ok(Self {
            format_version: MODEL_FORMAT_VERSION,
            stage,
            positive_labels: stage.positive_labels().to_vec(),
            cause: cause.to_string(),
            config: featurizer.config().clone(),
            dimension: featurizer.table().dimension(),
            vocabulary,
            weights: clf.weights,
            bias: clf.bias,
            lambda,
            dense_scaling: scaling,
            training_meta: clf.meta,
            corpus_digest: corpus_digest(corpus, labels),
        })
    }

    /// A featurizer matching the model's training layout.
    pub fn featurizer<'a>(&self, table: &'a EmbeddingTable<T>, profile: &'a CauseProfile<T>) -> Result<Featurizer<'a, T>> {
        if table.dimension() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: table.dimension() });
        }
        Featurizer::new(self.config.clone(), table, profile)
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    /// `sigmoid(w·x + b)` for a vector laid out by this model's vocabulary.
    pub fn predict_proba(&self, fv: &FeatureVector<T>) -> Result<T> {
        if fv.width() != self.weights.len() || fv.sparse_width != self.vocabulary.len() {
            return Err(Error::LayoutMismatch { expected: self.weights.len(), found: fv.width() });
        }
        let z = match &self.dense_scaling {
            Some(s) => {
                let mut scaled = fv.clone();
                apply_scaling(&mut scaled, s);
                scaled.dot(&self.weights)
            }
            None => fv.dot(&self.weights),
        };
        Ok(sigmoid(z + self.bias))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported model format version {}", model.format_version)));
        }
        let expected = model.vocabulary.len() + crate::features::DenseLayout::new(&model.config.dense, model.dimension).width();
        if model.weights.len() != expected {
            return Err(Error::LayoutMismatch { expected, found: model.weights.len() });
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Confusion counts and derived scores for one positive class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(tp, fp);
        let recall = ratio(tp, fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1, tp, fp, fn_, tn }
    }
}

/// Precision, recall and F1 of `positive`.
///
/// # Panics
/// If the label slices differ in length.
pub fn prf1<L: PartialEq>(y_true: &[L], y_pred: &[L], positive: &L) -> Metrics {
    assert_eq!(y_true.len(), y_pred.len(), "label lists differ in length");
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Metrics::from_counts(tp, fp, fn_, tn)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded stratified split. Each class is shuffled and dealt round-robin
/// into `k` folds, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}; cross-validation needs at least 2 folds")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0usize;
    for class in [false, true] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::Stratification { class: class.to_string(), count: members.len(), folds: k });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Vocabulary built on the training part only.
    pub vocabulary_size: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub k: usize,
    pub seed: u64,
    pub lambda: f64,
    pub config: FeatureConfig,
    pub folds: Vec<FoldResult>,
    /// Mean of the per-fold F1 scores.
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridPoint<T> {
    pub config: FeatureConfig,
    pub lambda: T,
}

/// Every `(config, lambda)` pair, configs outermost.
pub fn grid_points<T: Scalar>(configs: &[FeatureConfig], lambdas: &[T]) -> Vec<GridPoint<T>> {
    configs
        .iter()
        .flat_map(|c| lambdas.iter().map(move |&l| GridPoint { config: c.clone(), lambda: l }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridSearchResult<T> {
    pub best_index: usize,
    pub best: GridPoint<T>,
    pub reports: Vec<CVReport>,
}

/// Cross-validation settings shared by every evaluated configuration.
#[derive(Debug, Clone, Copy)]
pub struct CrossValidator<'a, T> {
    pub table: &'a EmbeddingTable<T>,
    pub profile: &'a CauseProfile<T>,
    pub k: usize,
    pub seed: u64,
    pub budget: OptimizerBudget,
}

impl<'a, T: Scalar> CrossValidator<'a, T> {
    pub fn new(table: &'a EmbeddingTable<T>, profile: &'a CauseProfile<T>, k: usize, seed: u64) -> Self {
        Self { table, profile, k, seed, budget: OptimizerBudget::default() }
    }

    /// Stratified k-fold CV. The vocabulary is rebuilt inside every training
    /// fold, so held-out messages never contribute features.
    pub fn run(&self, corpus: &[AnnotatedMessage], labels: &[bool], config: &FeatureConfig, lambda: T) -> Result<CVReport> {
        if corpus.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: corpus.len(), found: labels.len() });
        }
        let featurizer = Featurizer::new(config.clone(), self.table, self.profile)?;
        let folds = stratified_folds(labels, self.k, self.seed)?;
        let mut results = Vec::with_capacity(folds.len());
        for (i, fold) in folds.iter().enumerate() {
            let train: Vec<AnnotatedMessage> = fold.train.iter().map(|&j| corpus[j].clone()).collect();
            let train_y: Vec<bool> = fold.train.iter().map(|&j| labels[j]).collect();
            let model = LogisticModel::fit(Stage::Support, &train, &train_y, &featurizer, &self.profile.name, lambda, self.budget)?;
            let mut y_pred = Vec::with_capacity(fold.test.len());
            for &j in &fold.test {
                let p = model.predict_proba(&featurizer.featurize(&corpus[j], &model.vocabulary))?;
                y_pred.push(p >= T::lit(0.5));
            }
            let y_true: Vec<bool> = fold.test.iter().map(|&j| labels[j]).collect();
            results.push(FoldResult {
                fold: i,
                train_size: fold.train.len(),
                test_size: fold.test.len(),
                vocabulary_size: model.vocabulary.len(),
                metrics: prf1(&y_true, &y_pred, &true),
            });
        }
        let mean_f1 = results.iter().map(|r| r.metrics.f1).sum::<f64>() / results.len() as f64;
        Ok(CVReport {
            k: self.k,
            seed: self.seed,
            lambda: lambda.to_f64_lossy(),
            config: config.clone(),
            folds: results,
            mean_f1,
        })
    }

    /// Evaluates every grid point with the same seed and returns the one with
    /// the highest mean F1; ties go to the earlier point.
    pub fn grid_search(&self, corpus: &[AnnotatedMessage], labels: &[bool], grid: &[GridPoint<T>]) -> Result<GridSearchResult<T>> {
        if grid.is_empty() {
            return Err(Error::Empty("grid"));
        }
        let reports: Vec<CVReport> = grid
            .par_iter()
            .map(|p| self.run(corpus, labels, &p.config, p.lambda))
            .collect::<Result<_>>()?;
        let mut best_index = 0;
        for (i, r) in reports.iter().enumerate() {
            if r.mean_f1 > reports[best_index].mean_f1 {
                best_index = i;
            }
        }
        Ok(GridSearchResult { best_index, best: grid[best_index].clone(), reports })
    }
}

/// Stratified k-fold cross-validation of one configuration.
#[allow(clippy::too_many_arguments)]
pub fn kfold_cv<T: Scalar>(
    corpus: &[AnnotatedMessage],
    labels: &[bool],
    table: &EmbeddingTable<T>,
    profile: &CauseProfile<T>,
    config: &FeatureConfig,
    lambda: T,
    k: usize,
    seed: u64,
) -> Result<CVReport> {
    CrossValidator::new(table, profile, k, seed).run(corpus, labels, config, lambda)
}

pub fn grid_search<T: Scalar>(
    corpus: &[AnnotatedMessage],
    labels: &[bool],
    table: &EmbeddingTable<T>,
    profile: &CauseProfile<T>,
    grid: &[GridPoint<T>],
    k: usize,
    seed: u64,
) -> Result<GridSearchResult<T>> {
    CrossValidator::new(table, profile, k, seed).grid_search(corpus, labels, grid)
}
