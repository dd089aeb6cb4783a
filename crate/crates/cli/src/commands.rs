//! Subcommand implementations.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use causecommit::audit::{aggregate_corpus, flag_inauthentic, EntityProfile};
use causecommit::embedding::{build_cause_profile, load_embeddings, relevance_score, CauseProfile, EmbeddingTable};
use causecommit::learn::{grid_search, kfold_cv, CVReport, LogisticModel, OptimizerBudget, Stage, TrainingMeta};
use causecommit::pipeline::{FinalLabel, MessageClassification, Pipeline};
use causecommit::stats::{ols_fit, EntityDesignRow, PREDICTOR_NAMES};
use causecommit::textproc::{AnnotatedMessage, Annotator, Lexicon, Polarity, RawMessage, WordList};
use causecommit::features::FeatureConfig;
use serde::Serialize;

use crate::config::{Overrides, RunConfig};
use crate::ingest::{self, LabeledExample};
use crate::{Cli, CliError, Command};

pub const CLASSIFICATIONS_FILE: &str = "classifications.jsonl";
pub const SUPPORT_MODEL_FILE: &str = "support_model.json";
pub const COMMITMENT_MODEL_FILE: &str = "commitment_model.json";

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn table(&self) -> Result<EmbeddingTable<f64>, CliError> {
        match &self.cfg.embeddings {
            Some(p) => {
                let f = File::open(p).map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", p.display())))?;
                load_embeddings(BufReader::new(f)).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
            }
            None => Ok(EmbeddingTable::toy()),
        }
    }

    fn profile(&self, table: &EmbeddingTable<f64>) -> Result<CauseProfile<f64>, CliError> {
        let c = self.cfg.require_cause()?;
        Ok(build_cause_profile(&c.name, &c.seed_keywords, table, c.expansion_size)?)
    }

    fn annotator(&self) -> Result<Annotator, CliError> {
        let annotator = Annotator::default();
        let Some(lex) = &self.cfg.lexicon else { return Ok(annotator) };
        let read = |p: &Path| -> Result<WordList, CliError> {
            let f = File::open(p).map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", p.display())))?;
            Ok(WordList::from_reader(BufReader::new(f))?)
        };
        Ok(annotator.with_lexicon(Lexicon { positive: read(&lex.positive)?, negative: read(&lex.negative)? }))
    }

    fn messages(&self) -> Result<Vec<RawMessage>, CliError> {
        ingest::ingest_messages(self.cfg.require(&self.cfg.messages, "messages")?, self.cfg.format)
    }

    fn model_path(&self, configured: &Option<PathBuf>, default: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.path(default))
    }

    fn ratings(&self) -> Result<HashMap<String, f64>, CliError> {
        let path = self.cfg.require(&self.cfg.ratings, "ratings")?;
        Ok(ingest::ingest_ratings(path)?.into_iter().collect())
    }

    fn classifications(&self) -> Result<Vec<MessageClassification<f64>>, CliError> {
        let path = self.model_path(&self.cfg.classifications, CLASSIFICATIONS_FILE);
        read_classifications(&path)
    }

    fn profiles(&self, ratings: &HashMap<String, f64>) -> Result<Vec<EntityProfile<f64>>, CliError> {
        Ok(aggregate_corpus(&self.classifications()?, ratings, self.cfg.tau)?)
    }
}

fn annotate_all(annotator: &Annotator, msgs: &[RawMessage]) -> Vec<AnnotatedMessage> {
    msgs.iter().map(|m| annotator.annotate(m, None)).collect()
}

pub fn read_classifications(path: &Path) -> Result<Vec<MessageClassification<f64>>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Runtime(format!("{}: {e} at line {}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_jsonl<V: Serialize>(path: &Path, values: &[V]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(File::create(path)?);
    for v in values {
        serde_json::to_writer(&mut w, v).map_err(|e| CliError::Runtime(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: Option<u64>,
    summary: &'a str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
}

/// Runs the parsed command and returns its summary line.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        threshold: cli.threshold,
        tau: cli.tau,
        top_k: cli.top_k,
        folds: cli.folds,
        format: cli.format,
    });
    cfg.validate()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Ctx { cfg, out: cli.out.clone() };
    let summary = match cli.command {
        Command::Filter => filter(&ctx)?,
        Command::Template => template(&ctx)?,
        Command::Train => train(&ctx)?,
        Command::Cv => cv(&ctx)?,
        Command::Classify => classify(&ctx)?,
        Command::Aggregate => aggregate(&ctx)?,
        Command::Correlate => correlate(&ctx)?,
        Command::Audit => audit(&ctx)?,
        Command::SentimentReport => sentiment_report(&ctx)?,
    };
    let generated_at = cli
        .timestamp
        .then(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let manifest = Manifest { command: cli.command.name(), seed: ctx.cfg.seed, summary: &summary, config: &ctx.cfg, generated_at };
    write_json(&ctx.path(&format!("manifest_{}.json", cli.command.name())), &manifest)?;
    Ok(summary)
}

fn filter(ctx: &Ctx) -> Result<String, CliError> {
    let table = ctx.table()?;
    let profile = ctx.profile(&table)?;
    let raw = ctx.messages()?;
    let annotated = annotate_all(&ctx.annotator()?, &raw);
    let threshold = ctx.cfg.relevance_threshold;

    let mut w = csv_writer(&ctx.path("relevance.csv"))?;
    w.write_record(["entity_id", "message_id", "relevance", "relevant"]).map_err(csv_err)?;
    let mut kept = Vec::new();
    let mut undefined = 0;
    for (m, a) in raw.iter().zip(&annotated) {
        let s = relevance_score(&a.embedding_terms(), &profile, &table);
        undefined += usize::from(!s.is_defined());
        let pass = s.passes(threshold);
        if pass {
            kept.push(m.clone());
        }
        w.write_record([m.entity_id.as_str(), &m.message_id, &opt(s.value()), if pass { "1" } else { "0" }])
            .map_err(csv_err)?;
    }
    w.flush()?;
    let mut f = std::io::BufWriter::new(File::create(ctx.path("relevant_messages.jsonl"))?);
    ingest::write_messages_jsonl(&kept, &mut f)?;
    f.flush()?;
    write_json(&ctx.path("cause_profile.json"), &profile)?;
    Ok(format!(
        "filter: {} of {} messages relevant to `{}` at threshold {threshold} ({undefined} without in-vocabulary words)",
        kept.len(),
        raw.len(),
        profile.name
    ))
}

fn template(ctx: &Ctx) -> Result<String, CliError> {
    let table = ctx.table()?;
    let profile = ctx.profile(&table)?;
    let annotated = annotate_all(&ctx.annotator()?, &ctx.messages()?);
    let path = ctx.path("annotation_template.csv");
    let rows = ingest::emit_annotation_template(
        &annotated,
        &profile,
        &table,
        ctx.cfg.relevance_threshold,
        ctx.cfg.per_entity_top_n,
        &path,
    )?;
    Ok(format!("template: {rows} messages to annotate written to {}", path.display()))
}

/// The labeled messages and binary targets one stage trains on, in label-file
/// order.
fn stage_data(stage: Stage, corpus: &[AnnotatedMessage], examples: &[LabeledExample<'_>]) -> (Vec<AnnotatedMessage>, Vec<bool>) {
    examples
        .iter()
        .filter(|ex| stage.admits(ex.label.value()))
        .map(|ex| (corpus[ex.index].clone(), stage.is_positive(ex.label.value())))
        .unzip()
}

#[derive(Serialize)]
struct StageSelection {
    stage: Stage,
    examples: usize,
    positives: usize,
    config: FeatureConfig,
    lambda: f64,
    /// Index of the selected grid point; absent without a grid.
    best_index: Option<usize>,
    reports: Vec<CVReport>,
}

struct Labeled {
    table: EmbeddingTable<f64>,
    profile: CauseProfile<f64>,
    stages: Vec<(Stage, Vec<AnnotatedMessage>, Vec<bool>)>,
}

fn labeled(ctx: &Ctx) -> Result<Labeled, CliError> {
    let table = ctx.table()?;
    let profile = ctx.profile(&table)?;
    let raw = ctx.messages()?;
    let examples = ingest::ingest_labels(ctx.cfg.require(&ctx.cfg.labels, "labels")?, &raw)?;
    let annotated = annotate_all(&ctx.annotator()?, &raw);
    let stages = [Stage::Support, Stage::Commitment]
        .into_iter()
        .map(|s| {
            let (x, y) = stage_data(s, &annotated, &examples);
            (s, x, y)
        })
        .collect();
    Ok(Labeled { table, profile, stages })
}

/// Cross-validates the configured features, or grid-searches when a grid is
/// configured.
fn select(ctx: &Ctx, data: &Labeled, stage: Stage, x: &[AnnotatedMessage], y: &[bool], always_cv: bool) -> Result<StageSelection, CliError> {
    let seed = ctx.cfg.require_seed()?;
    let k = ctx.cfg.folds;
    let stage_err = |e: causecommit::Error| CliError::Runtime(format!("{stage:?} stage: {e}"));
    let mut sel = StageSelection {
        stage,
        examples: x.len(),
        positives: y.iter().filter(|&&b| b).count(),
        config: ctx.cfg.feature_config()?,
        lambda: ctx.cfg.lambda,
        best_index: None,
        reports: Vec::new(),
    };
    if let Some(grid) = &ctx.cfg.grid {
        let points = grid.points()?;
        let result = grid_search(x, y, &data.table, &data.profile, &points, k, seed).map_err(stage_err)?;
        sel.config = result.best.config;
        sel.lambda = result.best.lambda;
        sel.best_index = Some(result.best_index);
        sel.reports = result.reports;
    } else if always_cv {
        sel.reports.push(kfold_cv(x, y, &data.table, &data.profile, &sel.config, sel.lambda, k, seed).map_err(stage_err)?);
    }
    Ok(sel)
}

fn train(ctx: &Ctx) -> Result<String, CliError> {
    let seed = ctx.cfg.require_seed()?;
    let data = labeled(ctx)?;
    #[derive(Serialize)]
    struct StageTraining {
        selection: StageSelection,
        model_path: String,
        vocabulary_size: usize,
        training_meta: TrainingMeta,
    }
    #[derive(Serialize)]
    struct TrainReport {
        seed: u64,
        cause: String,
        stages: Vec<StageTraining>,
    }
    let mut stages = Vec::new();
    let mut parts = Vec::new();
    for (stage, x, y) in &data.stages {
        let selection = select(ctx, &data, *stage, x, y, false)?;
        let featurizer = causecommit::features::Featurizer::new(selection.config.clone(), &data.table, &data.profile)?;
        let model = LogisticModel::fit(*stage, x, y, &featurizer, &data.profile.name, selection.lambda, OptimizerBudget::default())
            .map_err(|e| CliError::Runtime(format!("{stage:?} stage: {e}")))?;
        let path = match stage {
            Stage::Support => ctx.model_path(&ctx.cfg.support_model, SUPPORT_MODEL_FILE),
            Stage::Commitment => ctx.model_path(&ctx.cfg.commitment_model, COMMITMENT_MODEL_FILE),
        };
        model.save(&path)?;
        parts.push(format!("{} on {} examples (lambda {})", stage_name(*stage), x.len(), selection.lambda));
        stages.push(StageTraining {
            model_path: path.display().to_string(),
            vocabulary_size: model.vocabulary.len(),
            training_meta: model.training_meta,
            selection,
        });
    }
    write_json(&ctx.path("train_report.json"), &TrainReport { seed, cause: data.profile.name.clone(), stages })?;
    Ok(format!("train: {}", parts.join(", ")))
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Support => "support",
        Stage::Commitment => "commitment",
    }
}

fn cv(ctx: &Ctx) -> Result<String, CliError> {
    let seed = ctx.cfg.require_seed()?;
    let data = labeled(ctx)?;
    #[derive(Serialize)]
    struct CvOutput {
        seed: u64,
        folds: usize,
        cause: String,
        stages: Vec<StageSelection>,
    }
    let mut stages = Vec::new();
    let mut parts = Vec::new();
    for (stage, x, y) in &data.stages {
        let sel = select(ctx, &data, *stage, x, y, true)?;
        let best = &sel.reports[sel.best_index.unwrap_or(0)];
        parts.push(format!("{} mean F1 {:.4}", stage_name(*stage), best.mean_f1));
        stages.push(sel);
    }
    write_json(&ctx.path("cv_report.json"), &CvOutput { seed, folds: ctx.cfg.folds, cause: data.profile.name.clone(), stages })?;
    Ok(format!("cv: {} ({} folds, seed {seed})", parts.join(", "), ctx.cfg.folds))
}

fn classify(ctx: &Ctx) -> Result<String, CliError> {
    let table = ctx.table()?;
    let profile = ctx.profile(&table)?;
    let support = LogisticModel::<f64>::load(&ctx.model_path(&ctx.cfg.support_model, SUPPORT_MODEL_FILE))?;
    let commitment = LogisticModel::<f64>::load(&ctx.model_path(&ctx.cfg.commitment_model, COMMITMENT_MODEL_FILE))?;
    for m in [&support, &commitment] {
        if m.cause != profile.name {
            log::warn!("model trained for cause `{}` applied to cause `{}`", m.cause, profile.name);
        }
    }
    let annotated = annotate_all(&ctx.annotator()?, &ctx.messages()?);
    let pipeline = Pipeline::new(&support, &commitment, &profile, &table, ctx.cfg.relevance_threshold)?;
    let result = pipeline.classify_corpus(&annotated);
    write_jsonl(&ctx.path(CLASSIFICATIONS_FILE), &result.classifications)?;
    write_jsonl(&ctx.path("classification_errors.jsonl"), &result.errors)?;
    let mut counts: BTreeMap<FinalLabel, usize> = FinalLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for c in &result.classifications {
        *counts.get_mut(&c.final_label).expect("all labels present") += 1;
    }
    let breakdown: Vec<String> = counts.iter().map(|(l, n)| format!("{}={n}", l.as_str())).collect();
    Ok(format!(
        "classify: {} messages ({}), {} errors",
        result.classifications.len(),
        breakdown.join(" "),
        result.errors.len()
    ))
}

const PROFILE_COLUMNS: [&str; 12] = [
    "entity_id",
    "rating",
    "total_messages",
    "irrelevant",
    "non_support",
    "low_commitment",
    "high_commitment",
    "confident_non_support",
    "confident_low_commitment",
    "confident_high_commitment",
    "high_fraction",
    "mean_high_probability",
];

fn aggregate(ctx: &Ctx) -> Result<String, CliError> {
    let ratings = match &ctx.cfg.ratings {
        Some(_) => ctx.ratings()?,
        None => HashMap::new(),
    };
    let profiles = ctx.profiles(&ratings)?;
    let mut w = csv_writer(&ctx.path("entity_profiles.csv"))?;
    w.write_record(PROFILE_COLUMNS).map_err(csv_err)?;
    for p in &profiles {
        let m = p.metrics();
        w.write_record([
            p.entity_id.clone(),
            opt(p.rating),
            p.total_messages.to_string(),
            p.irrelevant.to_string(),
            p.non_support.to_string(),
            p.low_commitment.to_string(),
            p.high_commitment.to_string(),
            p.confident_non_support.to_string(),
            p.confident_low_commitment.to_string(),
            p.confident_high_commitment.to_string(),
            m.high_fraction.to_string(),
            opt(m.mean_high_prob),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    write_json(&ctx.path("entity_profiles.json"), &profiles)?;
    let high: usize = profiles.iter().map(|p| p.confident_high_commitment).sum();
    Ok(format!(
        "aggregate: {} entities, {high} confident high-commitment messages at tau {}",
        profiles.len(),
        ctx.cfg.tau
    ))
}

fn active_rated(profiles: &[EntityProfile<f64>]) -> Result<Vec<&EntityProfile<f64>>, CliError> {
    let active: Vec<&EntityProfile<f64>> = profiles.iter().filter(|p| p.total_messages > 0).collect();
    let missing: Vec<String> = active.iter().filter(|p| p.rating.is_none()).map(|p| p.entity_id.clone()).collect();
    if !missing.is_empty() {
        return Err(causecommit::Error::MissingRatings(missing).into());
    }
    Ok(active)
}

fn correlate(ctx: &Ctx) -> Result<String, CliError> {
    let profiles = ctx.profiles(&ctx.ratings()?)?;
    let active = active_rated(&profiles)?;
    let rows: Vec<EntityDesignRow<f64>> = active
        .iter()
        .map(|p| {
            let n = |c: usize| c as i64;
            EntityDesignRow::from_counts(
                &p.entity_id,
                n(p.confident_non_support),
                n(p.confident_low_commitment),
                n(p.confident_high_commitment),
                p.rating.expect("checked above"),
            )
        })
        .collect::<causecommit::Result<_>>()?;
    let result = ols_fit(&rows)?;
    std::fs::write(ctx.path("regression.csv"), result.to_csv())?;
    write_json(&ctx.path("regression.json"), &result)?;
    for (j, name) in PREDICTOR_NAMES.iter().enumerate() {
        let mut w = csv_writer(&ctx.path(&format!("scatter_{name}.csv")))?;
        w.write_record(["entity_id", "x", "y"]).map_err(csv_err)?;
        for r in &rows {
            w.write_record([r.entity_id.clone(), r.predictors()[j].to_string(), r.rating.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
    }
    let terms: Vec<String> = result
        .names
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, n)| format!("{n} {:.4} (p={:.4})", result.coefficients[i], result.p_values[i]))
        .collect();
    Ok(format!("correlate: {} entities, R^2 {:.4}; {}", result.n, result.r_squared, terms.join(", ")))
}

fn audit(ctx: &Ctx) -> Result<String, CliError> {
    let profiles = ctx.profiles(&ctx.ratings()?)?;
    active_rated(&profiles)?;
    let report = flag_inauthentic(&profiles, ctx.cfg.top_k, ctx.cfg.tau)?;
    write_json(&ctx.path("audit_report.json"), &report)?;
    std::fs::write(ctx.path("audit_summary.txt"), report.summary_text())?;

    let texts: HashMap<String, String> = match &ctx.cfg.messages {
        Some(_) => ctx.messages()?.into_iter().map(|m| (m.message_id, m.text)).collect(),
        None => HashMap::new(),
    };
    let mut w = csv_writer(&ctx.path("audit_evidence.csv"))?;
    w.write_record(["entity_id", "message_id", "text", "p_high", "label"]).map_err(csv_err)?;
    for f in &report.flagged {
        for e in &f.evidence {
            let text = texts.get(&e.message_id).map_or("", String::as_str);
            w.write_record([f.entity_id.as_str(), &e.message_id, text, &e.p_high.to_string(), ""]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(format!(
        "audit: {} flagged of {} in the top-{} intersection (tau {}, mean rating {:.4})",
        report.flagged.len(),
        report.intersection.len(),
        report.parameters.k,
        report.parameters.tau,
        report.parameters.rating_mean
    ))
}

/// Row per annotated label: message count and the share of each polarity.
pub fn sentiment_table(messages: &[AnnotatedMessage], labels: &[u8]) -> Vec<(u8, usize, [f64; 3])> {
    let mut counts = [[0usize; 3]; 4];
    for (m, &l) in messages.iter().zip(labels) {
        let col = match m.polarity {
            Polarity::Pos => 0,
            Polarity::Neg => 1,
            Polarity::Neu => 2,
        };
        counts[l as usize][col] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(l, c)| {
            let n: usize = c.iter().sum();
            let ratio = |k: usize| if n == 0 { 0.0 } else { c[k] as f64 / n as f64 };
            (l as u8, n, [ratio(0), ratio(1), ratio(2)])
        })
        .collect()
}

fn sentiment_report(ctx: &Ctx) -> Result<String, CliError> {
    let raw = ctx.messages()?;
    let examples = ingest::ingest_labels(ctx.cfg.require(&ctx.cfg.labels, "labels")?, &raw)?;
    let annotator = ctx.annotator()?;
    let annotated: Vec<AnnotatedMessage> = examples.iter().map(|e| annotator.annotate(&raw[e.index], None)).collect();
    let labels: Vec<u8> = examples.iter().map(|e| e.label.value()).collect();
    let table = sentiment_table(&annotated, &labels);
    let mut w = csv_writer(&ctx.path("sentiment_report.csv"))?;
    w.write_record(["label", "messages", "positive", "negative", "neutral"]).map_err(csv_err)?;
    for (l, n, r) in &table {
        let cell = |x: f64| if *n == 0 { String::new() } else { x.to_string() };
        w.write_record([l.to_string(), n.to_string(), cell(r[0]), cell(r[1]), cell(r[2])]).map_err(csv_err)?;
    }
    w.flush()?;
    let parts: Vec<String> = table.iter().map(|(l, n, r)| format!("{l}: {n} msgs, {:.2} pos", r[0])).collect();
    Ok(format!("sentiment-report: {} labeled messages; {}", examples.len(), parts.join("; ")))
}
