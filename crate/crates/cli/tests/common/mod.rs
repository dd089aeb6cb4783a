//! Synthetic fixtures shared by the CLI test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ECO_SEEDS: [&str; 6] = ["environment", "ecosystem", "biodiversity", "habitats", "climate", "ecology"];

const HIGH: &[&str] = &[
    "we planted trees today for earthday",
    "our team installed solar to cut carbon emissions",
    "we are recycling all our products to protect the ocean",
    "today our team planted a forest for wildlife habitat",
    "we cleaned the reef and coral with our team",
];
const LOW: &[&str] = &[
    "we support conservation of wildlife and habitats",
    "protect the ocean and keep it green",
    "love nature and the environment",
    "conserve cleanwater and waterways for earth",
    "sustainable ecology is the future of the planet",
];
const NON_SUPPORT: &[&str] = &[
    "pollution and emissions figures from the climate report",
    "the ocean fisheries bill is in the senate",
    "rainforests and climate on the news",
];
const IRRELEVANT: &[&str] = &[
    "happy birthday party with music",
    "weekend sale on fashion and shopping",
    "coffee and a movie with my hubby",
    "football game today thanks all",
];
const FILLER: &[&str] = &["today", "thanks", "new", "all", "team", "day", "!", "#green", "@friends"];

pub struct Corpus {
    /// (entity, id, text) in file order.
    pub messages: Vec<(String, String, String)>,
    /// (message id, label)
    pub labels: Vec<(String, u8)>,
    pub ratings: BTreeMap<String, f64>,
}

/// Thirty brands with template messages of each commitment level; the first
/// `labeled_per_entity` messages of every brand are labeled.
pub fn synthetic_corpus(seed: u64, labeled_per_entity: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut messages = Vec::new();
    let mut labels = Vec::new();
    let mut ratings = BTreeMap::new();
    for e in 0..30 {
        let entity = format!("brand{e:02}");
        let n = rng.random_range(8..16);
        for i in 0..n {
            let label: u8 = rng.random_range(0..4);
            let pool = match label {
                3 => HIGH,
                2 => LOW,
                1 => NON_SUPPORT,
                _ => IRRELEVANT,
            };
            let mut text = pool[rng.random_range(0..pool.len())].to_string();
            for _ in 0..rng.random_range(0..3) {
                text.push(' ');
                text.push_str(FILLER[rng.random_range(0..FILLER.len())]);
            }
            if rng.random_bool(0.1) {
                text = format!("RT @{entity}: {text}");
            }
            let id = format!("{entity}-{i:03}");
            if i < labeled_per_entity {
                labels.push((id.clone(), label));
            }
            messages.push((entity.clone(), id, text));
        }
        ratings.insert(entity, (rng.random_range(0.0..10.0f64) * 100.0).round() / 100.0);
    }
    Corpus { messages, labels, ratings }
}

pub fn write_messages(path: &Path, messages: &[(String, String, String)]) {
    let mut out = String::new();
    for (e, id, text) in messages {
        out.push_str(&serde_json::json!({"entity": e, "id": id, "text": text}).to_string());
        out.push('\n');
    }
    fs::write(path, out).unwrap();
}

pub fn write_labels(path: &Path, labels: &[(String, u8)]) {
    let mut out = String::from("message_id,label\n");
    for (id, l) in labels {
        out.push_str(&format!("{id},{l}\n"));
    }
    fs::write(path, out).unwrap();
}

pub fn write_ratings(path: &Path, ratings: &BTreeMap<String, f64>) {
    let mut out = String::from("entity,rating\n");
    for (e, r) in ratings {
        out.push_str(&format!("{e},{r}\n"));
    }
    fs::write(path, out).unwrap();
}

/// Writes the corpus files and a config pointing at them; returns the
/// config path.
pub fn write_project(dir: &Path, corpus: &Corpus, extra: serde_json::Value) -> PathBuf {
    write_messages(&dir.join("messages.jsonl"), &corpus.messages);
    write_labels(&dir.join("labels.csv"), &corpus.labels);
    write_ratings(&dir.join("ratings.csv"), &corpus.ratings);
    let mut cfg = serde_json::json!({
        "cause": {"name": "eco", "seed_keywords": ECO_SEEDS, "expansion_size": 30},
        "messages": "messages.jsonl",
        "labels": "labels.csv",
        "ratings": "ratings.csv",
        "preset": "bow+cues",
        "lambda": 0.1,
        "folds": 3,
        "per_entity_top_n": 2
    });
    if let (Some(base), Some(more)) = (cfg.as_object_mut(), extra.as_object()) {
        for (k, v) in more {
            base.insert(k.clone(), v.clone());
        }
    }
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["causecommit"];
    argv.extend_from_slice(args);
    let code = causecommit_cli::run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

/// Runs a subcommand with `--config` and `--out`, panicking on failure.
pub fn run_ok(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> String {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.code, 0, "{cmd} failed: {}", o.stderr);
    o.stdout
}

/// One stored classification record.
pub fn classification(entity: &str, id: &str, label: &str, p_support: Option<f64>, p_high: Option<f64>) -> serde_json::Value {
    serde_json::json!({
        "message_id": id,
        "entity_id": entity,
        "relevance": if label == "IRRELEVANT" { 0.1 } else { 0.6 },
        "p_support": p_support,
        "p_high": p_high,
        "final_label": label,
    })
}

pub struct AuditFixture {
    pub classifications: Vec<serde_json::Value>,
    pub ratings: BTreeMap<String, f64>,
    pub planted: String,
}

/// Thirty entities with planted class counts. `planted` dominates every
/// high-commitment measure and has the lowest rating. With `spread`, the
/// other ratings cover 2..10 and weak talkers carry the low ratings;
/// otherwise every other rating lies in 9.0..=9.25.
pub fn audit_fixture(seed: u64, spread: bool) -> AuditFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classifications = Vec::new();
    let mut ratings = BTreeMap::new();
    let planted = "entity07".to_string();
    for e in 0..30 {
        let id = format!("entity{e:02}");
        let is_planted = id == planted;
        let (high, rest, p) = if is_planted {
            (40, 5, 0.97)
        } else {
            let h = rng.random_range(0..20);
            if spread {
                // All three measures rise with the high count.
                (h, 20, 0.75 + 0.15 * h as f64 / 20.0)
            } else {
                (h, rng.random_range(10..40), rng.random_range(0.75..0.9))
            }
        };
        let mut n = 0;
        let mut push = |label: &str, ps: Option<f64>, ph: Option<f64>| {
            classifications.push(classification(&id, &format!("{id}-{n:03}"), label, ps, ph));
            n += 1;
        };
        for _ in 0..high {
            let jitter: f64 = rng.random_range(-0.02..0.02);
            push("3", Some(0.9), Some((p + jitter).min(0.999)));
        }
        for j in 0..rest {
            match j % 3 {
                0 => push("IRRELEVANT", None, None),
                1 => push("0/1", Some(0.2), None),
                _ => push("2", Some(0.8), Some(0.25)),
            }
        }
        let rating = if is_planted {
            1.0
        } else if spread {
            // Weak talkers are rated low; strong talkers high.
            2.0 + 8.0 * high as f64 / 20.0
        } else {
            9.0 + 0.25 * rng.random_range(0.0..1.0f64)
        };
        ratings.insert(id, (rating * 1000.0).round() / 1000.0);
    }
    AuditFixture { classifications, ratings, planted }
}

pub fn write_audit_project(dir: &Path, fx: &AuditFixture) -> PathBuf {
    let mut text = String::new();
    for c in &fx.classifications {
        text.push_str(&c.to_string());
        text.push('\n');
    }
    fs::write(dir.join("classifications.jsonl"), text).unwrap();
    write_ratings(&dir.join("ratings.csv"), &fx.ratings);
    let cfg = serde_json::json!({"classifications": "classifications.jsonl", "ratings": "ratings.csv"});
    let path = dir.join("audit_config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    path
}

/// Every regular file under `dir`, relative path → bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
        }
    }
    out
}
