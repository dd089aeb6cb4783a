//! Reading corpora, ratings and labels; writing the annotation worksheet.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use causecommit::embedding::{relevance_score, CauseProfile, EmbeddingTable};
use causecommit::pipeline::CommitmentLabel;
use causecommit::textproc::{AnnotatedMessage, RawMessage};
use serde::{Deserialize, Serialize};

use crate::config::MessageFormat;
use crate::CliError;

/// One message as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub entity: String,
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledExample<'a> {
    pub message_id: &'a str,
    pub index: usize,
    pub label: CommitmentLabel,
}

fn data_error(path: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{path}: {msg} at line {line}"))
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))
}

pub fn ingest_messages(path: &Path, format: MessageFormat) -> Result<Vec<RawMessage>, CliError> {
    read_messages(open(path)?, format, &path.display().to_string())
}

/// Parses messages, keeping input order. `source` names the input in errors.
pub fn read_messages<R: Read>(reader: R, format: MessageFormat, source: &str) -> Result<Vec<RawMessage>, CliError> {
    let mut out = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut push = |rec: MessageRecord, line: usize, out: &mut Vec<RawMessage>| -> Result<(), CliError> {
        let msg = RawMessage::new(rec.entity, rec.id, rec.text).map_err(|e| data_error(source, line, e))?;
        if !seen.insert(msg.message_id.clone()) {
            return Err(data_error(source, line, format!("duplicate message id `{}`", msg.message_id)));
        }
        out.push(msg);
        Ok(())
    };
    match format {
        MessageFormat::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: MessageRecord = serde_json::from_str(&line).map_err(|e| data_error(source, i + 1, e))?;
                push(rec, i + 1, &mut out)?;
            }
        }
        MessageFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
            let headers = rdr.headers().map_err(|e| data_error(source, 1, e))?.clone();
            let col = |name: &str| {
                headers.iter().position(|h| h == name).ok_or_else(|| data_error(source, 1, format!("missing column `{name}`")))
            };
            let (ce, ci, ct) = (col("entity")?, col("id")?, col("text")?);
            for rec in rdr.records() {
                let rec = rec.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    data_error(source, line, e)
                })?;
                let line = rec.position().map_or(0, |p| p.line() as usize);
                let field = |i: usize| rec.get(i).unwrap_or("").to_string();
                push(MessageRecord { entity: field(ce), id: field(ci), text: field(ct) }, line, &mut out)?;
            }
        }
    }
    Ok(out)
}

/// Writes messages in the JSONL layout `read_messages` accepts.
pub fn write_messages_jsonl<W: Write>(messages: &[RawMessage], mut w: W) -> Result<(), CliError> {
    for m in messages {
        let rec = MessageRecord { entity: m.entity_id.clone(), id: m.message_id.clone(), text: m.text.clone() };
        serde_json::to_writer(&mut w, &rec).map_err(|e| CliError::Runtime(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Two-column CSV rows, skipping an optional header whose first field is
/// `header`. Yields `(line, first, second)`.
fn two_column_rows<R: Read>(reader: R, header: &str, source: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data_error(source, e.position().map_or(0, |p| p.line() as usize), e))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && rec.get(0) == Some(header) {
            continue;
        }
        if rec.len() != 2 {
            return Err(data_error(source, line, format!("expected 2 fields, found {}", rec.len())));
        }
        rows.push((line, rec[0].to_string(), rec[1].to_string()));
    }
    Ok(rows)
}

pub fn ingest_ratings(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    read_ratings(open(path)?, &path.display().to_string())
}

/// `entity,rating` rows. Ratings are passed through on their own scale.
pub fn read_ratings<R: Read>(reader: R, source: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for (line, entity, rating) in two_column_rows(reader, "entity", source)? {
        let value: f64 = rating
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| data_error(source, line, format!("rating `{rating}` is not a finite number")))?;
        if entity.is_empty() {
            return Err(data_error(source, line, "empty entity id"));
        }
        if out.insert(entity.clone(), value).is_some() {
            return Err(data_error(source, line, format!("duplicate entity `{entity}`")));
        }
    }
    Ok(out)
}

pub fn ingest_labels<'a>(path: &Path, corpus: &'a [RawMessage]) -> Result<Vec<LabeledExample<'a>>, CliError> {
    read_labels(open(path)?, corpus, &path.display().to_string())
}

/// `message_id,label` rows, resolved against `corpus`.
pub fn read_labels<'a, R: Read>(reader: R, corpus: &'a [RawMessage], source: &str) -> Result<Vec<LabeledExample<'a>>, CliError> {
    let index: HashMap<&str, usize> = corpus.iter().enumerate().map(|(i, m)| (m.message_id.as_str(), i)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, id, label) in two_column_rows(reader, "message_id", source)? {
        let value: i64 =
            label.parse().map_err(|_| data_error(source, line, format!("label `{label}` is not an integer")))?;
        let label = CommitmentLabel::try_from(value).map_err(|e| data_error(source, line, e))?;
        let Some((&message_id, &i)) = index.get_key_value(id.as_str()) else {
            return Err(data_error(source, line, format!("message id `{id}` is not in the corpus")));
        };
        if !seen.insert(i) {
            return Err(data_error(source, line, format!("duplicate label for message `{id}`")));
        }
        out.push(LabeledExample { message_id, index: i, label });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateRow {
    pub entity_id: String,
    pub message_id: String,
    pub relevance: f64,
    pub text: String,
    pub label: String,
}

/// Each entity's `top_n` most relevant messages passing `threshold`, by
/// descending score; entity order is by id, ties keep corpus order.
pub fn annotation_rows(
    corpus: &[AnnotatedMessage],
    profile: &CauseProfile<f64>,
    table: &EmbeddingTable<f64>,
    threshold: f64,
    top_n: usize,
) -> Vec<TemplateRow> {
    let mut by_entity: BTreeMap<&str, Vec<(f64, &AnnotatedMessage)>> = BTreeMap::new();
    for m in corpus {
        let score = relevance_score(&m.embedding_terms(), profile, table);
        if let Some(s) = score.value().filter(|_| score.passes(threshold)) {
            by_entity.entry(m.raw.entity_id.as_str()).or_default().push((s, m));
        }
    }
    let mut rows = Vec::new();
    for (_, mut scored) in by_entity {
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (s, m) in scored.into_iter().take(top_n) {
            rows.push(TemplateRow {
                entity_id: m.raw.entity_id.clone(),
                message_id: m.raw.message_id.clone(),
                relevance: s,
                text: m.raw.text.clone(),
                label: String::new(),
            });
        }
    }
    rows
}

/// Writes the manual-annotation worksheet; returns the number of rows.
pub fn emit_annotation_template(
    corpus: &[AnnotatedMessage],
    profile: &CauseProfile<f64>,
    table: &EmbeddingTable<f64>,
    threshold: f64,
    per_entity_top_n: usize,
    path: &Path,
) -> Result<usize, CliError> {
    let rows = annotation_rows(corpus, profile, table, threshold, per_entity_top_n);
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["entity_id", "message_id", "relevance", "text", "label"]).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let text = "{\"entity\":\"a\",\"id\":\"1\",\"text\":\"hello, world\"}\n\n{\"entity\":\"b\",\"id\":\"2\",\"text\":\"x\\ny\"}\n";
        let msgs = read_messages(text.as_bytes(), MessageFormat::Jsonl, "t").unwrap();
        assert_eq!(msgs.len(), 2);
        let mut buf = Vec::new();
        write_messages_jsonl(&msgs, &mut buf).unwrap();
        assert_eq!(read_messages(buf.as_slice(), MessageFormat::Jsonl, "t").unwrap(), msgs);
    }

    #[test]
    fn duplicate_id_reports_second_line() {
        let text = "{\"entity\":\"a\",\"id\":\"1\",\"text\":\"x\"}\n{\"entity\":\"a\",\"id\":\"1\",\"text\":\"y\"}\n";
        let err = read_messages(text.as_bytes(), MessageFormat::Jsonl, "t").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn malformed_line_number() {
        let text = "{\"entity\":\"a\",\"id\":\"1\",\"text\":\"x\"}\n{oops\n";
        assert!(read_messages(text.as_bytes(), MessageFormat::Jsonl, "t").unwrap_err().to_string().contains("line 2"));
    }

    #[test]
    fn csv_messages_with_quotes() {
        let text = "entity,id,text\na,1,\"hi, there\nsecond line\"\nb,2,plain\n";
        let msgs = read_messages(text.as_bytes(), MessageFormat::Csv, "t").unwrap();
        assert_eq!(msgs[0].text, "hi, there\nsecond line");
        assert_eq!(msgs[1].entity_id, "b");
    }

    #[test]
    fn ratings() {
        assert_eq!(read_ratings("acme,7.5\n".as_bytes(), "r").unwrap()["acme"], 7.5);
        assert_eq!(read_ratings("entity,rating\nacme,7.5\n".as_bytes(), "r").unwrap().len(), 1);
        assert!(read_ratings("a,1\na,2\n".as_bytes(), "r").is_err());
        assert!(read_ratings("a,high\n".as_bytes(), "r").is_err());
    }

    #[test]
    fn labels() {
        let corpus: Vec<RawMessage> = (0..10).map(|i| RawMessage::new("e", i.to_string(), "t").unwrap()).collect();
        let rows: String = (0..10).map(|i| format!("{i},{}\n", i % 4)).collect();
        assert_eq!(read_labels(rows.as_bytes(), &corpus, "l").unwrap().len(), 10);
        assert!(read_labels("1,4\n".as_bytes(), &corpus, "l").unwrap_err().to_string().contains("outside"));
        assert!(read_labels("99,1\n".as_bytes(), &corpus, "l").unwrap_err().to_string().contains("not in the corpus"));
    }
}
