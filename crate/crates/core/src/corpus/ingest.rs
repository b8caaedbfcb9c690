use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{LabeledMessage, MessageRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown corpus format {other:?} (expected jsonl or csv)"
            ))),
        }
    }
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

/// Timestamps went backwards inside a channel; the stream was stably re-sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub line: usize,
    pub channel: String,
    pub message_id: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    /// Sorted by (channel, timestamp), stable with respect to file order.
    pub messages: Vec<LabeledMessage>,
    pub warnings: Vec<IngestWarning>,
}

pub fn ingest(path: &Path, format: Format) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        Format::Jsonl => read_jsonl(BufReader::new(file), path)?,
        Format::Csv => read_csv(file)?,
    };
    finish(records)
}

fn read_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<Vec<(usize, MessageRecord)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MessageRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<(usize, MessageRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<MessageRecord>().enumerate() {
        // header is line 1
        let line = i + 2;
        let mut rec = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(line),
            message: e.to_string(),
        })?;
        if rec.text.as_deref() == Some("") {
            rec.text = None;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn finish(records: Vec<(usize, MessageRecord)>) -> Result<Ingested> {
    let mut seen = HashSet::with_capacity(records.len());
    for (_, r) in &records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }

    // Detect decreasing timestamps per channel in file order.
    let mut warnings = Vec::new();
    let mut last: std::collections::HashMap<&str, i64> = std::collections::HashMap::new();
    for (line, r) in &records {
        if let Some(prev) = last.get(r.channel.as_str()) {
            if r.ts < *prev {
                warnings.push(IngestWarning {
                    line: *line,
                    channel: r.channel.clone(),
                    message_id: r.id.clone(),
                });
                log::warn!(
                    "line {line}: timestamp of {:?} goes backwards in channel {:?}; re-sorting",
                    r.id,
                    r.channel
                );
            }
        }
        last.insert(r.channel.as_str(), r.ts);
    }

    let mut messages: Vec<LabeledMessage> = records.into_iter().map(|(_, r)| r.into()).collect();
    messages.sort_by(|a, b| {
        a.message
            .channel
            .cmp(&b.message.channel)
            .then(a.message.timestamp.cmp(&b.message.timestamp))
    });
    Ok(Ingested { messages, warnings })
}

pub fn write_jsonl(messages: &[LabeledMessage], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for m in messages {
        let line = serde_json::to_string(&MessageRecord::from(m))?;
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn three_lines_in_timestamp_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.jsonl",
            concat!(
                r#"{"id":"m1","author":"a","ts":10,"channel":"c","label":"abuse"}"#,
                "\n",
                r#"{"id":"m2","author":"b","ts":20,"channel":"c","label":"none"}"#,
                "\n",
                r#"{"id":"m3","author":"a","ts":30,"channel":"c","label":"none","text":"hi"}"#,
                "\n"
            ),
        );
        let got = ingest(&p, Format::Jsonl).unwrap();
        assert!(got.warnings.is_empty());
        let ids: Vec<_> = got.messages.iter().map(|m| m.id()).collect();
        assert_eq!(ids, ["m1", "m2", "m3"]);
        let labels: Vec<_> = got.messages.iter().map(|m| m.label).collect();
        assert_eq!(labels, [Label::Abuse, Label::NonAbuse, Label::NonAbuse]);
        assert_eq!(got.messages[2].message.text.as_deref(), Some("hi"));
    }

    #[test]
    fn duplicate_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.jsonl",
            concat!(
                r#"{"id":"m1","author":"a","ts":10,"channel":"c","label":"none"}"#,
                "\n",
                r#"{"id":"m1","author":"b","ts":20,"channel":"c","label":"none"}"#,
                "\n"
            ),
        );
        match ingest(&p, Format::Jsonl) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "m1"),
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.jsonl", "");
        assert!(ingest(&p, Format::Jsonl).unwrap().messages.is_empty());
    }

    #[test]
    fn bad_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "b.jsonl",
            concat!(
                r#"{"id":"m1","author":"a","ts":10,"channel":"c","label":"none"}"#,
                "\n",
                r#"{"id":"m2","author":"a","channel":"c","label":"none"}"#,
                "\n"
            ),
        );
        match ingest(&p, Format::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn backwards_timestamp_warns_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "w.jsonl",
            concat!(
                r#"{"id":"m1","author":"a","ts":50,"channel":"c","label":"none"}"#,
                "\n",
                r#"{"id":"m2","author":"b","ts":20,"channel":"c","label":"none"}"#,
                "\n",
                r#"{"id":"x1","author":"b","ts":5,"channel":"a","label":"none"}"#,
                "\n"
            ),
        );
        let got = ingest(&p, Format::Jsonl).unwrap();
        assert_eq!(got.warnings.len(), 1);
        assert_eq!(got.warnings[0].message_id, "m2");
        let ids: Vec<_> = got.messages.iter().map(|m| m.id()).collect();
        assert_eq!(ids, ["x1", "m2", "m1"]);
    }

    #[test]
    fn csv_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.csv",
            "id,author,ts,channel,label,text\nm1,a,10,c,abuse,\nm2,b,11,c,none,hello\n",
        );
        let got = ingest(&p, Format::Csv).unwrap();
        assert_eq!(got.messages.len(), 2);
        assert_eq!(got.messages[0].message.text, None);
        assert_eq!(got.messages[1].message.text.as_deref(), Some("hello"));
    }
}
