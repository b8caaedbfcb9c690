//! On-disk formats for intermediate artifacts.
//!
//! Graphs are JSON lines. Features, embeddings and results are CSV with a
//! header row; floats are written in shortest round-trip form so reading a
//! file back reproduces the exact values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::classify::EvalResult;
use crate::embed::{EmbeddingVector, Method};
use crate::features::FeatureVector;
use crate::graph::ConvGraph;
use crate::{Error, Result};

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: '{s}'"),
    })
}

pub fn write_graphs(path: &Path, graphs: &[ConvGraph]) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    for g in graphs {
        writeln!(w, "{}", g.to_json()?).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_graphs(path: &Path) -> Result<Vec<ConvGraph>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(open(path)?).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(ConvGraph::from_json(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Header `graph_id,<feature names…>`; one row per graph.
pub fn write_features(path: &Path, ids: &[String], features: &[FeatureVector]) -> Result<()> {
    if ids.len() != features.len() {
        return Err(Error::LengthMismatch {
            expected: ids.len(),
            got: features.len(),
        });
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    let names = features.first().map(|f| f.names.clone()).unwrap_or_default();
    let mut header = vec!["graph_id".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (id, f) in ids.iter().zip(features) {
        if f.names != names {
            return Err(Error::Protocol(format!("feature columns differ for {id}")));
        }
        let mut rec = vec![id.clone()];
        rec.extend(f.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let header = r.headers()?.clone();
    if header.get(0) != Some("graph_id") {
        return Err(Error::Parse {
            line: 1,
            message: "expected graph_id as first column".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let (mut ids, mut rows) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != names.len() + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", names.len() + 1, rec.len()),
            });
        }
        ids.push(rec[0].to_string());
        rows.push(rec.iter().skip(1).map(|v| parse_f64(v, line)).collect::<Result<Vec<_>>>()?);
    }
    Ok(FeatureTable { names, ids, rows })
}

/// Header `graph_id,method,dim,v_0..v_{d-1}`.
pub fn write_embeddings(path: &Path, embeddings: &[EmbeddingVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let d = embeddings.first().map_or(0, |e| e.values.len());
    let mut header: Vec<String> = vec!["graph_id".into(), "method".into(), "dim".into()];
    header.extend((0..d).map(|i| format!("v_{i}")));
    w.write_record(&header)?;
    for e in embeddings {
        if e.values.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: e.values.len(),
            });
        }
        let mut rec = vec![e.graph_id.clone(), e.method.name().to_string(), d.to_string()];
        rec.extend(e.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: &Path) -> Result<Vec<EmbeddingVector>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let err = |message: String| Error::Parse { line, message };
        if rec.len() < 3 {
            return Err(err("missing columns".into()));
        }
        let method: Method = rec[1].parse().map_err(|e: Error| err(e.to_string()))?;
        let dim: usize = rec[2].parse().map_err(|_| err(format!("bad dimension '{}'", &rec[2])))?;
        if rec.len() != dim + 3 {
            return Err(err(format!("expected {dim} values, got {}", rec.len() - 3)));
        }
        out.push(EmbeddingVector {
            graph_id: rec[0].to_string(),
            method,
            values: rec.iter().skip(3).map(|v| parse_f64(v, line)).collect::<Result<Vec<_>>>()?,
        });
    }
    Ok(out)
}

/// Rows `method,repetition,f_measure`, then `mean` and `std` summary rows
/// per method.
pub fn write_results(path: &Path, results: &[(String, EvalResult)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["method", "repetition", "f_measure"])?;
    for (method, r) in results {
        for (i, f) in r.f_measures.iter().enumerate() {
            w.write_record([method.as_str(), &i.to_string(), &f.to_string()])?;
        }
        w.write_record([method.as_str(), "mean", &r.mean.to_string()])?;
        w.write_record([method.as_str(), "std", &r.std.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<(String, EvalResult)>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse {
                line: i + 2,
                message: "expected 3 fields".into(),
            });
        }
        if rec[1].parse::<usize>().is_err() {
            continue;
        }
        let f = parse_f64(&rec[2], i + 2)?;
        match out.last_mut() {
            Some((m, v)) if m == &rec[0] => v.push(f),
            _ => out.push((rec[0].to_string(), vec![f])),
        }
    }
    Ok(out.into_iter().map(|(m, v)| (m, EvalResult::from_scores(v))).collect())
}
