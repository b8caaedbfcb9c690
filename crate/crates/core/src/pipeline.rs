//! The stages chained end to end.
//!
//! In memory: [`extract_graphs`], [`feature_vectors`], [`evaluate_representations`]
//! and [`ablate`]. Over files: one `stage_*` function per command-line
//! subcommand, plus [`run_pipeline`], which chains them inside one output
//! directory and can skip stages whose inputs and outputs are unchanged.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{capture_matrix, concat_columns, report, CaptureReport, TableRow};
use crate::classify::{evaluate, make_splits, train_svm, EvalResult, SplitPlan, SvmModel, SvmParams};
use crate::corpus::{ingest, sample_balanced, split_dev, synthesize, write_jsonl, DatasetSpec, Format, Label, LabeledMessage, SynthParams};
use crate::embed::{embed_corpus, EmbedConfig, EmbeddingVector, Method};
use crate::extract::{build_graph, ExtractConfig, StreamIndex};
use crate::features::{all_feature_names, compute_features, top_feature_names, FeatureConfig, FeatureVector};
use crate::graph::ConvGraph;
use crate::io::{self, FeatureTable};
use crate::{Error, Result};

/// Name of the topological-measure representation in result files.
pub const BASELINE: &str = "baseline";

/// Builds one graph per target. `stream` must be sorted by (channel, time).
pub fn extract_graphs(stream: &[LabeledMessage], targets: &[LabeledMessage], cfg: &ExtractConfig) -> Result<Vec<ConvGraph>> {
    cfg.validate()?;
    let index = StreamIndex::new(stream);
    targets
        .par_iter()
        .map(|t| build_graph(&index.context(t.id(), cfg)?, cfg))
        .collect()
}

pub fn labels_of(graphs: &[ConvGraph]) -> Result<Vec<Label>> {
    graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.label().ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("graph {} carries no label", g.meta().message),
            })
        })
        .collect()
}

pub fn graph_ids(graphs: &[ConvGraph]) -> Vec<String> {
    graphs.iter().map(|g| g.meta().message.clone()).collect()
}

pub fn feature_vectors(graphs: &[ConvGraph], names: &[String], cfg: &FeatureConfig) -> Result<Vec<FeatureVector>> {
    graphs.par_iter().map(|g| compute_features(g, names, cfg)).collect()
}

/// Rows of `rows_by_id` reordered to follow `ids`.
fn align(ids: &[String], source: &str, rows_by_id: Vec<(String, Vec<f64>)>) -> Result<Vec<Vec<f64>>> {
    let mut map: HashMap<String, Vec<f64>> = HashMap::with_capacity(rows_by_id.len());
    for (id, row) in rows_by_id {
        if map.insert(id.clone(), row).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    ids.iter()
        .map(|id| {
            map.remove(id).ok_or_else(|| Error::IdentityMismatch {
                left: id.clone(),
                right: format!("<missing from {source}>"),
            })
        })
        .collect()
}

pub fn embedding_rows(ids: &[String], embeddings: &[EmbeddingVector]) -> Result<Vec<Vec<f64>>> {
    let source = embeddings.first().map_or("embeddings", |e| e.method.name());
    align(ids, source, embeddings.iter().map(|e| (e.graph_id.clone(), e.values.clone())).collect())
}

pub fn feature_rows(ids: &[String], table: &FeatureTable) -> Result<Vec<Vec<f64>>> {
    align(ids, "features", table.ids.iter().cloned().zip(table.rows.iter().cloned()).collect())
}

pub fn feature_table(ids: &[String], vectors: &[FeatureVector]) -> FeatureTable {
    FeatureTable {
        names: vectors.first().map(|v| v.names.clone()).unwrap_or_default(),
        ids: ids.to_vec(),
        rows: vectors.iter().map(|v| v.values.clone()).collect(),
    }
}

/// Everything needed to evaluate: labels in graph order plus the split plan.
#[derive(Debug, Clone)]
pub struct Design {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub plan: SplitPlan,
}

impl Design {
    pub fn new(graphs: &[ConvGraph], seed: u64) -> Result<Design> {
        let labels = labels_of(graphs)?;
        Ok(Design {
            ids: graph_ids(graphs),
            plan: make_splits(&labels, seed)?,
            labels,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub rows: Vec<TableRow>,
    /// Per-repetition scores keyed `baseline`, `<method>`, `<method>+baseline`.
    pub results: Vec<(String, EvalResult)>,
}

/// Evaluates the baseline (when features are given) and every embedding on
/// its own and fused with the features.
pub fn evaluate_representations(
    design: &Design,
    features: Option<&FeatureTable>,
    embeddings: &[(Method, Vec<EmbeddingVector>)],
    params: &SvmParams,
) -> Result<Evaluation> {
    let base = features.map(|t| feature_rows(&design.ids, t)).transpose()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    if let Some(b) = &base {
        let r = evaluate(b, &design.labels, &design.plan, params)?;
        rows.push(TableRow {
            method: BASELINE.into(),
            dimension: b.first().map_or(0, Vec::len),
            alone: r.clone(),
            fused_dimension: None,
            fused: None,
        });
        results.push((BASELINE.to_string(), r));
    }
    for (method, emb) in embeddings {
        let m = embedding_rows(&design.ids, emb)?;
        let alone = evaluate(&m, &design.labels, &design.plan, params)?;
        let dimension = m.first().map_or(0, Vec::len);
        results.push((method.name().to_string(), alone.clone()));
        let (fused_dimension, fused) = match &base {
            Some(b) => {
                let f = concat_columns(&m, b)?;
                let r = evaluate(&f, &design.labels, &design.plan, params)?;
                results.push((format!("{}+{BASELINE}", method.name()), r.clone()));
                (Some(f.first().map_or(0, Vec::len)), Some(r))
            }
            None => (None, None),
        };
        rows.push(TableRow {
            method: method.name().to_string(),
            dimension,
            alone,
            fused_dimension,
            fused,
        });
    }
    Ok(Evaluation { rows, results })
}

/// Capture matrix of every embedding against the named feature columns.
pub fn ablate(
    design: &Design,
    features: &FeatureTable,
    feature_names: &[String],
    embeddings: &[(Method, Vec<EmbeddingVector>)],
    params: &SvmParams,
) -> Result<CaptureReport> {
    let base = feature_rows(&design.ids, features)?;
    let columns = feature_names
        .iter()
        .map(|name| {
            let c = features
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UndefinedMeasure(name.clone()))?;
            Ok((name.clone(), base.iter().map(|r| r[c]).collect()))
        })
        .collect::<Result<Vec<(String, Vec<f64>)>>>()?;
    let matrices = embeddings
        .iter()
        .map(|(m, e)| Ok((m.name().to_string(), embedding_rows(&design.ids, e)?)))
        .collect::<Result<Vec<_>>>()?;
    capture_matrix(&matrices, &columns, &design.labels, &design.plan, params)
}

/// Every knob of a run. A single seed drives sampling, modularity tie-breaks,
/// embeddings and split plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub synth: SynthParams,
    pub dataset: DatasetSpec,
    /// Share of each class held out as a development set (0 keeps everything).
    pub dev_fraction: f64,
    pub extract: ExtractConfig,
    pub features: FeatureConfig,
    pub feature_names: Vec<String>,
    pub embed: EmbedConfig,
    pub svm: SvmParams,
    pub methods: Vec<Method>,
    pub ablate: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let extract = ExtractConfig::default();
        let mut cfg = PipelineConfig {
            seed: 0,
            synth: default_synth(0),
            dataset: DatasetSpec {
                abuse_count: 200,
                full_context_only: true,
                context_period: extract.context_period,
                ..DatasetSpec::default()
            },
            dev_fraction: 0.0,
            extract,
            features: FeatureConfig::default(),
            feature_names: all_feature_names(),
            embed: EmbedConfig::default(),
            svm: SvmParams::default(),
            methods: Method::ALL.to_vec(),
            ablate: true,
        };
        cfg.set_seed(0);
        cfg
    }
}

/// Synthetic corpus large enough for 200 abusive and 200 non-abusive targets
/// with complete, non-overlapping context periods.
pub fn default_synth(seed: u64) -> SynthParams {
    SynthParams {
        n_conversations: 100,
        msgs_per_conv: 7000,
        abuse_rate: 2.0 / 7000.0,
        structure_signal: 1.0,
        seed,
    }
}

impl PipelineConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.synth.seed = seed;
        self.dataset.seed = seed;
        self.features.modularity_seed = seed;
        self.embed.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.extract.validate()?;
        if !(0.0..1.0).contains(&self.dev_fraction) {
            return Err(Error::InvalidParameter(format!("dev_fraction must be in [0, 1), got {}", self.dev_fraction)));
        }
        for &m in &self.methods {
            self.embed.validate(m)?;
        }
        if self.feature_names.is_empty() && self.ablate {
            return Err(Error::InvalidParameter("ablation needs the feature stage".into()));
        }
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn stage_synth(params: &SynthParams, out: &Path) -> Result<usize> {
    let msgs = synthesize(params)?;
    write_messages(&msgs, out)?;
    Ok(msgs.len())
}

fn read_messages(path: &Path) -> Result<Vec<LabeledMessage>> {
    let ingested = ingest(path, Format::from_path(path))?;
    for w in &ingested.warnings {
        log::warn!(
            "{}: line {}: message {} out of order in channel {}; re-sorted",
            path.display(),
            w.line,
            w.message_id,
            w.channel
        );
    }
    Ok(ingested.messages)
}

fn write_messages(messages: &[LabeledMessage], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_jsonl(messages, path)
}

/// Held-out development set: share of each class and where to write it.
#[derive(Debug, Clone, Copy)]
pub struct DevSplit<'a> {
    pub fraction: f64,
    pub out: &'a Path,
}

/// Samples a dataset from `messages` (or reads the targets from `targets`),
/// optionally moves a development set aside, writes the rest to
/// `dataset_out` when given, and writes one graph per remaining target.
pub fn stage_extract(
    messages: &Path,
    targets: Option<&Path>,
    spec: &DatasetSpec,
    dev: Option<DevSplit<'_>>,
    cfg: &ExtractConfig,
    dataset_out: Option<&Path>,
    graphs_out: &Path,
) -> Result<usize> {
    let stream = read_messages(messages)?;
    let mut dataset = match targets {
        Some(t) => ingest(t, Format::from_path(t))?.messages,
        None => sample_balanced(&stream, spec)?,
    };
    if let Some(d) = dev {
        let (main, held_out) = split_dev(&dataset, d.fraction, spec.seed)?;
        write_messages(&held_out, d.out)?;
        dataset = main;
    }
    if let Some(d) = dataset_out {
        write_messages(&dataset, d)?;
    }
    let graphs = extract_graphs(&stream, &dataset, cfg)?;
    io::write_graphs(graphs_out, &graphs)?;
    Ok(graphs.len())
}

pub fn stage_features(graphs: &Path, names: &[String], cfg: &FeatureConfig, out: &Path) -> Result<usize> {
    let graphs = io::read_graphs(graphs)?;
    let vectors = feature_vectors(&graphs, names, cfg)?;
    io::write_features(out, &graph_ids(&graphs), &vectors)?;
    Ok(vectors.first().map_or(0, FeatureVector::len))
}

pub fn stage_embed(graphs: &Path, method: Method, cfg: &EmbedConfig, out: &Path) -> Result<usize> {
    let graphs = io::read_graphs(graphs)?;
    let e = embed_corpus(&graphs, method, cfg)?;
    io::write_embeddings(out, &e)?;
    Ok(cfg.output_dim(method))
}

fn load_embeddings(paths: &[PathBuf]) -> Result<Vec<(Method, Vec<EmbeddingVector>)>> {
    paths
        .iter()
        .map(|p| {
            let e = io::read_embeddings(p)?;
            let method = e.first().map(|v| v.method).ok_or_else(|| Error::Parse {
                line: 2,
                message: format!("{} holds no embeddings", p.display()),
            })?;
            if let Some(other) = e.iter().find(|v| v.method != method) {
                return Err(Error::Parse {
                    line: 2,
                    message: format!("mixed methods {} and {} in {}", method.name(), other.method.name(), p.display()),
                });
            }
            Ok((method, e))
        })
        .collect()
}

/// Fits one SVM on every graph of the selected representation (features,
/// one embedding, or both fused) and writes the model as JSON.
pub fn stage_train(
    graphs: &Path,
    features: Option<&Path>,
    embedding: Option<&Path>,
    params: &SvmParams,
    out: &Path,
) -> Result<SvmModel> {
    let graphs = io::read_graphs(graphs)?;
    let ids = graph_ids(&graphs);
    let labels = labels_of(&graphs)?;
    let emb = embedding
        .map(|p| load_embeddings(&[p.to_path_buf()]))
        .transpose()?
        .map(|mut v| embedding_rows(&ids, &v.remove(0).1))
        .transpose()?;
    let feat = features
        .map(|p| io::read_features(p).and_then(|t| feature_rows(&ids, &t)))
        .transpose()?;
    let matrix = match (emb, feat) {
        (Some(e), Some(f)) => concat_columns(&e, &f)?,
        (Some(e), None) => e,
        (None, Some(f)) => f,
        (None, None) => return Err(Error::InvalidParameter("train needs --features or --embeddings".into())),
    };
    let rows: Vec<&[f64]> = matrix.iter().map(Vec::as_slice).collect();
    let model = train_svm(&rows, &labels, params)?;
    write_json(out, &model)?;
    Ok(model)
}

/// Writes `results.csv` and `table.json` into `out_dir`.
pub fn stage_evaluate(
    graphs: &Path,
    features: Option<&Path>,
    embeddings: &[PathBuf],
    seed: u64,
    params: &SvmParams,
    out_dir: &Path,
) -> Result<Evaluation> {
    let graphs = io::read_graphs(graphs)?;
    let design = Design::new(&graphs, seed)?;
    drop(graphs);
    let table = features.map(io::read_features).transpose()?;
    let emb = load_embeddings(embeddings)?;
    let ev = evaluate_representations(&design, table.as_ref(), &emb, params)?;
    io::write_results(&out_dir.join("results.csv"), &ev.results)?;
    write_json(&out_dir.join("table.json"), &ev.rows)?;
    Ok(ev)
}

/// Writes `capture.json` into `out_dir`.
pub fn stage_ablate(
    graphs: &Path,
    features: &Path,
    feature_names: &[String],
    embeddings: &[PathBuf],
    seed: u64,
    params: &SvmParams,
    out_dir: &Path,
) -> Result<CaptureReport> {
    let graphs = io::read_graphs(graphs)?;
    let design = Design::new(&graphs, seed)?;
    drop(graphs);
    let table = io::read_features(features)?;
    let emb = load_embeddings(embeddings)?;
    let rep = ablate(&design, &table, feature_names, &emb, params)?;
    write_json(&out_dir.join("capture.json"), &rep)?;
    Ok(rep)
}

/// Renders `table.json` (and `capture.json` when present) from `dir` into
/// `table3.csv`, `fig4.csv` and `summary.md` in the same directory.
pub fn stage_report(dir: &Path) -> Result<()> {
    let rows: Vec<TableRow> = read_json(&dir.join("table.json"))?;
    let cap_path = dir.join("capture.json");
    let capture: Option<CaptureReport> = if cap_path.exists() { Some(read_json(&cap_path)?) } else { None };
    report(&rows, capture.as_ref(), dir)
}

/// Where the messages come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synth,
    File(PathBuf),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
struct Stamp {
    key: String,
    outputs: Vec<(String, String)>,
}

/// Resumable stage runner. A stage is skipped when its stamp records the same
/// key (config plus input hashes) and every output still has the recorded hash.
struct Runner<'a> {
    root: &'a Path,
    resume: bool,
    skipped: Vec<String>,
}

impl Runner<'_> {
    fn stamp_path(&self, stage: &str) -> PathBuf {
        self.root.join(".stamps").join(format!("{stage}.json"))
    }

    fn key(&self, stage: &str, config: &impl Serialize, inputs: &[&Path]) -> Result<String> {
        let mut h = Sha256::new();
        h.update(stage.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(config)?);
        for p in inputs {
            h.update([0]);
            h.update(file_sha256(p)?.as_bytes());
        }
        Ok(hex(&h.finalize()))
    }

    fn fresh(&self, stage: &str, key: &str) -> bool {
        let Ok(stamp) = read_json::<Stamp>(&self.stamp_path(stage)) else {
            return false;
        };
        stamp.key == key
            && stamp
                .outputs
                .iter()
                .all(|(rel, hash)| file_sha256(&self.root.join(rel)).is_ok_and(|h| &h == hash))
    }

    fn run(
        &mut self,
        stage: &str,
        config: &impl Serialize,
        inputs: &[&Path],
        outputs: &[PathBuf],
        work: impl FnOnce() -> Result<()>,
    ) -> Result<()> {
        let key = self.key(stage, config, inputs)?;
        if self.resume && self.fresh(stage, &key) {
            log::info!("stage {stage}: up to date, skipped");
            self.skipped.push(stage.to_string());
            return Ok(());
        }
        log::info!("stage {stage}: running");
        work()?;
        let outputs = outputs
            .iter()
            .map(|p| {
                let rel = p.strip_prefix(self.root).unwrap_or(p).to_string_lossy().into_owned();
                Ok((rel, file_sha256(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        write_json(&self.stamp_path(stage), &Stamp { key, outputs })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub evaluation: Evaluation,
    pub capture: Option<CaptureReport>,
    /// Stages skipped thanks to `resume`.
    pub skipped: Vec<String>,
}

/// Runs every stage inside `out_dir`:
///
/// ```text
/// messages.jsonl -> dataset.jsonl, graphs.jsonl -> features.csv
///   -> embeddings/<method>.csv -> results/{results.csv, table.json, capture.json}
///   -> results/{table3.csv, fig4.csv, summary.md}
/// ```
pub fn run_pipeline(source: &Source, cfg: &PipelineConfig, out_dir: &Path, resume: bool) -> Result<PipelineOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut runner = Runner {
        root: out_dir,
        resume,
        skipped: Vec::new(),
    };

    let messages = match source {
        Source::File(p) => p.clone(),
        Source::Synth => {
            let p = out_dir.join("messages.jsonl");
            runner.run("synth", &cfg.synth, &[], std::slice::from_ref(&p), || {
                stage_synth(&cfg.synth, &p).map(drop)
            })?;
            p
        }
    };

    let dataset = out_dir.join("dataset.jsonl");
    let graphs = out_dir.join("graphs.jsonl");
    let dev_path = out_dir.join("dev.jsonl");
    let dev = (cfg.dev_fraction > 0.0).then_some(DevSplit {
        fraction: cfg.dev_fraction,
        out: &dev_path,
    });
    let mut outputs = vec![dataset.clone(), graphs.clone()];
    outputs.extend(dev.map(|d| d.out.to_path_buf()));
    runner.run(
        "extract",
        &(&cfg.dataset, cfg.dev_fraction, &cfg.extract),
        &[&messages],
        &outputs,
        || stage_extract(&messages, None, &cfg.dataset, dev, &cfg.extract, Some(&dataset), &graphs).map(drop),
    )?;

    let features = (!cfg.feature_names.is_empty()).then(|| out_dir.join("features.csv"));
    if let Some(f) = &features {
        runner.run("features", &(&cfg.features, &cfg.feature_names), &[&graphs], std::slice::from_ref(f), || {
            stage_features(&graphs, &cfg.feature_names, &cfg.features, f).map(drop)
        })?;
    }

    let mut emb_paths = Vec::new();
    for &m in &cfg.methods {
        let p = out_dir.join("embeddings").join(format!("{}.csv", m.name()));
        let stage = format!("embed-{}", m.name());
        runner.run(&stage, &(m, &cfg.embed), &[&graphs], std::slice::from_ref(&p), || {
            stage_embed(&graphs, m, &cfg.embed, &p).map(drop)
        })?;
        emb_paths.push(p);
    }

    let results = out_dir.join("results");
    let mut eval_inputs: Vec<&Path> = vec![&graphs];
    eval_inputs.extend(features.as_deref());
    eval_inputs.extend(emb_paths.iter().map(PathBuf::as_path));
    runner.run(
        "evaluate",
        &(cfg.seed, &cfg.svm),
        &eval_inputs,
        &[results.join("results.csv"), results.join("table.json")],
        || stage_evaluate(&graphs, features.as_deref(), &emb_paths, cfg.seed, &cfg.svm, &results).map(drop),
    )?;

    let capture_path = results.join("capture.json");
    match (&features, cfg.ablate) {
        (Some(f), true) => {
            let top = top_feature_names();
            runner.run("ablate", &(cfg.seed, &cfg.svm, &top), &eval_inputs, std::slice::from_ref(&capture_path), || {
                stage_ablate(&graphs, f, &top, &emb_paths, cfg.seed, &cfg.svm, &results).map(drop)
            })?;
        }
        _ => {
            if capture_path.exists() {
                std::fs::remove_file(&capture_path).map_err(|e| Error::io(&capture_path, e))?;
            }
        }
    }

    let mut report_inputs = vec![results.join("table.json")];
    if capture_path.exists() {
        report_inputs.push(capture_path.clone());
    }
    let report_refs: Vec<&Path> = report_inputs.iter().map(PathBuf::as_path).collect();
    let mut report_outputs = vec![results.join("table3.csv"), results.join("summary.md")];
    if capture_path.exists() {
        report_outputs.push(results.join("fig4.csv"));
    }
    runner.run("report", &"report", &report_refs, &report_outputs, || stage_report(&results))?;

    let rows: Vec<TableRow> = read_json(&results.join("table.json"))?;
    let evaluation = Evaluation {
        rows,
        results: io::read_results(&results.join("results.csv"))?,
    };
    let capture = if capture_path.exists() { Some(read_json(&capture_path)?) } else { None };
    Ok(PipelineOutcome {
        evaluation,
        capture,
        skipped: runner.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::top_feature_names;

    fn small_config() -> PipelineConfig {
        let mut cfg = PipelineConfig {
            synth: SynthParams {
                n_conversations: 12,
                msgs_per_conv: 900,
                abuse_rate: 2.0 / 900.0,
                structure_signal: 1.0,
                seed: 0,
            },
            dataset: DatasetSpec {
                abuse_count: 20,
                context_period: 100,
                full_context_only: true,
                ..DatasetSpec::default()
            },
            extract: ExtractConfig {
                context_period: 100,
                ..ExtractConfig::default()
            },
            methods: vec![Method::Sf, Method::Fgsd],
            ..PipelineConfig::default()
        };
        cfg.set_seed(3);
        cfg
    }

    fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn extraction_follows_targets() {
        let cfg = small_config();
        let stream = synthesize(&cfg.synth).unwrap();
        let ds = sample_balanced(&stream, &cfg.dataset).unwrap();
        let graphs = extract_graphs(&stream, &ds, &cfg.extract).unwrap();
        assert_eq!(graphs.len(), 40);
        for (g, m) in graphs.iter().zip(&ds) {
            assert_eq!(g.meta().message, m.id());
            assert_eq!(g.label(), Some(m.label));
            assert_eq!(g.nodes()[0], m.message.author);
        }
    }

    #[test]
    fn alignment_reorders_and_rejects_missing_ids() {
        let ids: Vec<String> = vec!["a".into(), "b".into()];
        let rows = align(&ids, "x", vec![("b".into(), vec![2.0]), ("a".into(), vec![1.0])]).unwrap();
        assert_eq!(rows, vec![vec![1.0], vec![2.0]]);
        assert!(matches!(
            align(&ids, "x", vec![("a".into(), vec![1.0])]),
            Err(Error::IdentityMismatch { .. })
        ));
        assert!(matches!(
            align(&ids, "x", vec![("a".into(), vec![1.0]), ("a".into(), vec![1.0])]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn pipeline_is_deterministic_and_resumable() {
        let cfg = small_config();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out_a = run_pipeline(&Source::Synth, &cfg, a.path(), false).unwrap();
        run_pipeline(&Source::Synth, &cfg, b.path(), false).unwrap();
        assert_eq!(tree(&a.path().join("results")), tree(&b.path().join("results")));

        let rows = &out_a.evaluation.rows;
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].method, BASELINE);
        let nf = all_feature_names().len();
        assert_eq!(rows[1].fused_dimension, Some(128 + nf));
        assert_eq!(rows[2].fused_dimension, Some(200 + nf));
        let cap = out_a.capture.as_ref().unwrap();
        assert_eq!(cap.cells.len(), 2 * top_feature_names().len());
        let fig = std::fs::read_to_string(a.path().join("results/fig4.csv")).unwrap();
        assert_eq!(fig.lines().count(), 1 + 18);

        let again = run_pipeline(&Source::Synth, &cfg, a.path(), true).unwrap();
        assert_eq!(again.skipped.len(), 8);
        assert_eq!(again.evaluation, out_a.evaluation);

        // a damaged output reruns its stage; identical content keeps the rest
        let f = a.path().join("embeddings/fgsd.csv");
        let mut text = std::fs::read_to_string(&f).unwrap();
        text.push('\n');
        std::fs::write(&f, text).unwrap();
        let third = run_pipeline(&Source::Synth, &cfg, a.path(), true).unwrap();
        assert!(!third.skipped.contains(&"embed-fgsd".to_string()));
        assert_eq!(third.skipped.len(), 7);
        assert_eq!(tree(&a.path().join("results")), tree(&b.path().join("results")));
    }

    #[test]
    fn dev_set_is_held_out() {
        let mut cfg = small_config();
        cfg.dataset.abuse_count = 24;
        cfg.dev_fraction = 0.25;
        cfg.ablate = false;
        cfg.methods = vec![Method::Sf];
        let dir = tempfile::tempdir().unwrap();
        run_pipeline(&Source::Synth, &cfg, dir.path(), false).unwrap();
        let dev = ingest(&dir.path().join("dev.jsonl"), Format::Jsonl).unwrap().messages;
        let graphs = io::read_graphs(&dir.path().join("graphs.jsonl")).unwrap();
        assert_eq!((dev.len(), graphs.len()), (12, 36));
        let ids = graph_ids(&graphs);
        assert!(dev.iter().all(|m| !ids.iter().any(|i| i == m.id())));
    }

    #[test]
    fn seed_changes_results() {
        let mut cfg = small_config();
        cfg.ablate = false;
        cfg.methods = vec![Method::Sf];
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_pipeline(&Source::Synth, &cfg, a.path(), false).unwrap();
        cfg.set_seed(4);
        run_pipeline(&Source::Synth, &cfg, b.path(), false).unwrap();
        assert_ne!(
            std::fs::read(a.path().join("graphs.jsonl")).unwrap(),
            std::fs::read(b.path().join("graphs.jsonl")).unwrap()
        );
        assert!(!a.path().join("results/fig4.csv").exists());
    }
}
