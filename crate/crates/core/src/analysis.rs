//! Early fusion of embeddings with topological measures, the measure-capture
//! matrix, and report rendering.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::classify::{evaluate, EvalResult, SplitPlan, SvmParams};
use crate::corpus::Label;
use crate::embed::EmbeddingVector;
use crate::features::FeatureVector;
use crate::{Error, Result};

/// ΔF below which a feature counts as captured by an embedding.
pub const CAPTURE_THRESHOLD: f64 = 0.005;
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSource {
    Embedding { method: String, index: usize },
    Feature(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRepresentation {
    pub graph_id: String,
    pub values: Vec<f64>,
    pub provenance: Vec<ColumnSource>,
}

/// Concatenates an embedding with the features of the same message.
pub fn fuse(embedding: &EmbeddingVector, feature_graph_id: &str, features: &FeatureVector) -> Result<FusedRepresentation> {
    if embedding.graph_id != feature_graph_id {
        return Err(Error::IdentityMismatch {
            left: embedding.graph_id.clone(),
            right: feature_graph_id.to_string(),
        });
    }
    let mut values = embedding.values.clone();
    values.extend_from_slice(&features.values);
    let mut provenance: Vec<ColumnSource> = (0..embedding.values.len())
        .map(|index| ColumnSource::Embedding {
            method: embedding.method.name().to_string(),
            index,
        })
        .collect();
    provenance.extend(features.names.iter().cloned().map(ColumnSource::Feature));
    Ok(FusedRepresentation {
        graph_id: embedding.graph_id.clone(),
        values,
        provenance,
    })
}

/// Row-wise concatenation of two equally long matrices.
pub fn concat_columns(left: &[Vec<f64>], right: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if left.len() != right.len() {
        return Err(Error::LengthMismatch {
            expected: left.len(),
            got: right.len(),
        });
    }
    Ok(left
        .iter()
        .zip(right)
        .map(|(a, b)| a.iter().chain(b).copied().collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Captured,
    Partial,
    NotCaptured,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Captured => "captured",
            Verdict::Partial => "partial",
            Verdict::NotCaptured => "not_captured",
        }
    }
}

pub fn verdict(delta_f: f64, p_value: f64) -> Verdict {
    if delta_f < CAPTURE_THRESHOLD {
        Verdict::Captured
    } else if p_value < SIGNIFICANCE {
        Verdict::NotCaptured
    } else {
        Verdict::Partial
    }
}

/// Two-sided paired t-test on `b − a`. Constant differences give p = 1 when
/// they are all zero and p = 0 otherwise.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("paired test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let m = crate::util::mean(&d);
    let sd = crate::util::std_dev(&d);
    if sd == 0.0 {
        return Ok(if m == 0.0 { 1.0 } else { 0.0 });
    }
    let n = d.len() as f64;
    let t = m / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| Error::Protocol(e.to_string()))?;
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureCell {
    pub method: String,
    pub feature: String,
    pub f_embedding: f64,
    pub f_fused: f64,
    pub delta_f: f64,
    pub p_value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureReport {
    pub methods: Vec<String>,
    pub features: Vec<String>,
    /// Row-major over (method, feature).
    pub cells: Vec<CaptureCell>,
    pub baselines: Vec<EvalResult>,
}

impl CaptureReport {
    pub fn cell(&self, method: &str, feature: &str) -> Option<&CaptureCell> {
        self.cells.iter().find(|c| c.method == method && c.feature == feature)
    }
}

/// ΔF of appending each single feature column to each embedding.
/// `embeddings` holds (name, rows); `features` holds (name, column).
pub fn capture_matrix(
    embeddings: &[(String, Vec<Vec<f64>>)],
    features: &[(String, Vec<f64>)],
    labels: &[Label],
    plan: &SplitPlan,
    params: &SvmParams,
) -> Result<CaptureReport> {
    for (name, col) in features {
        if col.len() != labels.len() {
            return Err(Error::Protocol(format!("feature {name} has {} rows, expected {}", col.len(), labels.len())));
        }
    }
    let baselines = embeddings
        .par_iter()
        .map(|(_, m)| evaluate(m, labels, plan, params))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..embeddings.len())
        .flat_map(|e| (0..features.len()).map(move |f| (e, f)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(e, f)| {
            let (method, rows) = &embeddings[e];
            let (feature, col) = &features[f];
            let fused: Vec<Vec<f64>> = rows
                .iter()
                .zip(col)
                .map(|(r, &v)| {
                    let mut r = r.clone();
                    r.push(v);
                    r
                })
                .collect();
            let res = evaluate(&fused, labels, plan, params)?;
            let base = &baselines[e];
            let delta_f = res.mean - base.mean;
            let p_value = paired_t_test(&base.f_measures, &res.f_measures)?;
            Ok(CaptureCell {
                method: method.clone(),
                feature: feature.clone(),
                f_embedding: base.mean,
                f_fused: res.mean,
                delta_f,
                p_value,
                verdict: verdict(delta_f, p_value),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CaptureReport {
        methods: embeddings.iter().map(|(n, _)| n.clone()).collect(),
        features: features.iter().map(|(n, _)| n.clone()).collect(),
        cells,
        baselines,
    })
}

/// One line of the results table: a representation alone and fused with the
/// topological measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub dimension: usize,
    pub alone: EvalResult,
    pub fused_dimension: Option<usize>,
    pub fused: Option<EvalResult>,
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("method,dimension,f_measure,f_std,fused_dimension,fused_f_measure,fused_f_std\n");
    for r in rows {
        let (fd, ff, fs) = match (&r.fused_dimension, &r.fused) {
            (Some(d), Some(f)) => (d.to_string(), format!("{:.6}", f.mean), format!("{:.6}", f.std)),
            _ => (String::new(), String::new(), String::new()),
        };
        let _ = writeln!(s, "{},{},{:.6},{:.6},{fd},{ff},{fs}", r.method, r.dimension, r.alone.mean, r.alone.std);
    }
    s
}

fn fig_csv(report: &CaptureReport, scale_of: &dyn Fn(&str) -> &'static str) -> String {
    let mut s = String::from("method,feature,scale,f_embedding,f_fused,delta_f,p_value,verdict\n");
    for c in &report.cells {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            c.method,
            c.feature,
            scale_of(&c.feature),
            c.f_embedding,
            c.f_fused,
            c.delta_f,
            c.p_value,
            c.verdict.as_str()
        );
    }
    s
}

fn summary_md(rows: &[TableRow], report: Option<&CaptureReport>) -> String {
    let mut s = String::from("# Results\n\n## Micro F-measure (%)\n\n");
    s.push_str("| Representation | Dim. | F | Fused dim. | Fused F |\n|---|---:|---:|---:|---:|\n");
    for r in rows {
        let fused = r.fused.as_ref().map(|f| pct(f.mean)).unwrap_or_else(|| "-".into());
        let fd = r.fused_dimension.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "| {} | {} | {} | {fd} | {fused} |", r.method, r.dimension, pct(r.alone.mean));
    }
    if let Some(rep) = report {
        s.push_str("\n## Measure capture\n\n");
        s.push_str("ΔF in points; `C` captured, `P` partial, `N` not captured.\n\n");
        let _ = writeln!(s, "| Method | {} |", rep.features.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(rep.features.len()));
        for m in &rep.methods {
            let cells: Vec<String> = rep
                .features
                .iter()
                .map(|f| {
                    let c = rep.cell(m, f).expect("full grid");
                    let tag = match c.verdict {
                        Verdict::Captured => "C",
                        Verdict::Partial => "P",
                        Verdict::NotCaptured => "N",
                    };
                    format!("{:+.2} {tag}", 100.0 * c.delta_f)
                })
                .collect();
            let _ = writeln!(s, "| {m} | {} |", cells.join(" | "));
        }
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `table3.csv`, `fig4.csv` (when a capture report is given) and
/// `summary.md` into `out_dir`. Output is a pure function of the inputs.
pub fn report(rows: &[TableRow], capture: Option<&CaptureReport>, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join("table3.csv"), &table_csv(rows))?;
    if let Some(rep) = capture {
        let scale_of = |name: &str| {
            crate::features::TopFeature::ALL
                .iter()
                .find(|f| f.feature_name() == name)
                .map(|f| if f.is_graph_level() { "graph" } else { "node" })
                .unwrap_or("other")
        };
        write_file(&out_dir.join("fig4.csv"), &fig_csv(rep, &scale_of))?;
    }
    write_file(&out_dir.join("summary.md"), &summary_md(rows, capture))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::make_splits;
    use crate::embed::Method;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn emb(id: &str, d: usize) -> EmbeddingVector {
        EmbeddingVector {
            graph_id: id.into(),
            method: Method::Sf,
            values: vec![0.5; d],
        }
    }

    fn feats(n: usize) -> FeatureVector {
        FeatureVector {
            names: (0..n).map(|i| format!("f{i}")).collect(),
            values: vec![1.0; n],
            scales: vec![crate::features::Scale::Graph; n],
        }
    }

    #[test]
    fn fused_dimensions_add_up() {
        for (d, f) in [(128, 459), (200, 459), (136, 459), (128, 0)] {
            let r = fuse(&emb("m1", d), "m1", &feats(f)).unwrap();
            assert_eq!(r.values.len(), d + f);
            assert_eq!(r.provenance.len(), d + f);
        }
        assert_eq!(fuse(&emb("m1", 128), "m1", &feats(459)).unwrap().values.len(), 587);
        assert_eq!(fuse(&emb("m1", 200), "m1", &feats(459)).unwrap().values.len(), 659);
        let plain = fuse(&emb("m1", 4), "m1", &feats(0)).unwrap();
        assert_eq!(plain.values, vec![0.5; 4]);
    }

    #[test]
    fn identity_mismatch() {
        assert!(matches!(fuse(&emb("a", 2), "b", &feats(1)), Err(Error::IdentityMismatch { .. })));
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(verdict(0.0049, 0.0), Verdict::Captured);
        assert_eq!(verdict(-0.2, 0.0), Verdict::Captured);
        assert_eq!(verdict(0.005, 0.01), Verdict::NotCaptured);
        assert_eq!(verdict(0.005, 0.05), Verdict::Partial);
        assert_eq!(verdict(0.3, 0.5), Verdict::Partial);
    }

    #[test]
    fn t_test_against_reference_values() {
        // scipy.stats.ttest_rel([1,2,3,4], [1.5,2.1,3.9,4.2]).pvalue
        let p = paired_t_test(&[1.0, 2.0, 3.0, 4.0], &[1.5, 2.1, 3.9, 4.2]).unwrap();
        let d = [0.5f64, 0.1, 0.9, 0.2];
        let m = d.iter().sum::<f64>() / 4.0;
        let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0).sqrt();
        let t = m / (sd / 2.0);
        assert!((t - 2.365068368376859).abs() < 1e-12);
        assert!((p - 0.0989445969540241).abs() < 1e-9, "{p}");
        assert_eq!(paired_t_test(&[0.5; 3], &[0.5; 3]).unwrap(), 1.0);
        assert_eq!(paired_t_test(&[0.5; 3], &[0.6; 3]).unwrap(), 0.0);
    }

    fn noise_and_labels(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<Label> = (0..n).map(|i| if i % 2 == 0 { Label::Abuse } else { Label::NonAbuse }).collect();
        let rows = labels
            .iter()
            .map(|l| {
                let signal = if *l == Label::Abuse { 1.0 } else { -1.0 };
                vec![signal + rng.random_range(-2.0..2.0), rng.random::<f64>(), rng.random::<f64>()]
            })
            .collect();
        (rows, labels)
    }

    #[test]
    fn capture_sanity() {
        let (rows, labels) = noise_and_labels(120, 1);
        let plan = make_splits(&labels, 0).unwrap();
        let dup: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let leak: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let rep = capture_matrix(
            &[("e".into(), rows)],
            &[("dup".into(), dup), ("leak".into(), leak)],
            &labels,
            &plan,
            &SvmParams::default(),
        )
        .unwrap();
        assert_eq!(rep.cells.len(), 2);
        assert_eq!(rep.cell("e", "leak").unwrap().verdict, Verdict::NotCaptured);
        assert!(rep.cell("e", "leak").unwrap().delta_f > 0.2);
    }

    #[test]
    fn report_is_deterministic() {
        let r = EvalResult::from_scores(vec![0.8, 0.9]);
        let rows = vec![
            TableRow {
                method: "Baseline".into(),
                dimension: 27,
                alone: r.clone(),
                fused_dimension: None,
                fused: None,
            },
            TableRow {
                method: "SF".into(),
                dimension: 128,
                alone: r.clone(),
                fused_dimension: Some(155),
                fused: Some(r),
            },
        ];
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        report(&rows, None, a.path()).unwrap();
        report(&rows, None, b.path()).unwrap();
        for f in ["table3.csv", "summary.md"] {
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        }
        let t = std::fs::read_to_string(a.path().join("table3.csv")).unwrap();
        assert_eq!(t.lines().count(), 3);
    }
}
