//! Split plans, micro-F and the repeated-split evaluation loop.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{check_finite, train_svm, SvmParams};
use crate::corpus::Label;
use crate::util::{derived_rng, mean, std_dev};
use crate::{Error, Result};

pub const REPETITIONS: usize = 10;
pub const TEST_FRACTION: f64 = 0.3;
/// Smallest class size accepted by [`make_splits`].
pub const MIN_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// Ascending row indices.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub splits: Vec<Split>,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }
}

/// Ten stratified random splits; each class contributes ⌊0.3·n_c⌋ test rows.
pub fn make_splits(labels: &[Label], seed: u64) -> Result<SplitPlan> {
    let mut by_class: Vec<(Label, Vec<usize>)> = vec![(Label::Abuse, Vec::new()), (Label::NonAbuse, Vec::new())];
    for (i, l) in labels.iter().enumerate() {
        by_class.iter_mut().find(|(c, _)| c == l).expect("two classes").1.push(i);
    }
    for (class, idx) in &by_class {
        if idx.len() < MIN_PER_CLASS {
            return Err(Error::DatasetTooSmall {
                class: *class,
                count: idx.len(),
                min: MIN_PER_CLASS,
            });
        }
    }
    let splits = (0..REPETITIONS)
        .map(|rep| {
            let mut rng = derived_rng(seed, &[b"split", &(rep as u64).to_le_bytes()]);
            let (mut train, mut test) = (Vec::new(), Vec::new());
            for (_, idx) in &by_class {
                let mut shuffled = idx.clone();
                shuffled.shuffle(&mut rng);
                let n_test = (TEST_FRACTION * idx.len() as f64).floor() as usize;
                test.extend_from_slice(&shuffled[..n_test]);
                train.extend_from_slice(&shuffled[n_test..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Split { train, test }
        })
        .collect();
    Ok(SplitPlan { seed, splits })
}

pub fn accuracy(predictions: &[Label], labels: &[Label]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("empty evaluation set".into()));
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// F-measure from true/false positives and false negatives summed over both
/// classes.
pub fn micro_f(predictions: &[Label], labels: &[Label]) -> Result<f64> {
    accuracy(predictions, labels)?;
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for class in [Label::Abuse, Label::NonAbuse] {
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p == class, l == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                _ => {}
            }
        }
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fnn) as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub f_measures: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl EvalResult {
    pub fn from_scores(f_measures: Vec<f64>) -> Self {
        EvalResult {
            mean: mean(&f_measures),
            std: std_dev(&f_measures),
            f_measures,
        }
    }
}

/// Trains and tests one SVM per split; standardization is refit on each
/// training split. Repetitions run in parallel.
pub fn evaluate(matrix: &[Vec<f64>], labels: &[Label], plan: &SplitPlan, params: &SvmParams) -> Result<EvalResult> {
    if matrix.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: matrix.len(),
        });
    }
    let d = matrix.first().map_or(0, Vec::len);
    if let Some(r) = matrix.iter().find(|r| r.len() != d) {
        return Err(Error::LengthMismatch { expected: d, got: r.len() });
    }
    let rows: Vec<&[f64]> = matrix.iter().map(Vec::as_slice).collect();
    check_finite(&rows)?;
    for s in &plan.splits {
        if let Some(&bad) = s.train.iter().chain(&s.test).find(|&&i| i >= labels.len()) {
            return Err(Error::Protocol(format!("split index {bad} out of range")));
        }
    }
    let scores = plan
        .splits
        .par_iter()
        .map(|s| {
            let train_x: Vec<&[f64]> = s.train.iter().map(|&i| rows[i]).collect();
            let train_y: Vec<Label> = s.train.iter().map(|&i| labels[i]).collect();
            let model = train_svm(&train_x, &train_y, params)?;
            let pred: Vec<Label> = s.test.iter().map(|&i| model.predict(rows[i])).collect();
            let truth: Vec<Label> = s.test.iter().map(|&i| labels[i]).collect();
            let f = micro_f(&pred, &truth)?;
            let acc = accuracy(&pred, &truth)?;
            if (f - acc).abs() > 1e-12 {
                return Err(Error::Protocol(format!("micro-F {f} differs from accuracy {acc}")));
            }
            Ok(f)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EvalResult::from_scores(scores))
}
