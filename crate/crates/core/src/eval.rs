// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change point and labelling quality metrics.

use std::collections::BTreeMap;
use std::fmt;

use crate::cpd::StatTrace;
use crate::error::{Error, Result};
use crate::numeric::hungarian;
use crate::tssc::SegmentLabeling;

/// Margin-based change point precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Matches detections to true change points one-to-one within `±delta`.
///
/// True change points are visited in increasing order; each takes the
/// nearest still-unmatched prediction within the margin, preferring the
/// earlier prediction on equal distance. An empty prediction set has
/// precision 1 and an empty truth set has recall 1; F1 is 1 only when both
/// are empty.
pub fn cp_f1(predicted: &[usize], truth: &[usize], delta: usize) -> F1Score {
    let mut used = vec![false; predicted.len()];
    let mut matches = 0usize;
    for &tau in truth {
        let mut best: Option<(usize, usize)> = None;
        for (i, &p) in predicted.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gap = p.abs_diff(tau);
            if gap <= delta && best.is_none_or(|(_, g)| gap < g) {
                best = Some((i, gap));
            }
        }
        if let Some((i, _)) = best {
            used[i] = true;
            matches += 1;
        }
    }
    let precision = if predicted.is_empty() {
        1.0
    } else {
        matches as f64 / predicted.len() as f64
    };
    let recall = if truth.is_empty() {
        1.0
    } else {
        matches as f64 / truth.len() as f64
    };
    // harmonic mean of precision and recall, taken from the counts
    let f1 = if predicted.is_empty() && truth.is_empty() {
        1.0
    } else {
        2.0 * matches as f64 / (predicted.len() + truth.len()) as f64
    };
    F1Score {
        precision,
        recall,
        f1,
    }
}

/// Index-level ROC AUC of a trace against true change points.
///
/// Valid indices within `delta` of a true change point are positives, all
/// other valid indices negatives. Returns the probability that a random
/// positive scores strictly above a random negative, counting ties as one
/// half, via the Mann–Whitney rank sum.
pub fn cp_auc(trace: &StatTrace, truth: &[usize], delta: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::DegenerateAuc("no true change points"));
    }
    let mut scored: Vec<(f64, bool)> = trace
        .iter_valid()
        .map(|(t, v)| (v, truth.iter().any(|&c| c.abs_diff(t) <= delta)))
        .collect();
    let positives = scored.iter().filter(|(_, p)| *p).count();
    let negatives = scored.len() - positives;
    if positives == 0 {
        return Err(Error::DegenerateAuc("no positive indices"));
    }
    if negatives == 0 {
        return Err(Error::DegenerateAuc("no negative indices"));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        let tied_positives = scored[i..j].iter().filter(|(_, p)| *p).count();
        rank_sum += mean_rank * tied_positives as f64;
        i = j;
    }
    let np = positives as f64;
    let nn = negatives as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Fraction of samples labelled correctly after the best one-to-one mapping
/// of predicted cluster ids onto truth labels.
pub fn label_accuracy(predicted: &SegmentLabeling, truth: &[i64], k: usize) -> Result<f64> {
    let per_sample = predicted.per_sample();
    if per_sample.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "truth labels",
            got: truth.len(),
            expected: per_sample.len(),
        });
    }
    mapped_accuracy(&per_sample, truth, k)
}

/// [`label_accuracy`] on per-sample predicted ids.
pub fn mapped_accuracy(predicted: &[usize], truth: &[i64], k: usize) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "truth labels",
            got: truth.len(),
            expected: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptySeries);
    }
    let truth_ids = dense_ids(truth.iter().copied());
    let pred_ids = dense_ids(predicted.iter().copied());
    let size = k.max(truth_ids.len()).max(pred_ids.len());
    let mut counts = vec![vec![0.0; size]; size];
    for (p, t) in predicted.iter().zip(truth) {
        counts[pred_ids[p]][truth_ids[t]] += 1.0;
    }
    let max = counts.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let cost: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|c| max - c).collect())
        .collect();
    let perm = hungarian(&cost)?;
    let correct: f64 = perm.iter().enumerate().map(|(i, &j)| counts[i][j]).sum();
    Ok(correct / truth.len() as f64)
}

fn dense_ids<T: Ord + Copy>(values: impl Iterator<Item = T>) -> BTreeMap<T, usize> {
    let mut ids = BTreeMap::new();
    for v in values {
        let next = ids.len();
        ids.entry(v).or_insert(next);
    }
    ids
}

/// Adjusted Rand index between two partitions of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "partition",
            got: b.len(),
            expected: a.len(),
        });
    }
    let n = a.len() as f64;
    let pairs = |c: f64| c * (c - 1.0) / 2.0;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let row_sum: f64 = rows.values().map(|&c| pairs(c)).sum();
    let col_sum: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = row_sum * col_sum / pairs(n);
    let max = (row_sum + col_sum) / 2.0;
    if max == expected {
        // both partitions trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Evaluation summary with the run parameters echoed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub cp_auc: Option<f64>,
    pub cp_precision: f64,
    pub cp_recall: f64,
    pub cp_f1: f64,
    pub label_accuracy: Option<f64>,
    pub delta: usize,
    pub k: Option<usize>,
    pub beta: Option<usize>,
    pub lambda: Option<f64>,
}

impl EvalReport {
    pub fn new(f1: F1Score, delta: usize) -> Self {
        Self {
            cp_auc: None,
            cp_precision: f1.precision,
            cp_recall: f1.recall,
            cp_f1: f1.f1,
            label_accuracy: None,
            delta,
            k: None,
            beta: None,
            lambda: None,
        }
    }
}

/// `key=value` lines; absent values are written as `na`.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "na".to_string(), T::to_string)
        }
        writeln!(f, "cp_auc={}", opt(&self.cp_auc))?;
        writeln!(f, "cp_precision={}", self.cp_precision)?;
        writeln!(f, "cp_recall={}", self.cp_recall)?;
        writeln!(f, "cp_f1={}", self.cp_f1)?;
        writeln!(f, "label_accuracy={}", opt(&self.label_accuracy))?;
        writeln!(f, "K={}", opt(&self.k))?;
        writeln!(f, "beta={}", opt(&self.beta))?;
        writeln!(f, "delta={}", self.delta)?;
        writeln!(f, "lambda={}", opt(&self.lambda))
    }
}
