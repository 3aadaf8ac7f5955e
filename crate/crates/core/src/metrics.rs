//! Test-time accuracy and binarized fairness gaps.
//!
//! Predictions are `1{yhat >= 0.5}`. Fairness gaps are computed by counting
//! positive predictions per (group, label) cell, against ground-truth labels.

use crate::data::{Dataset, Group};
use crate::error::{Error, Result};
use crate::losses::{FairnessKind, THRESHOLD};
use crate::nn::{forward, Mode, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub fairness_dp: f64,
    pub fairness_opp: f64,
    pub fairness_odd: f64,
    pub n_evaluated: usize,
    /// Sample counts indexed `[group][label]`, protected group first.
    pub group_counts: [[usize; 2]; 2],
}

impl MetricsRecord {
    pub const CSV_HEADER: &'static str =
        "accuracy,fairness_dp,fairness_opp,fairness_odd,n_evaluated,n_p0,n_p1,n_n0,n_n1";

    pub fn fairness(&self, kind: FairnessKind) -> f64 {
        match kind {
            FairnessKind::Dp => self.fairness_dp,
            FairnessKind::Opp => self.fairness_opp,
            FairnessKind::Odd => self.fairness_odd,
        }
    }

    pub fn to_csv_row(&self) -> String {
        let c = &self.group_counts;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.accuracy,
            self.fairness_dp,
            self.fairness_opp,
            self.fairness_odd,
            self.n_evaluated,
            c[0][0],
            c[0][1],
            c[1][0],
            c[1][1]
        )
    }
}

fn group_index(g: Group) -> usize {
    match g {
        Group::Protected => 0,
        Group::Unprotected => 1,
    }
}

fn rate(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn gap(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => 0.0,
    }
}

/// Metrics from binary predictions and ground-truth labels.
pub fn from_predictions(predictions: &[u8], labels: &[u8], groups: &[Group]) -> Result<MetricsRecord> {
    let n = predictions.len();
    if n == 0 {
        return Err(Error::Data("cannot evaluate an empty set".into()));
    }
    if labels.len() != n || groups.len() != n {
        return Err(Error::Shape("predictions, labels and groups differ in length".into()));
    }
    let mut counts = [[0usize; 2]; 2];
    let mut positives = [[0usize; 2]; 2];
    let mut correct = 0;
    for ((&b, &y), &g) in predictions.iter().zip(labels).zip(groups) {
        let (gi, yi) = (group_index(g), usize::from(y));
        counts[gi][yi] += 1;
        positives[gi][yi] += usize::from(b);
        correct += usize::from(b == y);
    }
    let group_rate = |gi: usize| rate(positives[gi][0] + positives[gi][1], counts[gi][0] + counts[gi][1]);
    let cell_rate = |gi: usize, y: usize| rate(positives[gi][y], counts[gi][y]);

    let opp0 = gap(cell_rate(0, 0), cell_rate(1, 0));
    let opp1 = gap(cell_rate(0, 1), cell_rate(1, 1));
    Ok(MetricsRecord {
        accuracy: correct as f64 / n as f64,
        fairness_dp: gap(group_rate(0), group_rate(1)),
        fairness_opp: opp1,
        fairness_odd: opp0 + opp1,
        n_evaluated: n,
        group_counts: counts,
    })
}

/// Eval-mode outputs for every sample.
pub fn predict_proba(params: &ModelParams, ds: &Dataset) -> Result<Vec<f64>> {
    Ok(forward(params, ds.features.view(), Mode::Eval)?.yhat.to_vec())
}

pub fn binarize(yhat: &[f64]) -> Vec<u8> {
    yhat.iter().map(|&y| u8::from(y >= THRESHOLD)).collect()
}

/// Evaluates `params` on a fully labeled set.
pub fn evaluate(params: &ModelParams, test_set: &Dataset) -> Result<MetricsRecord> {
    let labels = test_set
        .labels
        .iter()
        .map(|l| l.value())
        .collect::<Option<Vec<u8>>>()
        .ok_or_else(|| Error::Data("evaluation set contains unlabeled samples".into()))?;
    let predictions = binarize(&predict_proba(params, test_set)?);
    from_predictions(&predictions, &labels, &test_set.protected)
}
