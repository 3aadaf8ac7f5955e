//! Objective terms and their gradients with respect to the network outputs.
//!
//! The training objective over a mini-batch is
//!
//! ```text
//! total = w_c * J_C + w_f * J_F + beta * ||theta||^2
//! ```
//!
//! where `J_C` is the summed cross-entropy over kept samples (labeled ones
//! plus confidently pseudo-labeled ones), `J_F` is one of the group-fairness
//! gaps, and `(w_c, w_f)` is `(alpha, 1 - alpha)` in convex mode or
//! `(alpha, 1)` in additive mode.

use std::fmt;
use std::str::FromStr;

use crate::data::{Group, Label};
use crate::error::{Error, Result};
use crate::nn::{ModelParams, ParamGrads};

/// Outputs are clamped to `[CLAMP, 1 - CLAMP]` when evaluating logarithms.
const CLAMP: f64 = 1e-12;

/// Decision threshold used for pseudo-labels and binarized predictions.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessKind {
    /// Demographic parity.
    Dp,
    /// Equalized opportunity (advantaged outcome only).
    Opp,
    /// Equalized odds.
    Odd,
}

impl FairnessKind {
    pub const ALL: [FairnessKind; 3] = [FairnessKind::Dp, FairnessKind::Opp, FairnessKind::Odd];

    pub fn as_str(self) -> &'static str {
        match self {
            FairnessKind::Dp => "dp",
            FairnessKind::Opp => "opp",
            FairnessKind::Odd => "odd",
        }
    }
}

impl fmt::Display for FairnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FairnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(FairnessKind::Dp),
            "opp" => Ok(FairnessKind::Opp),
            "odd" => Ok(FairnessKind::Odd),
            _ => Err(Error::Config(format!("unknown fairness kind {s:?} (dp, opp, odd)"))),
        }
    }
}

/// How `alpha` weights the accuracy and fairness terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlphaMode {
    /// `alpha * J_C + (1 - alpha) * J_F`, alpha in [0, 1].
    Convex,
    /// `alpha * J_C + J_F`, any alpha >= 0.
    Additive,
}

impl AlphaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AlphaMode::Convex => "convex",
            AlphaMode::Additive => "additive",
        }
    }

    /// `(classification weight, fairness weight)` for `alpha`.
    pub fn weights(self, alpha: f64) -> Result<(f64, f64)> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        match self {
            AlphaMode::Convex if alpha > 1.0 => Err(Error::Config(format!(
                "alpha = {alpha} exceeds 1; use the additive alpha mode"
            ))),
            AlphaMode::Convex => Ok((alpha, 1.0 - alpha)),
            AlphaMode::Additive => Ok((alpha, 1.0)),
        }
    }
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "convex" => Ok(AlphaMode::Convex),
            "additive" => Ok(AlphaMode::Additive),
            _ => Err(Error::Config(format!("unknown alpha mode {s:?} (convex, additive)"))),
        }
    }
}

/// Effective targets and keep flags for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    /// Ground truth for labeled samples, `1{yhat >= 0.5}` otherwise.
    pub targets: Vec<f64>,
    pub keep: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub labeled: usize,
    pub confident_unlabeled: usize,
    pub gated_out: usize,
}

impl std::ops::AddAssign for GateCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.labeled += rhs.labeled;
        self.confident_unlabeled += rhs.confident_unlabeled;
        self.gated_out += rhs.gated_out;
    }
}

impl GateResult {
    pub fn counts(&self, labels: &[Label]) -> GateCounts {
        let mut c = GateCounts::default();
        for (l, &k) in labels.iter().zip(&self.keep) {
            match (l.is_known(), k) {
                (true, _) => c.labeled += 1,
                (false, true) => c.confident_unlabeled += 1,
                (false, false) => c.gated_out += 1,
            }
        }
        c
    }

    /// Labels used for conditional fairness: ground truth for labeled
    /// samples, the pseudo-label for kept unlabeled ones, `None` otherwise.
    pub fn effective_labels(&self, labels: &[Label]) -> Vec<Option<u8>> {
        labels
            .iter()
            .zip(self.targets.iter().zip(&self.keep))
            .map(|(l, (&q, &k))| match l.value() {
                Some(y) => Some(y),
                None if k => Some(q as u8),
                None => None,
            })
            .collect()
    }
}

pub fn validate_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")))
    }
}

/// Pseudo-labels unlabeled samples and keeps those whose output lies
/// outside `[1 - lambda, lambda]`. Labeled samples are always kept.
pub fn target_and_gate(labels: &[Label], yhat: &[f64], lambda: f64) -> Result<GateResult> {
    validate_lambda(lambda)?;
    if labels.len() != yhat.len() {
        return Err(Error::Shape(format!(
            "{} labels for {} outputs",
            labels.len(),
            yhat.len()
        )));
    }
    let (targets, keep) = labels
        .iter()
        .zip(yhat)
        .map(|(l, &y)| match l.value() {
            Some(v) => (f64::from(v), true),
            None => {
                let q = if y >= THRESHOLD { 1.0 } else { 0.0 };
                (q, y < 1.0 - lambda || y > lambda)
            }
        })
        .unzip();
    Ok(GateResult { targets, keep })
}

/// A scalar loss and its gradient with respect to each output.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTerm {
    pub value: f64,
    pub d_yhat: Vec<f64>,
    /// Number of empty group cells encountered (fairness terms only).
    pub empty_groups: usize,
}

impl LossTerm {
    fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            d_yhat: vec![0.0; n],
            empty_groups: 0,
        }
    }

    fn add(mut self, other: LossTerm) -> Self {
        self.value += other.value;
        for (a, b) in self.d_yhat.iter_mut().zip(other.d_yhat) {
            *a += b;
        }
        self.empty_groups += other.empty_groups;
        self
    }
}

/// Summed cross-entropy over kept samples. Targets are constants.
pub fn classification_loss(yhat: &[f64], gate: &GateResult) -> LossTerm {
    let mut term = LossTerm::zero(yhat.len());
    for (i, (&y, (&q, &keep))) in yhat.iter().zip(gate.targets.iter().zip(&gate.keep)).enumerate() {
        if !keep {
            continue;
        }
        let y = y.clamp(CLAMP, 1.0 - CLAMP);
        term.value += -q * y.ln() - (1.0 - q) * (1.0 - y).ln();
        term.d_yhat[i] = (y - q) / (y * (1.0 - y));
    }
    term
}

/// Gradient of [`classification_loss`] at the output logits: `yhat - q` for
/// kept samples.
pub fn classification_logit_grad(yhat: &[f64], gate: &GateResult) -> Vec<f64> {
    yhat.iter()
        .zip(gate.targets.iter().zip(&gate.keep))
        .map(|(&y, (&q, &keep))| if keep { y - q } else { 0.0 })
        .collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|mean(yhat | p) - mean(yhat | n)|` over the samples accepted by
/// `member`. An empty group yields zero loss and gradient.
fn group_gap(yhat: &[f64], groups: &[Group], member: impl Fn(usize) -> bool) -> LossTerm {
    let (mut sum_p, mut sum_n, mut cnt_p, mut cnt_n) = (0.0, 0.0, 0usize, 0usize);
    for (i, (&y, g)) in yhat.iter().zip(groups).enumerate() {
        if !member(i) {
            continue;
        }
        match g {
            Group::Protected => {
                sum_p += y;
                cnt_p += 1;
            }
            Group::Unprotected => {
                sum_n += y;
                cnt_n += 1;
            }
        }
    }
    let mut term = LossTerm::zero(yhat.len());
    if cnt_p == 0 || cnt_n == 0 {
        term.empty_groups = 1;
        return term;
    }
    let diff = sum_p / cnt_p as f64 - sum_n / cnt_n as f64;
    let s = sign(diff);
    term.value = diff.abs();
    let (gp, gn) = (s / cnt_p as f64, -s / cnt_n as f64);
    for (i, g) in groups.iter().enumerate() {
        if member(i) {
            term.d_yhat[i] = match g {
                Group::Protected => gp,
                Group::Unprotected => gn,
            };
        }
    }
    term
}

/// Demographic parity gap over every sample.
pub fn dp_loss(yhat: &[f64], groups: &[Group]) -> LossTerm {
    group_gap(yhat, groups, |_| true)
}

/// Equalized-opportunity gap among samples whose effective label is `k`.
pub fn opp_loss(yhat: &[f64], groups: &[Group], y_eff: &[Option<u8>], k: u8) -> LossTerm {
    group_gap(yhat, groups, |i| y_eff[i] == Some(k))
}

/// Equalized-odds gap: the opportunity gaps at both label values, summed.
pub fn odd_loss(yhat: &[f64], groups: &[Group], y_eff: &[Option<u8>]) -> LossTerm {
    opp_loss(yhat, groups, y_eff, 0).add(opp_loss(yhat, groups, y_eff, 1))
}

pub fn fairness_loss(kind: FairnessKind, yhat: &[f64], groups: &[Group], y_eff: &[Option<u8>]) -> LossTerm {
    match kind {
        FairnessKind::Dp => dp_loss(yhat, groups),
        FairnessKind::Opp => opp_loss(yhat, groups, y_eff, 1),
        FairnessKind::Odd => odd_loss(yhat, groups, y_eff),
    }
}

/// Squared L2 norm of every weight and bias, with gradient `2 * theta`.
pub fn regularization(params: &ModelParams) -> (f64, ParamGrads) {
    let value = params
        .blocks()
        .iter()
        .flat_map(|(_, b)| b.iter())
        .map(|v| v * v)
        .sum();
    let mut grads = params.clone();
    for (_, block) in grads.blocks_mut() {
        block.iter_mut().for_each(|v| *v *= 2.0);
    }
    (value, grads)
}

/// Hyperparameters of the batch objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub beta: f64,
    pub kind: FairnessKind,
    pub lambda: f64,
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        self.alpha_mode.weights(self.alpha)?;
        validate_lambda(self.lambda)?;
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Config(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub classification_term: f64,
    pub fairness_term: f64,
    pub regularization_term: f64,
    pub gate_counts: GateCounts,
    pub empty_groups: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedLoss {
    pub breakdown: LossBreakdown,
    pub gate: GateResult,
    /// d(total)/d(yhat) for each sample.
    pub d_yhat: Vec<f64>,
    /// d(total)/d(logit) for each sample, computed without dividing by
    /// `yhat * (1 - yhat)` on the cross-entropy path.
    pub d_logit: Vec<f64>,
    /// `beta * d||theta||^2 / d theta`
    pub reg_grads: ParamGrads,
}

/// Evaluates the full objective on one batch.
///
/// Demographic parity uses every sample. Opportunity and odds use labeled
/// samples plus confidently pseudo-labeled ones.
pub fn combined_loss(
    objective: &Objective,
    labels: &[Label],
    groups: &[Group],
    yhat: &[f64],
    params: &ModelParams,
) -> Result<CombinedLoss> {
    objective.validate()?;
    if groups.len() != yhat.len() {
        return Err(Error::Shape(format!(
            "{} group tags for {} outputs",
            groups.len(),
            yhat.len()
        )));
    }
    let (wc, wf) = objective.alpha_mode.weights(objective.alpha)?;
    let gate = target_and_gate(labels, yhat, objective.lambda)?;
    let class = classification_loss(yhat, &gate);
    let class_logit = classification_logit_grad(yhat, &gate);
    let y_eff = gate.effective_labels(labels);
    let fair = fairness_loss(objective.kind, yhat, groups, &y_eff);
    let (reg, mut reg_grads) = regularization(params);
    for (_, block) in reg_grads.blocks_mut() {
        block.iter_mut().for_each(|v| *v *= objective.beta);
    }

    let d_yhat = class
        .d_yhat
        .iter()
        .zip(&fair.d_yhat)
        .map(|(c, f)| wc * c + wf * f)
        .collect();
    let d_logit = class_logit
        .iter()
        .zip(&fair.d_yhat)
        .zip(yhat)
        .map(|((c, f), y)| wc * c + wf * f * y * (1.0 - y))
        .collect();

    let breakdown = LossBreakdown {
        total: wc * class.value + wf * fair.value + objective.beta * reg,
        classification_term: class.value,
        fairness_term: fair.value,
        regularization_term: reg,
        gate_counts: gate.counts(labels),
        empty_groups: fair.empty_groups,
    };
    Ok(CombinedLoss {
        breakdown,
        gate,
        d_yhat,
        d_logit,
        reg_grads,
    })
}
