//! Mini-batch training of the combined objective, and validation-based
//! selection of the regularization weight.

use std::io::Write;

use ndarray::Axis;
use rand::seq::SliceRandom;

use crate::data::{Dataset, Group, Label};
use crate::error::{Error, Result};
use crate::losses::{combined_loss, AlphaMode, FairnessKind, LossBreakdown, Objective};
use crate::metrics;
use crate::nn::{backward_logits, forward, Mode, ModelParams, HIDDEN_UNITS};
use crate::optim::{AdamState, DEFAULT_LR};
use crate::seed::{self, derive_seed};

pub const DEFAULT_EPOCHS: usize = 1000;
pub const DEFAULT_BATCH_SIZE: usize = 512;
pub const DEFAULT_LAMBDA: f64 = 0.99;
/// Candidate regularization weights searched by [`tune_beta`].
pub const BETA_GRID: [f64; 6] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
/// Share of the training data held out for validation.
pub const VALIDATION_FRACTION: f64 = 0.2;
/// Fewest labeled samples [`tune_beta`] accepts.
pub const MIN_LABELED_FOR_TUNING: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub init: u64,
    pub shuffle: u64,
    pub dropout: u64,
}

impl Seeds {
    pub fn from_base(base: u64) -> Self {
        Self {
            init: derive_seed(base, "init", 0),
            shuffle: derive_seed(base, "shuffle", 0),
            dropout: derive_seed(base, "dropout", 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub beta: f64,
    pub lambda: f64,
    pub fairness: FairnessKind,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub seeds: Seeds,
    /// Drop unlabeled samples before training.
    pub supervised_only: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0025,
            alpha_mode: AlphaMode::Convex,
            beta: 1e-3,
            lambda: DEFAULT_LAMBDA,
            fairness: FairnessKind::Dp,
            lr: DEFAULT_LR,
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            hidden: HIDDEN_UNITS,
            seeds: Seeds::from_base(0),
            supervised_only: false,
        }
    }
}

impl TrainConfig {
    pub fn objective(&self) -> Objective {
        Objective {
            alpha: self.alpha,
            alpha_mode: self.alpha_mode,
            beta: self.beta,
            kind: self.fairness,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.objective().validate()?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden layer must have at least one unit".into()));
        }
        Ok(())
    }
}

/// Sums over the mini-batches of one epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub batches: usize,
    pub classification_term: f64,
    pub fairness_term: f64,
    pub regularization_term: f64,
    pub kept_unlabeled: usize,
    pub empty_groups: usize,
}

impl EpochRecord {
    fn accumulate(&mut self, b: &LossBreakdown) {
        self.batches += 1;
        self.classification_term += b.classification_term;
        self.fairness_term += b.fairness_term;
        self.regularization_term += b.regularization_term;
        self.kept_unlabeled += b.gate_counts.confident_unlabeled;
        self.empty_groups += b.empty_groups;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str =
        "epoch,batches,classification_term,fairness_term,regularization_term,kept_unlabeled,empty_groups";

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.epoch,
                r.batches,
                r.classification_term,
                r.fairness_term,
                r.regularization_term,
                r.kept_unlabeled,
                r.empty_groups
            )?;
        }
        Ok(())
    }
}

/// Trains a fresh network on `train_set`.
///
/// Each epoch visits every sample once in an order drawn from the shuffle
/// seed and the epoch index; the final short batch is kept. Every step runs
/// a dropout forward pass, recomputes pseudo-labels and gates from it, and
/// applies one Adam update.
pub fn train(config: &TrainConfig, train_set: &Dataset) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    let dropped;
    let data = if config.supervised_only {
        dropped = train_set.drop_unlabeled();
        if dropped.is_empty() {
            return Err(Error::Data("supervised-only training needs at least one labeled sample".into()));
        }
        &dropped
    } else {
        train_set
    };
    if data.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }

    let objective = config.objective();
    let mut params = ModelParams::init(data.n_features(), config.hidden, config.seeds.init);
    let mut adam = AdamState::new(&params, config.lr)?;
    let mut history = TrainHistory::default();
    let mut step = 0u64;

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut seed::rng(derive_seed(config.seeds.shuffle, "epoch", epoch as u64)));
        let mut record = EpochRecord {
            epoch,
            ..Default::default()
        };
        for batch in order.chunks(config.batch_size) {
            let x = data.features.select(Axis(0), batch);
            let labels: Vec<Label> = batch.iter().map(|&i| data.labels[i]).collect();
            let groups: Vec<Group> = batch.iter().map(|&i| data.protected[i]).collect();
            let mode = Mode::Train {
                dropout_seed: derive_seed(config.seeds.dropout, "step", step),
            };
            let cache = forward(&params, x.view(), mode)?;
            let yhat = cache.yhat.as_slice().expect("contiguous outputs");
            let loss = combined_loss(&objective, &labels, &groups, yhat, &params)?;
            let mut grads = backward_logits(&params, &cache, &loss.d_logit)?;
            grads.add_scaled(1.0, &loss.reg_grads);
            adam.step(&mut params, &grads)?;
            record.accumulate(&loss.breakdown);
            step += 1;
        }
        history.epochs.push(record);
    }
    Ok((params, history))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSelection {
    pub beta: f64,
    /// `(beta, validation accuracy)` for every grid value tried.
    pub scores: Vec<(f64, f64)>,
}

/// Picks the grid value with the best validation accuracy, preferring the
/// larger value on ties.
///
/// Twenty percent of the labeled samples (and, separately, of the unlabeled
/// ones) are held out; each candidate is trained on the rest and scored on
/// the held-out labeled samples. The caller retrains on the full set.
pub fn tune_beta(config: &TrainConfig, train_set: &Dataset, grid: &[f64], seed: u64) -> Result<BetaSelection> {
    if grid.is_empty() {
        return Err(Error::Config("beta grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::Config(format!("beta grid value {bad} is not a finite non-negative number")));
    }
    if grid.len() == 1 {
        return Ok(BetaSelection {
            beta: grid[0],
            scores: Vec::new(),
        });
    }

    let mut labeled: Vec<usize> = (0..train_set.len()).filter(|&i| train_set.labels[i].is_known()).collect();
    let mut unlabeled: Vec<usize> = (0..train_set.len()).filter(|&i| !train_set.labels[i].is_known()).collect();
    if labeled.len() < MIN_LABELED_FOR_TUNING {
        return Err(Error::Config(format!(
            "beta tuning needs at least {MIN_LABELED_FOR_TUNING} labeled samples, found {}",
            labeled.len()
        )));
    }
    let mut rng = seed::rng(seed);
    labeled.shuffle(&mut rng);
    unlabeled.shuffle(&mut rng);
    let n_val = ((labeled.len() as f64 * VALIDATION_FRACTION).round() as usize).max(1);
    let n_val_unlabeled = (unlabeled.len() as f64 * VALIDATION_FRACTION).round() as usize;

    let validation = train_set.select(&labeled[..n_val]);
    let mut fit_idx: Vec<usize> = labeled[n_val..].iter().chain(&unlabeled[n_val_unlabeled..]).copied().collect();
    fit_idx.sort_unstable();
    let fit = train_set.select(&fit_idx);

    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &beta in grid {
        let cfg = TrainConfig { beta, ..*config };
        let (params, _) = train(&cfg, &fit)?;
        let acc = metrics::evaluate(&params, &validation)?.accuracy;
        scores.push((beta, acc));
        best = match best {
            Some((b, a)) if a > acc || (a == acc && b >= beta) => Some((b, a)),
            _ => Some((beta, acc)),
        };
    }
    Ok(BetaSelection {
        beta: best.expect("grid is non-empty").0,
        scores,
    })
}
