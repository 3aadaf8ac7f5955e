#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ssfair::data::{Dataset, Group, Label};
use ssfair::losses::{combined_loss, target_and_gate, AlphaMode, FairnessKind, Objective};
use ssfair::nn::{backward, backward_logits, forward, Mode, ModelParams};
use ssfair::seed::rng;

/// Directory holding `adult.data` and `adult.test`; `SSFAIR_ADULT_DIR`
/// overrides the in-repo copy.
pub fn adult_dir() -> PathBuf {
    std::env::var_os("SSFAIR_ADULT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adult"))
}

pub fn adult_files() -> [PathBuf; 2] {
    let dir = adult_dir();
    [dir.join("adult.data"), dir.join("adult.test")]
}

/// Fully labeled synthetic set with a linear signal in the first feature and
/// a group-correlated second feature.
pub fn synthetic(n: usize, d: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut x = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let g = r.gen_bool(0.4);
        for j in 0..d {
            x[[i, j]] = r.gen_range(-1.0..1.0);
        }
        if g {
            x[[i, 1]] += 0.5;
        }
        let score = 2.0 * x[[i, 0]] + x[[i, 1]] + r.gen_range(-0.5..0.5);
        labels.push(Label::from_bit(u8::from(score > 0.3)));
        groups.push(if g { Group::Protected } else { Group::Unprotected });
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new(x, labels, groups, names).unwrap()
}

/// Straightforward per-group loop for `|mean_p - mean_n|` over the samples
/// selected by `member`, with its gradient. Either side empty gives zero.
pub fn naive_gap(yhat: &[f64], groups: &[Group], member: impl Fn(usize) -> bool) -> (f64, Vec<f64>) {
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (k, g) in [Group::Protected, Group::Unprotected].into_iter().enumerate() {
        for i in 0..yhat.len() {
            if groups[i] == g && member(i) {
                sums[k] += yhat[i];
                counts[k] += 1;
            }
        }
    }
    let mut grad = vec![0.0; yhat.len()];
    if counts[0] == 0 || counts[1] == 0 {
        return (0.0, grad);
    }
    let diff = sums[0] / counts[0] as f64 - sums[1] / counts[1] as f64;
    let sign = if diff > 0.0 {
        1.0
    } else if diff < 0.0 {
        -1.0
    } else {
        0.0
    };
    for i in 0..yhat.len() {
        if member(i) {
            grad[i] = match groups[i] {
                Group::Protected => sign / counts[0] as f64,
                Group::Unprotected => -sign / counts[1] as f64,
            };
        }
    }
    (diff.abs(), grad)
}

pub fn naive_fairness(
    kind: FairnessKind,
    yhat: &[f64],
    groups: &[Group],
    y_eff: &[Option<u8>],
) -> (f64, Vec<f64>) {
    match kind {
        FairnessKind::Dp => naive_gap(yhat, groups, |_| true),
        FairnessKind::Opp => naive_gap(yhat, groups, |i| y_eff[i] == Some(1)),
        FairnessKind::Odd => {
            let (v0, g0) = naive_gap(yhat, groups, |i| y_eff[i] == Some(0));
            let (v1, g1) = naive_gap(yhat, groups, |i| y_eff[i] == Some(1));
            (v0 + v1, g0.iter().zip(&g1).map(|(a, b)| a + b).collect())
        }
    }
}

/// Random batch of outputs, groups and effective labels. Outputs are drawn
/// from a small set of levels so exact ties and empty cells both occur.
pub fn random_fairness_batch(
    r: &mut ChaCha8Rng,
    max_len: usize,
) -> (Vec<f64>, Vec<Group>, Vec<Option<u8>>) {
    let n = r.gen_range(1..=max_len);
    let coarse = r.gen_bool(0.2);
    let yhat = (0..n)
        .map(|_| {
            if coarse {
                [0.25, 0.5, 0.75][r.gen_range(0..3)]
            } else {
                r.gen_range(1e-6..1.0 - 1e-6)
            }
        })
        .collect();
    let p_protected = r.gen_range(0.0..=1.0);
    let groups = (0..n)
        .map(|_| if r.gen_bool(p_protected) { Group::Protected } else { Group::Unprotected })
        .collect();
    let y_eff = (0..n).map(|_| [None, Some(0), Some(1)][r.gen_range(0..3)]).collect();
    (yhat, groups, y_eff)
}


pub const H: f64 = 1e-6;

pub fn flatten(p: &ModelParams) -> Vec<f64> {
    p.blocks().iter().flat_map(|(_, b)| b.iter().copied()).collect()
}

/// Central differences of `f` over every parameter entry.
pub fn numeric_grad(p: &ModelParams, f: impl Fn(&ModelParams) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.n_params());
    for block in 0..4 {
        let len = p.blocks()[block].1.len();
        for j in 0..len {
            let mut plus = p.clone();
            plus.blocks_mut()[block].1[j] += H;
            let mut minus = p.clone();
            minus.blocks_mut()[block].1[j] -= H;
            out.push((f(&plus) - f(&minus)) / (2.0 * H));
        }
    }
    out
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

/// Random parameters with nonzero biases so both ReLU regimes occur.
pub fn random_params(r: &mut ChaCha8Rng, d: usize, hidden: usize, scale: f64) -> ModelParams {
    let mut p = ModelParams::init(d, hidden, r.gen());
    for (_, block) in p.blocks_mut() {
        for v in block.iter_mut() {
            *v = *v * scale + r.gen_range(-0.3..0.3);
        }
    }
    p
}

/// Inputs with a mix of exact zeros (as in one-hot rows) and dense values.
pub fn random_inputs(r: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| if r.gen_bool(0.3) { 0.0 } else { r.gen_range(-2.0..2.0) })
}

pub fn near_relu_kink(p: &ModelParams, x: &Array2<f64>) -> bool {
    let cache = forward(p, x.view(), Mode::Eval).unwrap();
    cache.pre.iter().any(|v| v.abs() < 1e-4)
}


pub fn numeric_yhat_grad(yhat: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..yhat.len())
        .map(|i| {
            let mut plus = yhat.to_vec();
            plus[i] += H;
            let mut minus = yhat.to_vec();
            minus[i] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

pub fn random_groups(r: &mut ChaCha8Rng, n: usize) -> Vec<Group> {
    (0..n)
        .map(|_| if r.gen_bool(0.5) { Group::Protected } else { Group::Unprotected })
        .collect()
}


/// Smallest |mean_p - mean_n| over every gap the fairness kind uses; gaps
/// with an empty cell count as infinitely far from a tie.
pub fn smallest_gap(kind: FairnessKind, yhat: &[f64], groups: &[Group], y_eff: &[Option<u8>]) -> f64 {
    let gap = |filter: &dyn Fn(usize) -> bool| {
        let mean = |g: Group| {
            let v: Vec<f64> = (0..yhat.len()).filter(|&i| groups[i] == g && filter(i)).map(|i| yhat[i]).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        match (mean(Group::Protected), mean(Group::Unprotected)) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        }
    };
    match kind {
        FairnessKind::Dp => gap(&|_| true),
        FairnessKind::Opp => gap(&|i| y_eff[i] == Some(1)),
        FairnessKind::Odd => gap(&|i| y_eff[i] == Some(1)).min(gap(&|i| y_eff[i] == Some(0))),
    }
}


/// Every point where the objective is not smooth in the parameters (gate
/// edges for unlabeled samples, fairness gaps at zero), plus saturated
/// outputs, where `ln(1 - yhat)` loses too many digits for a 1e-6 step.
pub fn near_nonsmooth(kind: FairnessKind, lambda: f64, labels: &[Label], groups: &[Group], yhat: &[f64]) -> bool {
    let margin = 1e-4;
    if yhat.iter().any(|&y| y.min(1.0 - y) < 1e-3) {
        return true;
    }
    let at_gate = labels.iter().zip(yhat).any(|(l, &y)| {
        !l.is_known() && ((y - lambda).abs() < margin || (y - (1.0 - lambda)).abs() < margin || (y - 0.5).abs() < margin)
    });
    let gate = target_and_gate(labels, yhat, lambda).unwrap();
    at_gate || smallest_gap(kind, yhat, groups, &gate.effective_labels(labels)) < margin
}


/// Worst relative error and number of confidently pseudo-labeled samples
/// seen over `trials` smooth random instances of the full objective.
pub fn combined_gradient_trials(
    kind: FairnessKind,
    mode: AlphaMode,
    trials: usize,
    seed: u64,
) -> (f64, usize) {
    let (d, hidden, batch) = (6, 4, 12);
    let mut r = rng(seed);
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut kept_unlabeled = 0;
    while checked < trials {
        let p = random_params(&mut r, d, hidden, 2.0);
        let x = random_inputs(&mut r, batch, d);
        let labels: Vec<Label> = (0..batch)
            .map(|_| [Label::Zero, Label::One, Label::Unknown][r.gen_range(0..3)])
            .collect();
        let groups = random_groups(&mut r, batch);
        let objective = Objective {
            alpha: match mode {
                AlphaMode::Convex => r.gen_range(0.0..=1.0),
                AlphaMode::Additive => r.gen_range(0.0..5.0),
            },
            alpha_mode: mode,
            beta: r.gen_range(0.0..0.1),
            kind,
            lambda: r.gen_range(0.6..0.9),
        };
        let cache = forward(&p, x.view(), Mode::Eval).unwrap();
        let yhat = cache.yhat.to_vec();
        if near_relu_kink(&p, &x) || near_nonsmooth(kind, objective.lambda, &labels, &groups, &yhat) {
            continue;
        }
        let total = |q: &ModelParams| {
            let c = forward(q, x.view(), Mode::Eval).unwrap();
            combined_loss(&objective, &labels, &groups, c.yhat.as_slice().unwrap(), q)
                .unwrap()
                .breakdown
                .total
        };
        let loss = combined_loss(&objective, &labels, &groups, &yhat, &p).unwrap();
        kept_unlabeled += loss.breakdown.gate_counts.confident_unlabeled;

        let mut via_logits = backward_logits(&p, &cache, &loss.d_logit).unwrap();
        via_logits.add_scaled(1.0, &loss.reg_grads);
        let mut via_outputs = backward(&p, &cache, &loss.d_yhat).unwrap();
        via_outputs.add_scaled(1.0, &loss.reg_grads);

        let numeric = numeric_grad(&p, total);
        worst = worst
            .max(rel_err(&flatten(&via_logits), &numeric))
            .max(rel_err(&flatten(&via_outputs), &numeric));
        checked += 1;
    }
    (worst, kept_unlabeled)
}
