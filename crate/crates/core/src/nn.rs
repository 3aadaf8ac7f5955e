//! One-hidden-layer perceptron: ReLU hidden layer, inverted dropout, sigmoid
//! output.
//!
//! The first layer skips zero inputs. One-hot rows are mostly zeros, so this
//! cuts the dominant cost by roughly the sparsity ratio without changing the
//! result.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub const HIDDEN_UNITS: usize = 32;
pub const DROPOUT_RATE: f64 = 0.2;

const CHECKPOINT_MAGIC: &str = "ssfair-mlp v1";

/// Weights and biases of the network. Also used as the gradient carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// hidden × input
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// hidden
    pub w2: Array1<f64>,
    pub b2: f64,
}

/// Gradients share the parameter layout.
pub type ParamGrads = ModelParams;

impl ModelParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w1: Array2::zeros((hidden, input)),
            b1: Array1::zeros(hidden),
            w2: Array1::zeros(hidden),
            b2: 0.0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(input: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut p = Self::zeros(input, hidden);
        let bound1 = (6.0 / (input + hidden) as f64).sqrt();
        p.w1.mapv_inplace(|_| rng.gen_range(-bound1..=bound1));
        let bound2 = (6.0 / (hidden + 1) as f64).sqrt();
        p.w2.mapv_inplace(|_| rng.gen_range(-bound2..=bound2));
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim())
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Named flat views of each parameter block.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("w1", self.w1.as_slice().expect("standard layout")),
            ("b1", self.b1.as_slice().expect("standard layout")),
            ("w2", self.w2.as_slice().expect("standard layout")),
            ("b2", std::slice::from_ref(&self.b2)),
        ]
    }

    pub fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 4] {
        [
            ("w1", self.w1.as_slice_mut().expect("standard layout")),
            ("b1", self.b1.as_slice_mut().expect("standard layout")),
            ("w2", self.w2.as_slice_mut().expect("standard layout")),
            ("b2", std::slice::from_mut(&mut self.b2)),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|(_, b)| b.iter().all(|v| v.is_finite()))
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, scale: f64, other: &ModelParams) {
        self.w1.scaled_add(scale, &other.w1);
        self.b1.scaled_add(scale, &other.b1);
        self.w2.scaled_add(scale, &other.w2);
        self.b2 += scale * other.b2;
    }

    /// Text checkpoint: a magic line, `hidden input`, then `w1` row by row,
    /// `b1`, `w2` and `b2`, one line each, space separated. Values use the
    /// shortest round-trip decimal form.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CHECKPOINT_MAGIC}").unwrap();
        writeln!(s, "{} {}", self.hidden_dim(), self.input_dim()).unwrap();
        let line = |s: &mut String, vals: &mut dyn Iterator<Item = &f64>| {
            let parts: Vec<String> = vals.map(|v| v.to_string()).collect();
            writeln!(s, "{}", parts.join(" ")).unwrap();
        };
        for row in self.w1.rows() {
            line(&mut s, &mut row.iter());
        }
        line(&mut s, &mut self.b1.iter());
        line(&mut s, &mut self.w2.iter());
        line(&mut s, &mut std::iter::once(&self.b2));
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Data(format!("malformed checkpoint: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some(CHECKPOINT_MAGIC) {
            return Err(bad("missing header"));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing shape"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("shape")))
            .collect::<Result<_>>()?;
        let [hidden, input] = dims[..] else {
            return Err(bad("shape must have two entries"));
        };
        let mut row = |len: usize| -> Result<Vec<f64>> {
            let vals: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("truncated"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("value")))
                .collect::<Result<_>>()?;
            if vals.len() != len {
                return Err(bad("row length"));
            }
            Ok(vals)
        };
        let mut w1 = Vec::with_capacity(hidden * input);
        for _ in 0..hidden {
            w1.extend(row(input)?);
        }
        let b1 = row(hidden)?;
        let w2 = row(hidden)?;
        let b2 = row(1)?[0];
        Ok(Self {
            w1: Array2::from_shape_vec((hidden, input), w1).map_err(|e| Error::Shape(e.to_string()))?,
            b1: Array1::from(b1),
            w2: Array1::from(w2),
            b2,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_checkpoint()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eval,
    /// Dropout active; the mask is drawn from `dropout_seed`.
    Train { dropout_seed: u64 },
}

/// Everything backward needs from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub input: Array2<f64>,
    /// batch × hidden, before ReLU
    pub pre: Array2<f64>,
    /// batch × hidden, after ReLU and dropout
    pub hidden: Array2<f64>,
    /// batch × hidden; 0 for dropped units, 1/(1-rate) for kept ones
    pub mask: Option<Array2<f64>>,
    pub logits: Array1<f64>,
    pub yhat: Array1<f64>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.yhat.len()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn forward(params: &ModelParams, x: ArrayView2<'_, f64>, mode: Mode) -> Result<ForwardCache> {
    let (batch, input) = x.dim();
    if input != params.input_dim() {
        return Err(Error::Shape(format!(
            "batch has {input} columns, model expects {}",
            params.input_dim()
        )));
    }
    let hidden = params.hidden_dim();
    let w1t = params.w1.t().as_standard_layout().into_owned();
    let w1t = w1t.as_slice().expect("standard layout");
    let b1 = params.b1.as_slice().expect("standard layout");

    let mut pre = Array2::<f64>::zeros((batch, hidden));
    for (xrow, mut prow) in x.rows().into_iter().zip(pre.rows_mut()) {
        let prow = prow.as_slice_mut().expect("standard layout");
        prow.copy_from_slice(b1);
        for (j, &xj) in xrow.iter().enumerate() {
            if xj != 0.0 {
                let wrow = &w1t[j * hidden..(j + 1) * hidden];
                for (p, w) in prow.iter_mut().zip(wrow) {
                    *p += xj * w;
                }
            }
        }
    }

    let mut act = pre.mapv(|v| v.max(0.0));
    let mask = match mode {
        Mode::Eval => None,
        Mode::Train { dropout_seed } => {
            let mut rng = seed::rng(dropout_seed);
            let keep = 1.0 - DROPOUT_RATE;
            let scale = 1.0 / keep;
            let m = Array2::from_shape_simple_fn((batch, hidden), || {
                if rng.gen::<f64>() < keep {
                    scale
                } else {
                    0.0
                }
            });
            act *= &m;
            Some(m)
        }
    };

    let logits = act.dot(&params.w2) + params.b2;
    let yhat = logits.mapv(sigmoid);
    Ok(ForwardCache {
        input: x.to_owned(),
        pre,
        hidden: act,
        mask,
        logits,
        yhat,
    })
}

/// Gradient of `sum_i d_yhat[i] * yhat[i]` with respect to the parameters.
pub fn backward(params: &ModelParams, cache: &ForwardCache, d_yhat: &[f64]) -> Result<ParamGrads> {
    if d_yhat.len() != cache.batch_size() {
        return Err(Error::Shape(format!(
            "upstream gradient has {} entries for a batch of {}",
            d_yhat.len(),
            cache.batch_size()
        )));
    }
    let d_logit: Vec<f64> = d_yhat
        .iter()
        .zip(&cache.yhat)
        .map(|(g, y)| g * y * (1.0 - y))
        .collect();
    backward_logits(params, cache, &d_logit)
}

/// Like [`backward`] but seeded with the gradient at the output logit, which
/// stays accurate where the sigmoid saturates.
pub fn backward_logits(
    params: &ModelParams,
    cache: &ForwardCache,
    d_logit: &[f64],
) -> Result<ParamGrads> {
    let batch = cache.batch_size();
    if d_logit.len() != batch {
        return Err(Error::Shape(format!(
            "upstream gradient has {} entries for a batch of {batch}",
            d_logit.len()
        )));
    }
    let hidden = params.hidden_dim();
    let input = params.input_dim();
    let d_logit = Array1::from(d_logit.to_vec());

    let mut grads = params.zeros_like();
    grads.w2 = cache.hidden.t().dot(&d_logit);
    grads.b2 = d_logit.sum();

    let mut dw1t = vec![0.0; input * hidden];
    let mut dpre = vec![0.0; hidden];
    let b1 = grads.b1.as_slice_mut().expect("standard layout");
    for b in 0..batch {
        let g = d_logit[b];
        if g == 0.0 {
            continue;
        }
        for h in 0..hidden {
            let mut d = g * params.w2[h];
            if let Some(mask) = &cache.mask {
                d *= mask[[b, h]];
            }
            dpre[h] = if cache.pre[[b, h]] > 0.0 { d } else { 0.0 };
            b1[h] += dpre[h];
        }
        for (j, &xj) in cache.input.row(b).iter().enumerate() {
            if xj != 0.0 {
                for (acc, d) in dw1t[j * hidden..(j + 1) * hidden].iter_mut().zip(&dpre) {
                    *acc += xj * d;
                }
            }
        }
    }
    let dw1t = Array2::from_shape_vec((input, hidden), dw1t).expect("shape");
    grads.w1 = dw1t.t().as_standard_layout().into_owned();
    Ok(grads)
}
