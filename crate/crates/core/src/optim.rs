//! Adam with bias-corrected moment estimates.

use crate::error::{Error, Result};
use crate::nn::{ModelParams, ParamGrads};

pub const DEFAULT_LR: f64 = 1e-3;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state shaped like `params`, default moment decay rates.
    pub fn new(params: &ModelParams, lr: f64) -> Result<Self> {
        Self::with_hyperparameters(params, lr, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPSILON)
    }

    pub fn with_hyperparameters(
        params: &ModelParams,
        lr: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!(
                "learning rate and epsilon must be positive (lr = {lr}, epsilon = {epsilon})"
            )));
        }
        if !(0.0 < beta1 && beta1 < 1.0 && 0.0 < beta2 && beta2 < 1.0) {
            return Err(Error::Config(format!(
                "moment decay rates must lie in (0, 1) (beta1 = {beta1}, beta2 = {beta2})"
            )));
        }
        Ok(Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            lr,
            beta1,
            beta2,
            epsilon,
        })
    }

    /// One update. Parameters are untouched if any gradient is non-finite.
    pub fn step(&mut self, params: &mut ModelParams, grads: &ParamGrads) -> Result<()> {
        if grads.w1.dim() != params.w1.dim() || grads.b1.len() != params.b1.len() || grads.w2.len() != params.w2.len()
        {
            return Err(Error::Shape("gradient and parameter shapes differ".into()));
        }
        for (name, block) in grads.blocks() {
            if block.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }

        self.t += 1;
        let t = self.t as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let (lr, eps) = (self.lr, self.epsilon);

        let blocks = params
            .blocks_mut()
            .into_iter()
            .zip(self.m.blocks_mut())
            .zip(self.v.blocks_mut())
            .zip(grads.blocks());
        for ((((_, p), (_, m)), (_, v)), (_, g)) in blocks {
            for (((p, m), v), &g) in p.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
