//! Semi-supervised, fairness-regularized binary classification.
//!
//! A one-hidden-layer MLP is trained on a mix of labeled and unlabeled
//! samples. Unlabeled samples enter the cross-entropy term through
//! confidence-gated pseudo-labels, and a group-fairness penalty
//! (demographic parity, equalized opportunity or equalized odds) is traded
//! off against accuracy by a single weight `alpha`.

pub mod cli;
pub mod data;
pub mod error;
pub mod losses;
pub mod metrics;
pub mod nn;
pub mod optim;
pub mod seed;
pub mod train;

pub use error::{Error, Result};
