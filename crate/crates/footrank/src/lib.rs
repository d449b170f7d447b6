//! A rating engine for international football results.
//!
//! The crate replays the FIFA-2018 rating algorithm exactly (including its
//! knockout and shootout rules), generalizes it with the Davidson draw model
//! and the Skellam goal-difference model, fits constant skills by regularized
//! maximum likelihood over a match window, evaluates predictions by MSE,
//! log-score, and accuracy with approximate leave-one-out cross-validation,
//! and tunes hyperparameters by alternating line search.
//!
//! The `footrank` binary drives all of it from match-result CSV files; see
//! the crate README for the command set.

pub mod alo;
pub mod batch;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod match_data;
pub mod models;
pub mod online;
pub mod synth;
pub mod tuning;

pub use error::{Error, Result};
