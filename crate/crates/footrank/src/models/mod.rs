//! Outcome models: the plain logistic expected score used by the FIFA
//! algorithm, the Davidson win/draw/loss model with home-field advantage,
//! and the Skellam goal-difference model.
//!
//! Every function here takes the skill difference already divided by the
//! scale s; scaling is the caller's concern.

pub mod bessel;
pub mod davidson;
pub mod skellam;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::match_data::Outcome;

/// Expected score of the FIFA algorithm: F(z) = 1 / (1 + 10^-z).
pub fn fifa_expected_score(z_scaled: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-z_scaled))
}

/// Probabilities of the three game outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbs {
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

impl OutcomeProbs {
    pub fn prob(&self, y: Outcome) -> f64 {
        match y {
            Outcome::Home => self.home,
            Outcome::Draw => self.draw,
            Outcome::Away => self.away,
        }
    }

    pub fn sum(&self) -> f64 {
        self.home + self.draw + self.away
    }

    /// Probability-weighted numeric score: p_H + 0.5 p_D.
    pub fn expected_score(&self) -> f64 {
        self.home + 0.5 * self.draw
    }

    /// Most likely outcome, ties broken in the fixed order H, D, A.
    /// The flag reports whether the maximum was attained more than once.
    pub fn most_likely(&self) -> (Outcome, bool) {
        let ordered = [
            (Outcome::Home, self.home),
            (Outcome::Draw, self.draw),
            (Outcome::Away, self.away),
        ];
        let mut best = ordered[0];
        let mut tied = false;
        for &(y, p) in &ordered[1..] {
            if p > best.1 {
                best = (y, p);
                tied = false;
            } else if p == best.1 {
                tied = true;
            }
        }
        (best.0, tied)
    }
}

/// Davidson model parameters: home-field advantage eta, draw parameter kappa,
/// and the rating scale s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DavidsonParams {
    pub eta: f64,
    pub kappa: f64,
    pub scale: f64,
}

impl DavidsonParams {
    pub fn new(eta: f64, kappa: f64, scale: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale must be > 0, got {scale}"
            )));
        }
        if !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be finite, got {eta}"
            )));
        }
        Ok(Self { eta, kappa, scale })
    }
}

/// Skellam model parameters: log-intensity constant c, home-field advantage
/// eta, rating scale s, and the truncation depth D for outcome sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkellamParams {
    pub c: f64,
    pub eta: f64,
    pub scale: f64,
    pub truncation: u32,
}

impl SkellamParams {
    pub const DEFAULT_TRUNCATION: u32 = 50;

    pub fn new(c: f64, eta: f64, scale: f64, truncation: u32) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale must be > 0, got {scale}"
            )));
        }
        if truncation < 1 {
            return Err(Error::InvalidParameter(
                "truncation must be >= 1".to_string(),
            ));
        }
        if !c.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter(
                "c and eta must be finite".to_string(),
            ));
        }
        Ok(Self {
            c,
            eta,
            scale,
            truncation,
        })
    }
}
