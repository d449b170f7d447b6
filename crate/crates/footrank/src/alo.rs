//! Approximate leave-one-out cross-validation from a single full-data fit.
//!
//! Removing game t from the fit shifts its own prediction by a closed-form
//! correction built from the Hessian at the optimum:
//!
//! ```text
//! x_t' theta_loo ~ x_t' theta_hat + w_t g_t a_t s / (s^2 - w_t h_t a_t)
//! ```
//!
//! with a_t = x_t' H^{-1} x_t and w_t the game's combined weight. An exact
//! refit-without-t oracle is provided alongside for validating the
//! approximation.

use std::collections::HashMap;

use nalgebra::{Cholesky, DVector};
use serde::Serialize;

use crate::batch::{self, BatchProblem, BatchSolution};
use crate::error::{Error, Result};
use crate::evaluation::{prob_scores, EvaluationReport};
use crate::match_data::Outcome;
use crate::models::{davidson, skellam, OutcomeProbs};

/// Approximate leave-one-out prediction for one game.
#[derive(Debug, Clone, Serialize)]
pub struct AloPrediction {
    pub match_index: usize,
    /// x_t' theta_hat from the full fit, unscaled.
    pub z_full: f64,
    /// Approximate x_t' theta_hat_{\t}, unscaled.
    pub z_loo: f64,
    /// Leverage a_t = x_t' H^{-1} x_t.
    pub a: f64,
    pub correction: f64,
    /// s^2 - w_t h_t a_t; must stay positive.
    pub denominator: f64,
}

/// Closed-form leave-one-out predictions for every game of the problem.
/// Games sharing the same (unordered) team pair reuse the leverage a_t.
pub fn alo_predictions(
    solution: &BatchSolution,
    problem: &BatchProblem,
) -> Result<Vec<AloPrediction>> {
    let chol = Cholesky::new(solution.hessian.clone()).ok_or(Error::AloSingularity {
        game: 0,
        denominator: 0.0,
    })?;
    let s = problem.scale;
    let n = problem.team_count;

    let mut leverage_cache: HashMap<(usize, usize), f64> = HashMap::new();
    let mut out = Vec::with_capacity(problem.matches.len());
    for m in problem.matches {
        let (i, j) = (m.home.0, m.away.0);
        let key = (i.min(j), i.max(j));
        let a = match leverage_cache.get(&key) {
            Some(&a) => a,
            None => {
                let mut x = DVector::zeros(n);
                x[i] = 1.0;
                x[j] = -1.0;
                let u = chol.solve(&x);
                let a = u[i] - u[j];
                leverage_cache.insert(key, a);
                a
            }
        };
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::AloSingularity {
                game: m.match_index,
                denominator: a,
            });
        }

        let z_full = solution.z_of(m);
        let w = problem.weight_of(m);
        let g = problem.model.grad(z_full / s, m)?;
        let h = problem.model.hess(z_full / s, m)?;
        let denominator = s * s - w * h * a;
        if denominator <= 0.0 {
            return Err(Error::AloSingularity {
                game: m.match_index,
                denominator,
            });
        }
        let correction = w * g * a * s / denominator;
        out.push(AloPrediction {
            match_index: m.match_index,
            z_full,
            z_loo: z_full + correction,
            a,
            correction,
            denominator,
        });
    }
    Ok(out)
}

/// Exact leave-one-out prediction: refit without game `match_index` and
/// evaluate x_t' theta on the removed game's pair.
pub fn exact_loo(problem: &BatchProblem, match_index: usize, tol: f64) -> Result<f64> {
    let removed = problem
        .matches
        .iter()
        .find(|m| m.match_index == match_index)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("no game with match_index {match_index}"))
        })?
        .clone();
    let mut buffer = Vec::new();
    let reduced = problem.without_game(match_index, &mut buffer)?;
    let refit = batch::solve(&reduced, None, tol, batch::DEFAULT_MAX_ITER)?;
    Ok(refit.theta[removed.home.0] - refit.theta[removed.away.0])
}

/// Leave-one-out evaluation of the full dataset (no window truncation):
/// per-game predictions plus the log-score and accuracy computed at the
/// corrected z values.
#[derive(Debug, Clone)]
pub struct AloEvaluation {
    pub predictions: Vec<AloPrediction>,
    pub report: EvaluationReport,
    /// Per-game negated log-probability of the observed outcome (the
    /// log-score contribution), aligned with `predictions`.
    pub contributions: Vec<f64>,
}

pub fn alo_scores(
    problem: &BatchProblem,
    solution: &BatchSolution,
    params_echo: serde_json::Value,
) -> Result<AloEvaluation> {
    let predictions = alo_predictions(solution, problem)?;
    let s = problem.scale;

    let mut items: Vec<(usize, OutcomeProbs, Outcome)> = Vec::with_capacity(predictions.len());
    for (pred, m) in predictions.iter().zip(problem.matches.iter()) {
        let probs = match &problem.model {
            batch::LossModel::Davidson(p) => {
                davidson::outcome_probs(pred.z_loo / s, m.home_venue, p)
            }
            batch::LossModel::Skellam(p) => {
                skellam::outcome_probs(pred.z_loo / s, m.home_venue, p)?
            }
            batch::LossModel::Quadratic => {
                return Err(Error::InvalidParameter(
                    "the quadratic loss has no outcome distribution to score".into(),
                ))
            }
        };
        items.push((m.match_index, probs, m.outcome()));
    }

    let contributions: Vec<f64> = items
        .iter()
        .map(|(_, probs, y)| -probs.prob(*y).ln())
        .collect();
    let scores = prob_scores(items.into_iter())?;
    let total = predictions.len();
    Ok(AloEvaluation {
        predictions,
        report: EvaluationReport {
            mse: None,
            log_score: Some(scores.log_score),
            accuracy: Some(scores.accuracy),
            window_start: 1,
            window_end: total,
            games_counted: total,
            accuracy_ties: scores.ties,
            shootout_substituted: 0,
            zero_probability_game: scores.zero_prob_index,
            params: params_echo,
        },
        contributions,
    })
}
