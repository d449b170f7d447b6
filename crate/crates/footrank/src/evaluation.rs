//! Prediction metrics over declared game windows: mean squared error of the
//! expected score, the negated log-score, and the accuracy of the most
//! likely outcome.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::match_data::Outcome;
use crate::models::{davidson, DavidsonParams, OutcomeProbs};
use crate::online::Replay;

/// 1-based inclusive game range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameWindow {
    pub start: usize,
    pub end: usize,
}

impl GameWindow {
    pub fn full(total: usize) -> Self {
        Self {
            start: 1,
            end: total,
        }
    }

    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// The evaluation window of the online metrics: games floor(T/2)+1 ..= T,
/// attenuating initialization effects.
pub fn window_second_half(total: usize) -> GameWindow {
    GameWindow {
        start: total / 2 + 1,
        end: total,
    }
}

/// Metric values over a window, together with the parameters that produced
/// the predictions.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub mse: Option<f64>,
    pub log_score: Option<f64>,
    pub accuracy: Option<f64>,
    pub window_start: usize,
    pub window_end: usize,
    pub games_counted: usize,
    /// Games whose maximal outcome probability was attained more than once;
    /// such ties resolve in the fixed order H, D, A.
    pub accuracy_ties: usize,
    /// Games entering the window with shootout-substituted scores.
    pub shootout_substituted: usize,
    /// First game assigned zero probability to its observed outcome, which
    /// makes the log-score infinite.
    pub zero_probability_game: Option<usize>,
    pub params: serde_json::Value,
}

/// Log-score and accuracy over (game index, predicted distribution, observed
/// outcome) triples.
#[derive(Debug, Clone, Copy)]
pub struct ProbScores {
    pub log_score: f64,
    pub accuracy: f64,
    pub ties: usize,
    pub zero_prob_index: Option<usize>,
    pub count: usize,
}

pub fn prob_scores(
    items: impl Iterator<Item = (usize, OutcomeProbs, Outcome)>,
) -> Result<ProbScores> {
    let mut log_sum = 0.0;
    let mut hits = 0usize;
    let mut ties = 0usize;
    let mut zero_prob_index = None;
    let mut count = 0usize;
    for (index, probs, observed) in items {
        count += 1;
        let p = probs.prob(observed);
        if p <= 0.0 {
            log_sum = f64::INFINITY;
            if zero_prob_index.is_none() {
                zero_prob_index = Some(index);
            }
        } else {
            log_sum += -p.ln();
        }
        let (best, tied) = probs.most_likely();
        if tied {
            ties += 1;
        }
        if best == observed {
            hits += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptySelection("no games in the window".into()));
    }
    Ok(ProbScores {
        log_score: log_sum / count as f64,
        accuracy: hits as f64 / count as f64,
        ties,
        zero_prob_index,
        count,
    })
}

/// Mean squared error of the expected score against the realized score over
/// (realized, expected) pairs.
pub fn mse(pairs: impl Iterator<Item = (f64, f64)>) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (realized, expected) in pairs {
        let e = realized - expected;
        sum += e * e;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySelection("no games in the window".into()));
    }
    Ok(sum / count as f64)
}

/// Evaluate a replay over a window. Model-based engines carry their own
/// outcome distributions; the FIFA replica has none, so a Davidson wrapper
/// with stated (kappa, eta) supplies them, and the report echoes which one.
pub fn evaluate_replay(
    replay: &Replay,
    window: GameWindow,
    fifa_wrapper: Option<DavidsonParams>,
    mut params_echo: serde_json::Value,
) -> Result<EvaluationReport> {
    if window.start < 1 || window.end > replay.games.len() || window.is_empty() {
        return Err(Error::EmptySelection(format!(
            "window {}..{} does not fit {} games",
            window.start,
            window.end,
            replay.games.len()
        )));
    }
    let games = &replay.games[window.start - 1..window.end];

    let mse_value = mse(games
        .iter()
        .map(|g| (g.home_score_used, g.expected_home_score)))?;

    let mut items = Vec::with_capacity(games.len());
    for g in games {
        let probs = match (g.probs, &fifa_wrapper) {
            (Some(p), _) => Some(p),
            (None, Some(wrapper)) => Some(davidson::outcome_probs(
                g.z_before / wrapper.scale,
                g.home_venue,
                wrapper,
            )),
            (None, None) => None,
        };
        if let Some(p) = probs {
            items.push((g.match_index, p, g.outcome));
        }
    }

    let (log_score, accuracy, ties, zero_prob) = if items.len() == games.len() {
        let s = prob_scores(items.into_iter())?;
        (
            Some(s.log_score),
            Some(s.accuracy),
            s.ties,
            s.zero_prob_index,
        )
    } else {
        (None, None, 0, None)
    };

    if let (Some(wrapper), serde_json::Value::Object(map)) = (&fifa_wrapper, &mut params_echo) {
        map.insert(
            "outcome_wrapper".into(),
            serde_json::json!({
                "kappa": wrapper.kappa,
                "eta": wrapper.eta,
                "scale": wrapper.scale,
            }),
        );
    }

    Ok(EvaluationReport {
        mse: Some(mse_value),
        log_score,
        accuracy,
        window_start: window.start,
        window_end: window.end,
        games_counted: games.len(),
        accuracy_ties: ties,
        shootout_substituted: games.iter().filter(|g| g.shootout_applied).count(),
        zero_probability_game: zero_prob,
        params: params_echo,
    })
}
