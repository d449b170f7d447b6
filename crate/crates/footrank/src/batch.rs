//! Regularized weighted maximum-likelihood fitting of constant skills over a
//! match window:
//!
//! ```text
//! J(theta) = sum_t w_t l(z_t / s; y_t) + alpha / (2 s^2) ||theta||^2
//! ```
//!
//! with w_t = xi_{c_t} zeta_{v_t} and z_t = x_t' theta for the signed
//! scheduling vector x_t = e_home - e_away. Solved by damped Newton with a
//! halving line search; the Hessian at the optimum is retained for the
//! approximate leave-one-out machinery.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::match_data::{MatchRecord, Outcome};
use crate::models::{davidson, skellam, DavidsonParams, SkellamParams};
use crate::online::WeightScheme;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Per-game loss family used by the batch objective.
#[derive(Debug, Clone)]
pub enum LossModel {
    Davidson(DavidsonParams),
    Skellam(SkellamParams),
    /// Squared error on the goal difference, 0.5 (z - d)^2. Its quadratic
    /// shape makes the leave-one-out approximation exact, which is what the
    /// validation suite uses it for.
    Quadratic,
}

impl LossModel {
    pub fn loss(&self, z_scaled: f64, game: &MatchRecord) -> Result<f64> {
        match self {
            LossModel::Davidson(p) => {
                Ok(-davidson::likelihood(z_scaled, game.home_venue, game.outcome(), p).ln())
            }
            LossModel::Skellam(p) => {
                skellam::log_likelihood(z_scaled, game.home_venue, game.goal_diff(), p)
            }
            LossModel::Quadratic => {
                let r = z_scaled - game.goal_diff() as f64;
                Ok(0.5 * r * r)
            }
        }
    }

    pub fn grad(&self, z_scaled: f64, game: &MatchRecord) -> Result<f64> {
        match self {
            LossModel::Davidson(p) => {
                Ok(davidson::gradient(z_scaled, game.home_venue, game.outcome(), p))
            }
            LossModel::Skellam(p) => {
                skellam::gradient(z_scaled, game.home_venue, game.goal_diff(), p)
            }
            LossModel::Quadratic => Ok(z_scaled - game.goal_diff() as f64),
        }
    }

    pub fn hess(&self, z_scaled: f64, game: &MatchRecord) -> Result<f64> {
        match self {
            LossModel::Davidson(p) => Ok(davidson::hessian(z_scaled, game.home_venue, p)),
            LossModel::Skellam(p) => skellam::hessian(z_scaled, game.home_venue, p),
            LossModel::Quadratic => Ok(1.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossModel::Davidson(_) => "davidson",
            LossModel::Skellam(_) => "skellam",
            LossModel::Quadratic => "quadratic",
        }
    }
}

/// A batch fitting problem over a fixed match window.
#[derive(Debug, Clone)]
pub struct BatchProblem<'a> {
    pub matches: &'a [MatchRecord],
    pub team_count: usize,
    pub model: LossModel,
    pub weights: WeightScheme,
    /// Ridge strength; must be positive to solve.
    pub alpha: f64,
    pub scale: f64,
}

impl<'a> BatchProblem<'a> {
    pub fn new(
        matches: &'a [MatchRecord],
        team_count: usize,
        model: LossModel,
        weights: WeightScheme,
        alpha: f64,
        scale: f64,
    ) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale must be > 0, got {scale}"
            )));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        for m in matches {
            if m.home.0 >= team_count || m.away.0 >= team_count {
                return Err(Error::UnknownTeam(format!(
                    "game {} references a team outside 0..{team_count}",
                    m.match_index
                )));
            }
        }
        Ok(Self {
            matches,
            team_count,
            model,
            weights,
            alpha,
            scale,
        })
    }

    /// Combined weight w_t = xi_c zeta_v of one game.
    pub fn weight_of(&self, game: &MatchRecord) -> f64 {
        self.weights.weight(game.category, game.goal_diff())
    }

    /// A copy of this problem with game `match_index` removed (for exact
    /// leave-one-out refits). The clone borrows the caller-provided buffer.
    pub fn without_game<'b>(
        &self,
        match_index: usize,
        buffer: &'b mut Vec<MatchRecord>,
    ) -> Result<BatchProblem<'b>> {
        buffer.clear();
        buffer.extend(
            self.matches
                .iter()
                .filter(|m| m.match_index != match_index)
                .cloned(),
        );
        if buffer.len() == self.matches.len() {
            return Err(Error::InvalidParameter(format!(
                "no game with match_index {match_index}"
            )));
        }
        Ok(BatchProblem {
            matches: buffer,
            team_count: self.team_count,
            model: self.model.clone(),
            weights: self.weights.clone(),
            alpha: self.alpha,
            scale: self.scale,
        })
    }

    /// A team whose games are all wins or all losses, if any. Without
    /// regularization its fitted skill diverges.
    pub fn single_signed_team(&self) -> Option<usize> {
        let mut saw_plus = vec![false; self.team_count];
        let mut saw_other = vec![false; self.team_count];
        let mut played = vec![false; self.team_count];
        for m in self.matches {
            let (h, a) = (m.home.0, m.away.0);
            played[h] = true;
            played[a] = true;
            match m.outcome() {
                Outcome::Home => {
                    saw_plus[h] = true;
                    saw_other[a] = true;
                }
                Outcome::Away => {
                    saw_plus[a] = true;
                    saw_other[h] = true;
                }
                Outcome::Draw => {
                    // A draw bounds the skill from both sides.
                    saw_plus[h] = true;
                    saw_other[h] = true;
                    saw_plus[a] = true;
                    saw_other[a] = true;
                }
            }
        }
        (0..self.team_count).find(|&m| played[m] && (saw_plus[m] != saw_other[m]))
    }
}

/// J(theta): weighted loss plus the ridge term.
pub fn objective(theta: &DVector<f64>, problem: &BatchProblem) -> Result<f64> {
    debug_assert_eq!(theta.len(), problem.team_count);
    let s = problem.scale;
    let mut total = 0.0;
    for m in problem.matches {
        let z = (theta[m.home.0] - theta[m.away.0]) / s;
        total += problem.weight_of(m) * problem.model.loss(z, m)?;
    }
    total += problem.alpha / (2.0 * s * s) * theta.norm_squared();
    Ok(total)
}

/// Gradient of J: sum_t (w_t g_t / s) x_t + (alpha / s^2) theta.
pub fn gradient(theta: &DVector<f64>, problem: &BatchProblem) -> Result<DVector<f64>> {
    let s = problem.scale;
    let mut grad = theta * (problem.alpha / (s * s));
    for m in problem.matches {
        let z = (theta[m.home.0] - theta[m.away.0]) / s;
        let g = problem.weight_of(m) * problem.model.grad(z, m)? / s;
        grad[m.home.0] += g;
        grad[m.away.0] -= g;
    }
    Ok(grad)
}

/// Hessian of J: sum_t (w_t h_t / s^2) x_t x_t' + (alpha / s^2) I.
pub fn hessian(theta: &DVector<f64>, problem: &BatchProblem) -> Result<DMatrix<f64>> {
    let n = problem.team_count;
    let s = problem.scale;
    let mut hess = DMatrix::zeros(n, n);
    let ridge = problem.alpha / (s * s);
    for i in 0..n {
        hess[(i, i)] = ridge;
    }
    for m in problem.matches {
        let (i, j) = (m.home.0, m.away.0);
        let z = (theta[i] - theta[j]) / s;
        let h = problem.weight_of(m) * problem.model.hess(z, m)? / (s * s);
        hess[(i, i)] += h;
        hess[(j, j)] += h;
        hess[(i, j)] -= h;
        hess[(j, i)] -= h;
    }
    Ok(hess)
}

/// One accepted solver iteration, for the run log.
#[derive(Debug, Clone, Serialize)]
pub struct SolveStep {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct BatchSolution {
    pub theta: DVector<f64>,
    pub objective_value: f64,
    /// Max-norm of the gradient at the returned point.
    pub gradient_norm: f64,
    /// Hessian at the optimum, kept for the leave-one-out corrections.
    pub hessian: DMatrix<f64>,
    pub iterations: usize,
    pub log: Vec<SolveStep>,
}

impl BatchSolution {
    /// x_t' theta at the fitted skills, unscaled.
    pub fn z_of(&self, game: &MatchRecord) -> f64 {
        self.theta[game.home.0] - self.theta[game.away.0]
    }
}

fn grad_max_norm(g: &DVector<f64>) -> f64 {
    g.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Minimize J by damped Newton. Requires alpha > 0: without the ridge the
/// problem is translation-invariant and diverges on single-signed streaks.
pub fn solve(
    problem: &BatchProblem,
    init: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<BatchSolution> {
    if !problem.alpha.is_finite() || problem.alpha <= 0.0 {
        let detail = match problem.single_signed_team() {
            Some(team) => format!(
                "alpha = 0 and team {team} has a single-signed result streak"
            ),
            None => "alpha must be positive (the unregularized problem is \
                     translation-invariant)"
                .to_string(),
        };
        return Err(Error::Degenerate(detail));
    }

    let n = problem.team_count;
    let mut theta = match init {
        Some(t) => {
            debug_assert_eq!(t.len(), n);
            t.clone()
        }
        None => DVector::zeros(n),
    };
    let mut obj = objective(&theta, problem)?;
    let mut log = Vec::new();

    for iter in 1..=max_iter {
        let grad = gradient(&theta, problem)?;
        let gn = grad_max_norm(&grad);
        if gn <= tol {
            let hessian = hessian(&theta, problem)?;
            return Ok(BatchSolution {
                theta,
                objective_value: obj,
                gradient_norm: gn,
                hessian,
                iterations: iter - 1,
                log,
            });
        }

        let hess = hessian(&theta, problem)?;
        let newton_dir = Cholesky::new(hess).map(|ch| -(ch.solve(&grad)));

        let mut accepted = None;
        let directions = [newton_dir, Some(-&grad)];
        // The final polishing steps decrease J by less than its rounding
        // noise, so the sufficient-decrease test carries an ulp allowance.
        let noise = 4.0 * f64::EPSILON * obj.abs().max(1.0);
        'dirs: for dir in directions.iter().flatten() {
            // Both candidate directions are descent directions in exact
            // arithmetic (the Hessian is positive definite), but the computed
            // slope can round up to zero near the optimum.
            let slope = grad.dot(dir).min(0.0);
            let mut step = 1.0;
            while step >= 1e-12 {
                let candidate = &theta + dir * step;
                let cand_obj = objective(&candidate, problem)?;
                if cand_obj <= obj + 1e-4 * step * slope + noise {
                    accepted = Some((candidate, cand_obj.min(obj), step));
                    break 'dirs;
                }
                step *= 0.5;
            }
        }

        match accepted {
            Some((next, next_obj, step)) => {
                theta = next;
                obj = next_obj;
                log.push(SolveStep {
                    iter,
                    objective: obj,
                    grad_norm: gn,
                    step,
                });
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    grad_norm: gn,
                    objective: obj,
                })
            }
        }
    }

    let grad = gradient(&theta, problem)?;
    let gn = grad_max_norm(&grad);
    if gn <= tol {
        let hessian = hessian(&theta, problem)?;
        return Ok(BatchSolution {
            theta,
            objective_value: obj,
            gradient_norm: gn,
            hessian,
            iterations: max_iter,
            log,
        });
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        grad_norm: gn,
        objective: obj,
    })
}
