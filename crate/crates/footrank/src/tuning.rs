//! Hyperparameter search by alternating single-parameter line search, plus
//! the closed-form frequency estimators for eta and kappa.
//!
//! One coordinate at a time, the objective is evaluated on the parameter's
//! grid, the grid minimum is refined once at half the grid step, and the move
//! is accepted only if it improves the objective. Sweeps repeat until a full
//! sweep improves by less than the tolerance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::match_data::OutcomeFrequencies;

/// Named parameter values, ordered for deterministic iteration.
pub type ParamSet = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum ParamStatus {
    Fixed(f64),
    Free { lower: f64, upper: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub status: ParamStatus,
}

impl ParamSpec {
    pub fn fixed(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            status: ParamStatus::Fixed(value),
        }
    }

    pub fn free(name: impl Into<String>, lower: f64, upper: f64, step: f64) -> Result<Self> {
        let name = name.into();
        if name == "xi_0" || name == "zeta_0" {
            return Err(Error::InvalidParameter(format!(
                "{name} is pinned at 1 and cannot be tuned"
            )));
        }
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::InvalidParameter(format!(
                "bad bounds for {name}: [{lower}, {upper}]"
            )));
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid step for {name} must be positive, got {step}"
            )));
        }
        Ok(Self {
            name,
            status: ParamStatus::Free { lower, upper, step },
        })
    }

    /// Starting value: fixed parameters at their value, free ones at the grid
    /// point nearest the middle of their range.
    fn initial(&self) -> f64 {
        match self.status {
            ParamStatus::Fixed(v) => v,
            ParamStatus::Free { lower, upper, step } => {
                let mid = 0.5 * (lower + upper);
                let snapped = lower + ((mid - lower) / step).round() * step;
                snapped.min(upper)
            }
        }
    }
}

/// The default search grid of each tunable parameter, resolving one decimal
/// before refinement.
pub fn default_grid(name: &str) -> Option<(f64, f64, f64)> {
    let grid = match name {
        "k" => (1.0, 100.0, 1.0),
        "alpha" => (0.05, 5.0, 0.05),
        "eta" => (0.0, 1.0, 0.05),
        "kappa" => (0.1, 3.0, 0.05),
        "c" => (-1.0, 1.0, 0.05),
        _ if name.starts_with("xi_") || name.starts_with("zeta_") => (0.1, 10.0, 0.1),
        _ => return None,
    };
    Some(grid)
}

pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_SWEEPS: usize = 50;

/// One accepted coordinate move.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub sweep: usize,
    pub param: String,
    pub value: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: ParamSet,
    pub best_objective: f64,
    pub trace: Vec<TraceEntry>,
    /// Objective evaluations spent (each is a full replay or refit).
    pub evaluations: usize,
    pub sweeps: usize,
}

/// Alternating line search over the free parameters of `specs`.
pub fn coordinate_search<F>(
    mut objective: F,
    specs: &[ParamSpec],
    convergence_tol: f64,
    max_sweeps: usize,
) -> Result<TuneResult>
where
    F: FnMut(&ParamSet) -> Result<f64>,
{
    let mut params: ParamSet = specs
        .iter()
        .map(|s| (s.name.clone(), s.initial()))
        .collect();
    if params.len() != specs.len() {
        return Err(Error::InvalidParameter(
            "duplicate parameter name in specs".into(),
        ));
    }

    let mut evaluations = 0usize;

    evaluations += 1;
    let mut current = objective(&params)?;
    if !current.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "objective is not finite at the initial point ({current})"
        )));
    }

    let mut trace = Vec::new();
    let mut sweeps = 0usize;
    for sweep in 1..=max_sweeps {
        sweeps = sweep;
        let sweep_start = current;
        for spec in specs {
            let ParamStatus::Free { lower, upper, step } = spec.status else {
                continue;
            };
            let original = params[&spec.name];
            let mut best_value = original;
            let mut best_obj = current;
            let mut any_finite = false;

            // Grid pass over the whole range; the current value may sit
            // off-grid after an earlier refinement, so nothing is skipped.
            let points = ((upper - lower) / step).round() as usize;
            for idx in 0..=points {
                let value = (lower + idx as f64 * step).min(upper);
                params.insert(spec.name.clone(), value);
                evaluations += 1;
                let obj = objective(&params)?;
                if obj.is_finite() {
                    any_finite = true;
                    if obj < best_obj {
                        best_obj = obj;
                        best_value = value;
                    }
                }
            }
            if !any_finite {
                return Err(Error::NonFiniteObjective(spec.name.clone()));
            }

            // Refine once at half the grid step around the minimum.
            for value in [best_value - 0.5 * step, best_value + 0.5 * step] {
                let value = value.clamp(lower, upper);
                if value == best_value {
                    continue;
                }
                params.insert(spec.name.clone(), value);
                evaluations += 1;
                let obj = objective(&params)?;
                if obj.is_finite() && obj < best_obj {
                    best_obj = obj;
                    best_value = value;
                }
            }

            if best_obj < current {
                params.insert(spec.name.clone(), best_value);
                current = best_obj;
                trace.push(TraceEntry {
                    sweep,
                    param: spec.name.clone(),
                    value: best_value,
                    objective: best_obj,
                });
            } else {
                params.insert(spec.name.clone(), original);
            }
        }
        if sweep_start - current < convergence_tol {
            break;
        }
    }

    Ok(TuneResult {
        best: params,
        best_objective: current,
        trace,
        evaluations,
        sweeps,
    })
}

/// Closed-form frequency estimators: eta = log10(f_H / f_A) and
/// kappa = f_D / sqrt(f_H f_A).
pub fn empirical_eta_kappa(freq: &OutcomeFrequencies) -> Result<(f64, f64)> {
    if freq.home <= 0.0 {
        return Err(Error::ZeroFrequency("home"));
    }
    if freq.draw <= 0.0 {
        return Err(Error::ZeroFrequency("draw"));
    }
    if freq.away <= 0.0 {
        return Err(Error::ZeroFrequency("away"));
    }
    let eta = (freq.home / freq.away).log10();
    let kappa = freq.draw / (freq.home * freq.away).sqrt();
    Ok((eta, kappa))
}
