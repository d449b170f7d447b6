//! Python bindings for the footrank rating engine: match data handling,
//! outcome models, online replays, batch fits, and leave-one-out scores.
//!
//! Model parameters are passed as plain dicts with the same keys and
//! defaults as the CLI's `--params` (e.g. `{"k": 35, "eta": 0.3}`).

use std::collections::BTreeMap;
use std::fs::File;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use footrank::alo;
use footrank::batch::{self, BatchProblem};
use footrank::config::{build_batch, build_engine, build_synth, ParamMap};
use footrank::evaluation::{evaluate_replay, window_second_half, GameWindow};
use footrank::match_data::{self, MatchRecord, TeamRegistry, VenueFilter};
use footrank::models::{davidson, skellam, DavidsonParams, SkellamParams};
use footrank::online::{self, RatingState, RuleToggles};
use footrank::synth;

fn bad(err: footrank::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn venue_filter(venue: &str) -> PyResult<VenueFilter> {
    match venue {
        "all" => Ok(VenueFilter::All),
        "neutral" => Ok(VenueFilter::NeutralOnly),
        "home" => Ok(VenueFilter::HomeVenueOnly),
        other => Err(PyValueError::new_err(format!(
            "venue must be all/neutral/home, got {other:?}"
        ))),
    }
}

fn param_map(params: Option<BTreeMap<String, f64>>) -> ParamMap {
    params.unwrap_or_default()
}

/// A parsed match dataset: the team registry plus chronologically ordered
/// game records.
#[pyclass]
struct MatchData {
    registry: TeamRegistry,
    matches: Vec<MatchRecord>,
}

#[pymethods]
impl MatchData {
    /// Load a match CSV (schema `date,home,away,...` as produced by `synth`).
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let (registry, matches) = match_data::parse_matches(file).map_err(bad)?;
        Ok(Self { registry, matches })
    }

    /// Generate a seeded synthetic dataset from a ground-truth model
    /// ("davidson" or "skellam"). Returns (data, true_skills).
    #[staticmethod]
    #[pyo3(signature = (seed, teams, games, model="davidson", params=None))]
    fn synthetic(
        seed: u64,
        teams: usize,
        games: usize,
        model: &str,
        params: Option<BTreeMap<String, f64>>,
    ) -> PyResult<(Self, BTreeMap<String, f64>)> {
        let resolved = build_synth(model, seed, teams, games, param_map(params)).map_err(bad)?;
        let data = synth::generate(&resolved.config).map_err(bad)?;
        let skills = data
            .registry
            .ids()
            .map(|id| (data.registry.name(id).to_string(), data.true_skills[id.0]))
            .collect();
        Ok((
            Self {
                registry: data.registry,
                matches: data.matches,
            },
            skills,
        ))
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        let file = File::create(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        match_data::write_matches(file, &self.registry, &self.matches).map_err(bad)
    }

    fn __len__(&self) -> usize {
        self.matches.len()
    }

    fn team_names(&self) -> Vec<String> {
        self.registry
            .ids()
            .map(|id| self.registry.name(id).to_string())
            .collect()
    }

    /// Counts of absolute goal differences, bucketed 0..5 and >=6.
    fn mov_histogram(&self) -> Vec<u64> {
        match_data::mov_histogram(&self.matches).to_vec()
    }

    /// (f_home, f_draw, f_away) over the venue subset "all"/"neutral"/"home".
    #[pyo3(signature = (venue="all"))]
    fn outcome_frequencies(&self, venue: &str) -> PyResult<(f64, f64, f64)> {
        let freq =
            match_data::outcome_frequencies(&self.matches, venue_filter(venue)?).map_err(bad)?;
        Ok((freq.home, freq.draw, freq.away))
    }
}

impl MatchData {
    fn initial_state(
        &self,
        initial: Option<&BTreeMap<String, f64>>,
    ) -> PyResult<RatingState> {
        let Some(initial) = initial else {
            return Ok(RatingState::uniform(self.registry.len(), 0.0));
        };
        let mut skills = BTreeMap::new();
        for (name, rating) in initial {
            if let Some(id) = self.registry.id(name) {
                skills.insert(id, *rating);
            }
        }
        for id in self.registry.ids() {
            if !skills.contains_key(&id) {
                return Err(PyValueError::new_err(format!(
                    "no initial rating for team {}",
                    self.registry.name(id)
                )));
            }
        }
        Ok(RatingState::new(skills))
    }
}

/// Expected score of the FIFA algorithm, F(z) = 1 / (1 + 10^-z).
#[pyfunction]
fn fifa_expected_score(z_scaled: f64) -> f64 {
    footrank::models::fifa_expected_score(z_scaled)
}

/// Davidson outcome probabilities (home, draw, away).
#[pyfunction]
#[pyo3(signature = (z_scaled, home_venue, eta, kappa))]
fn davidson_probs(
    z_scaled: f64,
    home_venue: bool,
    eta: f64,
    kappa: f64,
) -> PyResult<(f64, f64, f64)> {
    let p = DavidsonParams::new(eta, kappa, 1.0).map_err(bad)?;
    let probs = davidson::outcome_probs(z_scaled, home_venue, &p);
    Ok((probs.home, probs.draw, probs.away))
}

/// Davidson conditional expected score F_kappa(z).
#[pyfunction]
fn davidson_expected_score(
    z_scaled: f64,
    home_venue: bool,
    eta: f64,
    kappa: f64,
) -> PyResult<f64> {
    let p = DavidsonParams::new(eta, kappa, 1.0).map_err(bad)?;
    Ok(davidson::expected_score(z_scaled, home_venue, &p))
}

/// Skellam outcome probabilities (home, draw, away) by truncated sums.
#[pyfunction]
#[pyo3(signature = (z_scaled, home_venue, c, eta, truncation=50))]
fn skellam_probs(
    z_scaled: f64,
    home_venue: bool,
    c: f64,
    eta: f64,
    truncation: u32,
) -> PyResult<(f64, f64, f64)> {
    let p = SkellamParams::new(c, eta, 1.0, truncation).map_err(bad)?;
    let probs = skellam::outcome_probs(z_scaled, home_venue, &p).map_err(bad)?;
    Ok((probs.home, probs.draw, probs.away))
}

/// Expected goal difference of the Skellam model.
#[pyfunction]
fn skellam_expected_diff(z_scaled: f64, home_venue: bool, c: f64, eta: f64) -> PyResult<f64> {
    let p = SkellamParams::new(c, eta, 1.0, 50).map_err(bad)?;
    skellam::expected_diff(z_scaled, home_venue, &p).map_err(bad)
}

/// Exponentially scaled modified Bessel function I_v(t) e^{-t}.
#[pyfunction]
fn bessel_i_scaled(order: u32, t: f64) -> PyResult<f64> {
    if t < 0.0 {
        return Err(PyValueError::new_err("t must be >= 0"));
    }
    Ok(footrank::models::bessel::bessel_i_scaled(order, t))
}

/// Closed-form (eta, kappa) from outcome frequencies.
#[pyfunction]
fn empirical_eta_kappa(f_home: f64, f_draw: f64, f_away: f64) -> PyResult<(f64, f64)> {
    let freq = match_data::OutcomeFrequencies {
        home: f_home,
        draw: f_draw,
        away: f_away,
        games: 0,
    };
    footrank::tuning::empirical_eta_kappa(&freq).map_err(bad)
}

/// Replay games through an online engine ("fifa", "davidson", or "skellam").
/// Returns a dict with final ratings, inflation, and second-half metrics.
#[pyfunction]
#[pyo3(signature = (data, model="fifa", params=None, initial=None, shootout_rule=true, knockout_rule=true))]
fn replay<'py>(
    py: Python<'py>,
    data: &MatchData,
    model: &str,
    params: Option<BTreeMap<String, f64>>,
    initial: Option<BTreeMap<String, f64>>,
    shootout_rule: bool,
    knockout_rule: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let resolved = build_engine(model, param_map(params)).map_err(bad)?;
    let state = data.initial_state(initial.as_ref())?;
    let rules = RuleToggles {
        shootout: shootout_rule,
        knockout: knockout_rule,
    };
    let run = online::replay(&data.matches, &state, &resolved.engine, rules).map_err(bad)?;

    let report = if run.games.is_empty() {
        None
    } else {
        Some(
            evaluate_replay(
                &run,
                window_second_half(run.games.len()),
                resolved.wrapper,
                serde_json::Value::Null,
            )
            .map_err(bad)?,
        )
    };

    let ratings: BTreeMap<String, f64> = run
        .final_state
        .iter()
        .map(|(id, rating)| (data.registry.name(id).to_string(), rating))
        .collect();

    let out = PyDict::new(py);
    out.set_item("final_ratings", ratings)?;
    out.set_item("inflation", run.inflation)?;
    out.set_item("games", run.games.len())?;
    if let Some(report) = report {
        out.set_item("mse", report.mse)?;
        out.set_item("log_score", report.log_score)?;
        out.set_item("accuracy", report.accuracy)?;
    }
    Ok(out)
}

/// Fit constant skills by regularized maximum likelihood ("davidson",
/// "skellam", or "quadratic") and return ratings plus solver diagnostics.
#[pyfunction]
#[pyo3(signature = (data, model="davidson", params=None))]
fn fit_batch<'py>(
    py: Python<'py>,
    data: &MatchData,
    model: &str,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let resolved = build_batch(model, param_map(params)).map_err(bad)?;
    let problem = BatchProblem::new(
        &data.matches,
        data.registry.len(),
        resolved.model,
        resolved.weights,
        resolved.alpha,
        resolved.scale,
    )
    .map_err(bad)?;
    let solution =
        batch::solve(&problem, None, batch::DEFAULT_TOL, batch::DEFAULT_MAX_ITER).map_err(bad)?;

    let ratings: BTreeMap<String, f64> = data
        .registry
        .ids()
        .map(|id| (data.registry.name(id).to_string(), solution.theta[id.0]))
        .collect();

    let out = PyDict::new(py);
    out.set_item("ratings", ratings)?;
    out.set_item("objective", solution.objective_value)?;
    out.set_item("gradient_norm", solution.gradient_norm)?;
    out.set_item("iterations", solution.iterations)?;
    Ok(out)
}

/// Batch fit plus approximate leave-one-out log-score and accuracy over the
/// whole dataset.
#[pyfunction]
#[pyo3(signature = (data, model="davidson", params=None))]
fn alo_scores<'py>(
    py: Python<'py>,
    data: &MatchData,
    model: &str,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let resolved = build_batch(model, param_map(params)).map_err(bad)?;
    let problem = BatchProblem::new(
        &data.matches,
        data.registry.len(),
        resolved.model,
        resolved.weights,
        resolved.alpha,
        resolved.scale,
    )
    .map_err(bad)?;
    let solution =
        batch::solve(&problem, None, batch::DEFAULT_TOL, batch::DEFAULT_MAX_ITER).map_err(bad)?;
    let evaluation = alo::alo_scores(&problem, &solution, serde_json::Value::Null).map_err(bad)?;

    let out = PyDict::new(py);
    out.set_item("log_score", evaluation.report.log_score)?;
    out.set_item("accuracy", evaluation.report.accuracy)?;
    out.set_item("games", evaluation.report.games_counted)?;
    out.set_item(
        "corrections",
        evaluation
            .predictions
            .iter()
            .map(|p| p.correction)
            .collect::<Vec<f64>>(),
    )?;
    Ok(out)
}

/// Evaluate a replayed engine over the full window instead of the second
/// half (mirrors the CLI's `--window full`).
#[pyfunction]
#[pyo3(signature = (data, model="fifa", params=None, initial=None))]
fn replay_full_window<'py>(
    py: Python<'py>,
    data: &MatchData,
    model: &str,
    params: Option<BTreeMap<String, f64>>,
    initial: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let resolved = build_engine(model, param_map(params)).map_err(bad)?;
    let state = data.initial_state(initial.as_ref())?;
    let run = online::replay(
        &data.matches,
        &state,
        &resolved.engine,
        RuleToggles::default(),
    )
    .map_err(bad)?;
    let report = evaluate_replay(
        &run,
        GameWindow::full(run.games.len()),
        resolved.wrapper,
        serde_json::Value::Null,
    )
    .map_err(bad)?;
    let out = PyDict::new(py);
    out.set_item("mse", report.mse)?;
    out.set_item("log_score", report.log_score)?;
    out.set_item("accuracy", report.accuracy)?;
    Ok(out)
}

#[pymodule]
fn footrank_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MatchData>()?;
    m.add_function(wrap_pyfunction!(fifa_expected_score, m)?)?;
    m.add_function(wrap_pyfunction!(davidson_probs, m)?)?;
    m.add_function(wrap_pyfunction!(davidson_expected_score, m)?)?;
    m.add_function(wrap_pyfunction!(skellam_probs, m)?)?;
    m.add_function(wrap_pyfunction!(skellam_expected_diff, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i_scaled, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_eta_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(fit_batch, m)?)?;
    m.add_function(wrap_pyfunction!(alo_scores, m)?)?;
    m.add_function(wrap_pyfunction!(replay_full_window, m)?)?;
    Ok(())
}
