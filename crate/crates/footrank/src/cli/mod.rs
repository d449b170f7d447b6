//! The `footrank` command-line interface: validation, replay, batch fitting,
//! leave-one-out evaluation, tuning, frequency estimation, scale selection,
//! and synthetic data generation, all driven by match CSV files.

mod manifest;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::alo;
use crate::batch::{self, BatchProblem};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_replay, window_second_half, GameWindow};
use crate::match_data::{
    self, audit_matches, outcome_frequencies, MatchRecord, TeamRegistry, VenueFilter,
};
use crate::online::{replay, scale_selection, RatingState, Replay, RuleToggles};
use crate::synth;
use crate::tuning::{self, coordinate_search, ParamSpec, ParamStatus};

use crate::config::{build_batch, build_engine, build_synth, parse_params, ParamMap};
use manifest::create_run_dir;

#[derive(Parser)]
#[command(
    name = "footrank",
    version,
    about = "Football rating engine: FIFA-style online ratings, Davidson and \
             Skellam models, batch ML fits, leave-one-out evaluation, and tuning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VenueArg {
    All,
    Neutral,
    Home,
}

impl VenueArg {
    fn filter(self) -> VenueFilter {
        match self {
            VenueArg::All => VenueFilter::All,
            VenueArg::Neutral => VenueFilter::NeutralOnly,
            VenueArg::Home => VenueFilter::HomeVenueOnly,
        }
    }

    fn label(self) -> &'static str {
        match self {
            VenueArg::All => "all",
            VenueArg::Neutral => "neutral",
            VenueArg::Home => "home",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WindowArg {
    SecondHalf,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TuneObjective {
    OnlineMse,
    OnlineLogScore,
    AloLogScore,
}

#[derive(Subcommand)]
enum Command {
    /// Check a match CSV against the schema, reporting every bad row.
    Validate {
        #[arg(long)]
        matches: PathBuf,
        /// Optional run directory for the validation report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay games through an online rating engine.
    Replay {
        #[arg(long)]
        matches: PathBuf,
        /// Initial ratings CSV (`team,rating`); teams default to 0 without it.
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Engine: fifa, davidson, or skellam.
        #[arg(long, default_value = "fifa")]
        model: String,
        /// Engine parameters as key=value (e.g. k=35 eta=0.3 kappa=0.9 s=200).
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
        /// Disable the shootout score substitution.
        #[arg(long)]
        no_shootout_rule: bool,
        /// Disable the knockout loss clamp.
        #[arg(long)]
        no_knockout_rule: bool,
        /// Seed teams missing from the initial file at the file mean instead
        /// of failing.
        #[arg(long)]
        seed_newcomers: bool,
        /// Evaluation window for the report.
        #[arg(long, value_enum, default_value = "second-half")]
        window: WindowArg,
        /// Also write snapshot.csv with the ratings as of this date
        /// (ISO-8601, inclusive).
        #[arg(long)]
        snapshot_date: Option<String>,
    },
    /// Fit constant skills by regularized maximum likelihood.
    FitBatch {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Loss model: davidson, skellam, or quadratic.
        #[arg(long, default_value = "davidson")]
        model: String,
        /// Model parameters as key=value (e.g. alpha=0.4 eta=0.3 kappa=0.8).
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
        #[arg(long, default_value_t = batch::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = batch::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Batch fit plus approximate leave-one-out predictions and scores.
    Alo {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Loss model: davidson or skellam.
        #[arg(long, default_value = "davidson")]
        model: String,
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
        #[arg(long, default_value_t = batch::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = batch::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Alternating line search over hyperparameters against a metric.
    Tune {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// JSON file: {"param": fixed | [lower, upper, step], ...}.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        objective: TuneObjective,
        /// Model family the parameters feed (engine or batch model).
        #[arg(long, default_value = "davidson")]
        model: String,
        /// Base parameters for everything not under tuning.
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
        #[arg(long)]
        no_shootout_rule: bool,
        #[arg(long)]
        no_knockout_rule: bool,
        #[arg(long)]
        seed_newcomers: bool,
        #[arg(long, default_value_t = tuning::DEFAULT_CONVERGENCE_TOL)]
        convergence_tol: f64,
        #[arg(long, default_value_t = tuning::DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
    },
    /// Outcome frequencies and the closed-form eta/kappa estimates.
    FreqEstimate {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        venue: VenueArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose the rating scale that preserves the skill spread.
    ScaleSelect {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "davidson")]
        model: String,
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
        /// Comma-separated candidate scales, e.g. 100,200,300,400.
        #[arg(long)]
        candidates: String,
        #[arg(long)]
        no_shootout_rule: bool,
        #[arg(long)]
        no_knockout_rule: bool,
        #[arg(long)]
        seed_newcomers: bool,
    },
    /// Generate a seeded synthetic dataset from a ground-truth model.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        teams: usize,
        #[arg(long, default_value_t = 200)]
        games: usize,
        /// Generating model: davidson or skellam.
        #[arg(long, default_value = "davidson")]
        model: String,
        /// Generator parameters (e.g. kappa=0.8 eta=0.3 skill_stddev=200).
        #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
        params: Vec<String>,
    },
}

pub fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Validate { matches, out } => cmd_validate(&matches, out.as_deref()),
        Command::Replay {
            matches,
            initial,
            out,
            model,
            params,
            no_shootout_rule,
            no_knockout_rule,
            seed_newcomers,
            window,
            snapshot_date,
        } => cmd_replay(
            &matches,
            initial.as_deref(),
            &out,
            &model,
            &params,
            RuleToggles {
                shootout: !no_shootout_rule,
                knockout: !no_knockout_rule,
            },
            seed_newcomers,
            window,
            snapshot_date.as_deref(),
        ),
        Command::FitBatch {
            matches,
            out,
            model,
            params,
            tol,
            max_iter,
        } => cmd_fit_batch(&matches, &out, &model, &params, tol, max_iter),
        Command::Alo {
            matches,
            out,
            model,
            params,
            tol,
            max_iter,
        } => cmd_alo(&matches, &out, &model, &params, tol, max_iter),
        Command::Tune {
            matches,
            initial,
            out,
            config,
            objective,
            model,
            params,
            no_shootout_rule,
            no_knockout_rule,
            seed_newcomers,
            convergence_tol,
            max_sweeps,
        } => cmd_tune(TuneArgs {
            matches: &matches,
            initial: initial.as_deref(),
            out: &out,
            config: &config,
            objective,
            model: &model,
            params: &params,
            rules: RuleToggles {
                shootout: !no_shootout_rule,
                knockout: !no_knockout_rule,
            },
            seed_newcomers,
            convergence_tol,
            max_sweeps,
        }),
        Command::FreqEstimate {
            matches,
            venue,
            out,
        } => cmd_freq_estimate(&matches, venue, out.as_deref()),
        Command::ScaleSelect {
            matches,
            initial,
            out,
            model,
            params,
            candidates,
            no_shootout_rule,
            no_knockout_rule,
            seed_newcomers,
        } => cmd_scale_select(
            &matches,
            &initial,
            &out,
            &model,
            &params,
            &candidates,
            RuleToggles {
                shootout: !no_shootout_rule,
                knockout: !no_knockout_rule,
            },
            seed_newcomers,
        ),
        Command::Synth {
            out,
            seed,
            teams,
            games,
            model,
            params,
        } => cmd_synth(&out, seed, teams, games, &model, &params),
    }
}

fn load_matches(path: &Path) -> Result<(TeamRegistry, Vec<MatchRecord>)> {
    match_data::parse_matches(File::open(path)?)
}

/// Build the initial state over the registered teams. Without a file every
/// team starts at zero; with one, teams missing from the file are an error
/// unless `seed_newcomers` puts them at the file mean.
fn load_initial(
    registry: &TeamRegistry,
    path: Option<&Path>,
    seed_newcomers: bool,
) -> Result<(RatingState, Value)> {
    let Some(path) = path else {
        let state = RatingState::uniform(registry.len(), 0.0);
        return Ok((state, json!({"source": null, "default_rating": 0.0})));
    };
    let rows = match_data::parse_ratings(File::open(path)?)?;
    if rows.is_empty() {
        return Err(Error::EmptySelection(format!(
            "initial ratings file {} has no rows",
            path.display()
        )));
    }
    let mean = rows.iter().map(|(_, r)| r).sum::<f64>() / rows.len() as f64;

    let mut skills = BTreeMap::new();
    for (name, rating) in &rows {
        if let Some(id) = registry.id(name) {
            skills.insert(id, *rating);
        }
    }
    let missing: Vec<&str> = registry
        .ids()
        .filter(|id| !skills.contains_key(id))
        .map(|id| registry.name(id))
        .collect();
    let seeded = missing.len();
    if !missing.is_empty() {
        if !seed_newcomers {
            return Err(Error::UnknownTeam(format!(
                "{} team(s) missing from {} (first: {}); pass --seed-newcomers \
                 to start them at the file mean",
                missing.len(),
                path.display(),
                missing[0]
            )));
        }
        for id in registry.ids() {
            skills.entry(id).or_insert(mean);
        }
    }
    Ok((
        RatingState::new(skills),
        json!({
            "source": path.display().to_string(),
            "teams_in_file": rows.len(),
            "seeded_at_mean": seeded,
            "file_mean": mean,
        }),
    ))
}

/// Final ratings sorted by rating (descending), ties by name.
fn ranking_rows(registry: &TeamRegistry, state: &RatingState) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> = state
        .iter()
        .map(|(id, rating)| (registry.name(id).to_string(), rating))
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    rows
}

fn write_ranking(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    match_data::write_ratings(BufWriter::new(File::create(path)?), rows)
}

fn write_trajectory(path: &Path, registry: &TeamRegistry, run: &Replay) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for g in &run.games {
        for (team, before, after) in [
            (g.home, g.home_before, g.home_after),
            (g.away, g.away_before, g.away_after),
        ] {
            serde_json::to_writer(
                &mut w,
                &json!({
                    "match_index": g.match_index,
                    "team": registry.name(team),
                    "before": before,
                    "after": after,
                }),
            )?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_validate(matches_path: &Path, out: Option<&Path>) -> Result<()> {
    let audit = audit_matches(File::open(matches_path)?)?;
    for issue in &audit.issues {
        eprintln!("row {}: {}", issue.row, issue.message);
    }
    println!(
        "{} games, {} teams",
        audit.matches.len(),
        audit.registry.len()
    );

    if let Some(out) = out {
        let run = create_run_dir(
            out,
            "validate",
            json!({
                "matches": matches_path.display().to_string(),
            }),
        )?;
        run.write_json(
            "validation.json",
            &json!({
                "games": audit.matches.len(),
                "teams": audit.registry.len(),
                "issues": audit
                    .issues
                    .iter()
                    .map(|i| json!({"row": i.row, "message": i.message}))
                    .collect::<Vec<_>>(),
            }),
        )?;
    }

    if !audit.issues.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} invalid row(s) in {}",
            audit.issues.len(),
            matches_path.display()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_replay(
    matches_path: &Path,
    initial_path: Option<&Path>,
    out: &Path,
    model: &str,
    raw_params: &[String],
    rules: RuleToggles,
    seed_newcomers: bool,
    window: WindowArg,
    snapshot_date: Option<&str>,
) -> Result<()> {
    let (registry, matches) = load_matches(matches_path)?;
    let (initial, initial_echo) = load_initial(&registry, initial_path, seed_newcomers)?;
    let resolved = build_engine(model, parse_params(raw_params)?)?;
    let snapshot_date = snapshot_date
        .map(|raw| {
            chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|e| {
                Error::InvalidParameter(format!("bad --snapshot-date {raw:?}: {e}"))
            })
        })
        .transpose()?;

    let run_dir = create_run_dir(
        out,
        "replay",
        json!({
            "matches": matches_path.display().to_string(),
            "initial": initial_echo,
            "engine": resolved.echo,
            "rules": {"shootout": rules.shootout, "knockout": rules.knockout},
            "window": format!("{window:?}"),
            "snapshot_date": snapshot_date.map(|d| d.to_string()),
        }),
    )?;

    let result = replay(&matches, &initial, &resolved.engine, rules)?;
    let rows = ranking_rows(&registry, &result.final_state);
    write_ranking(&run_dir.file("ratings.csv"), &rows)?;
    write_trajectory(&run_dir.file("trajectory.jsonl"), &registry, &result)?;

    if let Some(date) = snapshot_date {
        // State after every game dated on or before the requested day,
        // rebuilt from the per-game deltas.
        let mut skills: BTreeMap<_, _> = initial.iter().collect();
        for (game, log) in matches.iter().zip(result.games.iter()) {
            if game.date > date {
                break;
            }
            skills.insert(log.home, log.home_after);
            skills.insert(log.away, log.away_after);
        }
        let snapshot = RatingState::new(skills);
        write_ranking(
            &run_dir.file("snapshot.csv"),
            &ranking_rows(&registry, &snapshot),
        )?;
    }

    let evaluation = if result.games.is_empty() {
        None
    } else {
        let window = match window {
            WindowArg::SecondHalf => window_second_half(result.games.len()),
            WindowArg::Full => GameWindow::full(result.games.len()),
        };
        Some(evaluate_replay(
            &result,
            window,
            resolved.wrapper,
            run_dir.manifest["config"]["engine"].clone(),
        )?)
    };

    run_dir.write_json(
        "report.json",
        &json!({
            "games": result.games.len(),
            "initial_total": result.initial_total,
            "final_total": result.final_state.total_points(),
            "inflation": result.inflation,
            "evaluation": evaluation,
        }),
    )?;

    println!(
        "replayed {} games through {}; inflation {:+.3} points",
        result.games.len(),
        resolved.engine.name(),
        result.inflation
    );
    if let Some(report) = &evaluation {
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.4}"),
            None => "n/a".to_string(),
        };
        println!(
            "window {}..{}: mse {}, log-score {}, accuracy {}",
            report.window_start,
            report.window_end,
            fmt(report.mse),
            fmt(report.log_score),
            fmt(report.accuracy)
        );
    }
    for (name, rating) in rows.iter().take(5) {
        println!("  {name} {rating:.1}");
    }
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}

fn cmd_fit_batch(
    matches_path: &Path,
    out: &Path,
    model: &str,
    raw_params: &[String],
    tol: f64,
    max_iter: usize,
) -> Result<()> {
    let (registry, matches) = load_matches(matches_path)?;
    let resolved = build_batch(model, parse_params(raw_params)?)?;
    let problem = BatchProblem::new(
        &matches,
        registry.len(),
        resolved.model,
        resolved.weights,
        resolved.alpha,
        resolved.scale,
    )?;

    let run_dir = create_run_dir(
        out,
        "fit-batch",
        json!({
            "matches": matches_path.display().to_string(),
            "problem": resolved.echo,
            "tol": tol,
            "max_iter": max_iter,
        }),
    )?;

    let solution = batch::solve(&problem, None, tol, max_iter)?;

    let rows: Vec<(String, f64)> = {
        let mut rows: Vec<(String, f64)> = registry
            .ids()
            .map(|id| (registry.name(id).to_string(), solution.theta[id.0]))
            .collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        rows
    };
    write_ranking(&run_dir.file("ratings.csv"), &rows)?;

    let mut log = BufWriter::new(File::create(run_dir.file("solver_log.jsonl"))?);
    for step in &solution.log {
        serde_json::to_writer(&mut log, step)?;
        log.write_all(b"\n")?;
    }
    log.flush()?;

    run_dir.write_json(
        "summary.json",
        &json!({
            "objective_value": solution.objective_value,
            "gradient_norm": solution.gradient_norm,
            "iterations": solution.iterations,
            "teams": registry.len(),
            "games": matches.len(),
        }),
    )?;

    println!(
        "fitted {} teams over {} games: objective {:.6}, gradient max-norm {:.3e}, {} iterations",
        registry.len(),
        matches.len(),
        solution.objective_value,
        solution.gradient_norm,
        solution.iterations
    );
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}

fn cmd_alo(
    matches_path: &Path,
    out: &Path,
    model: &str,
    raw_params: &[String],
    tol: f64,
    max_iter: usize,
) -> Result<()> {
    let (registry, matches) = load_matches(matches_path)?;
    let resolved = build_batch(model, parse_params(raw_params)?)?;
    let problem = BatchProblem::new(
        &matches,
        registry.len(),
        resolved.model,
        resolved.weights,
        resolved.alpha,
        resolved.scale,
    )?;

    let run_dir = create_run_dir(
        out,
        "alo",
        json!({
            "matches": matches_path.display().to_string(),
            "problem": resolved.echo,
            "tol": tol,
            "max_iter": max_iter,
        }),
    )?;

    let solution = batch::solve(&problem, None, tol, max_iter)?;
    let evaluation = alo::alo_scores(&problem, &solution, resolved.echo.clone())?;

    let mut w = BufWriter::new(File::create(run_dir.file("alo.csv"))?);
    writeln!(w, "t,z_full,z_loo,a_t,correction,metric_contribution")?;
    for (pred, contribution) in evaluation
        .predictions
        .iter()
        .zip(evaluation.contributions.iter())
    {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            pred.match_index, pred.z_full, pred.z_loo, pred.a, pred.correction, contribution
        )?;
    }
    w.flush()?;

    run_dir.write_json("report.json", &serde_json::to_value(&evaluation.report)?)?;

    println!(
        "leave-one-out over {} games: log-score {:.4}, accuracy {:.4}",
        evaluation.report.games_counted,
        evaluation.report.log_score.unwrap_or(f64::NAN),
        evaluation.report.accuracy.unwrap_or(f64::NAN)
    );
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}

struct TuneArgs<'a> {
    matches: &'a Path,
    initial: Option<&'a Path>,
    out: &'a Path,
    config: &'a Path,
    objective: TuneObjective,
    model: &'a str,
    params: &'a [String],
    rules: RuleToggles,
    seed_newcomers: bool,
    convergence_tol: f64,
    max_sweeps: usize,
}

/// Parse the tuning config: `{"k": 55, "eta": [0, 1, 0.05]}`. Parameters are
/// swept in name order.
fn parse_tune_config(path: &Path) -> Result<Vec<ParamSpec>> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = value else {
        return Err(Error::InvalidParameter(
            "tuning config must be a JSON object".into(),
        ));
    };
    let mut specs = Vec::new();
    for (name, entry) in map {
        match entry {
            Value::Number(n) => {
                specs.push(ParamSpec::fixed(name, n.as_f64().unwrap()));
            }
            Value::Array(items) if items.len() == 3 => {
                let nums: Vec<f64> = items
                    .iter()
                    .map(|v| v.as_f64())
                    .collect::<Option<_>>()
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("non-numeric bounds for {name}"))
                    })?;
                specs.push(ParamSpec::free(name, nums[0], nums[1], nums[2])?);
            }
            Value::Null => {
                let name_for_grid = name.clone();
                let (lower, upper, step) =
                    tuning::default_grid(&name_for_grid).ok_or_else(|| {
                        Error::InvalidParameter(format!("no default grid for {name_for_grid}"))
                    })?;
                specs.push(ParamSpec::free(name, lower, upper, step)?);
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "config entry for {name} must be a number, [lower, upper, step], \
                     or null for the default grid"
                )))
            }
        }
    }
    if specs.is_empty() {
        return Err(Error::InvalidParameter("tuning config is empty".into()));
    }
    Ok(specs)
}

fn cmd_tune(args: TuneArgs) -> Result<()> {
    let (registry, matches) = load_matches(args.matches)?;
    let (initial, initial_echo) = load_initial(&registry, args.initial, args.seed_newcomers)?;
    let base = parse_params(args.params)?;
    let specs = parse_tune_config(args.config)?;

    let run_dir = create_run_dir(
        args.out,
        "tune",
        json!({
            "matches": args.matches.display().to_string(),
            "initial": initial_echo,
            "model": args.model,
            "objective": format!("{:?}", args.objective),
            "base_params": base,
            "config": fs::read_to_string(args.config)?.trim(),
            "rules": {"shootout": args.rules.shootout, "knockout": args.rules.knockout},
            "convergence_tol": args.convergence_tol,
            "max_sweeps": args.max_sweeps,
        }),
    )?;

    let team_count = registry.len();
    let objective_fn = |tuned: &tuning::ParamSet| -> Result<f64> {
        let mut merged: ParamMap = base.clone();
        for (k, v) in tuned {
            merged.insert(k.clone(), *v);
        }
        match args.objective {
            TuneObjective::OnlineMse | TuneObjective::OnlineLogScore => {
                let resolved = build_engine(args.model, merged)?;
                let result = replay(&matches, &initial, &resolved.engine, args.rules)?;
                let report = evaluate_replay(
                    &result,
                    window_second_half(result.games.len()),
                    resolved.wrapper,
                    Value::Null,
                )?;
                let metric = match args.objective {
                    TuneObjective::OnlineMse => report.mse,
                    _ => report.log_score,
                };
                metric.ok_or_else(|| {
                    Error::InvalidParameter(
                        "the chosen objective is unavailable for this engine".into(),
                    )
                })
            }
            TuneObjective::AloLogScore => {
                let resolved = build_batch(args.model, merged)?;
                let problem = BatchProblem::new(
                    &matches,
                    team_count,
                    resolved.model,
                    resolved.weights,
                    resolved.alpha,
                    resolved.scale,
                )?;
                let solution =
                    batch::solve(&problem, None, batch::DEFAULT_TOL, batch::DEFAULT_MAX_ITER)?;
                let evaluation = alo::alo_scores(&problem, &solution, Value::Null)?;
                Ok(evaluation.report.log_score.unwrap_or(f64::INFINITY))
            }
        }
    };

    let result = coordinate_search(objective_fn, &specs, args.convergence_tol, args.max_sweeps)?;

    let mut trace = BufWriter::new(File::create(run_dir.file("trace.csv"))?);
    writeln!(trace, "sweep,param,value,objective")?;
    for entry in &result.trace {
        writeln!(
            trace,
            "{},{},{},{}",
            entry.sweep, entry.param, entry.value, entry.objective
        )?;
    }
    trace.flush()?;

    run_dir.write_json(
        "best.json",
        &json!({
            "params": result.best,
            "objective": result.best_objective,
            "objective_evaluations": result.evaluations,
            "sweeps": result.sweeps,
            "accepted_moves": result.trace.len(),
        }),
    )?;

    println!(
        "tuned {} parameter(s) in {} sweep(s), {} objective evaluations",
        specs
            .iter()
            .filter(|s| matches!(s.status, ParamStatus::Free { .. }))
            .count(),
        result.sweeps,
        result.evaluations
    );
    println!("best objective {:.6} at:", result.best_objective);
    for (name, value) in &result.best {
        println!("  {name} = {value}");
    }
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}

fn cmd_freq_estimate(matches_path: &Path, venue: VenueArg, out: Option<&Path>) -> Result<()> {
    let (_, matches) = load_matches(matches_path)?;
    let freq = outcome_frequencies(&matches, venue.filter())?;
    let estimates = tuning::empirical_eta_kappa(&freq);

    println!(
        "{} games ({} venues): f_H {:.4}, f_D {:.4}, f_A {:.4}",
        freq.games,
        venue.label(),
        freq.home,
        freq.draw,
        freq.away
    );
    let (eta, kappa) = match &estimates {
        Ok((eta, kappa)) => {
            println!("empirical eta {eta:.4}, kappa {kappa:.4}");
            (Some(*eta), Some(*kappa))
        }
        Err(e) => {
            println!("empirical eta/kappa unavailable: {e}");
            (None, None)
        }
    };

    if let Some(out) = out {
        let run_dir = create_run_dir(
            out,
            "freq-estimate",
            json!({
                "matches": matches_path.display().to_string(),
                "venue": venue.label(),
            }),
        )?;
        run_dir.write_json(
            "frequencies.json",
            &json!({
                "venue": venue.label(),
                "games": freq.games,
                "f_home": freq.home,
                "f_draw": freq.draw,
                "f_away": freq.away,
                "eta": eta,
                "kappa": kappa,
            }),
        )?;
        println!("outputs in {}", run_dir.path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scale_select(
    matches_path: &Path,
    initial_path: &Path,
    out: &Path,
    model: &str,
    raw_params: &[String],
    candidates: &str,
    rules: RuleToggles,
    seed_newcomers: bool,
) -> Result<()> {
    let (registry, matches) = load_matches(matches_path)?;
    let (initial, initial_echo) = load_initial(&registry, Some(initial_path), seed_newcomers)?;
    let resolved = build_engine(model, parse_params(raw_params)?)?;
    let scales: Vec<f64> = candidates
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad scale candidate {s:?}")))
        })
        .collect::<Result<_>>()?;

    let run_dir = create_run_dir(
        out,
        "scale-select",
        json!({
            "matches": matches_path.display().to_string(),
            "initial": initial_echo,
            "engine": resolved.echo,
            "candidates": scales,
            "rules": {"shootout": rules.shootout, "knockout": rules.knockout},
        }),
    )?;

    let selection = scale_selection(&matches, &initial, &resolved.engine, &scales, rules)?;

    let mut w = BufWriter::new(File::create(run_dir.file("scales.csv"))?);
    writeln!(w, "scale,final_stddev")?;
    for candidate in &selection.table {
        writeln!(w, "{},{}", candidate.scale, candidate.final_stddev)?;
    }
    w.flush()?;
    run_dir.write_json(
        "selection.json",
        &json!({
            "chosen": selection.chosen,
            "initial_stddev": selection.initial_stddev,
        }),
    )?;

    println!("initial skill stddev {:.2}", selection.initial_stddev);
    for candidate in &selection.table {
        let marker = if candidate.scale == selection.chosen {
            "  <- chosen"
        } else {
            ""
        };
        println!(
            "  s = {:>6}: sigma_T = {:.2}{marker}",
            candidate.scale, candidate.final_stddev
        );
    }
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}

fn cmd_synth(
    out: &Path,
    seed: u64,
    teams: usize,
    games: usize,
    model: &str,
    raw_params: &[String],
) -> Result<()> {
    let resolved = build_synth(model, seed, teams, games, parse_params(raw_params)?)?;
    let run_dir = create_run_dir(out, "synth", resolved.echo.clone())?;

    let data = synth::generate(&resolved.config)?;
    match_data::write_matches(
        BufWriter::new(File::create(run_dir.file("matches.csv"))?),
        &data.registry,
        &data.matches,
    )?;
    let rows: Vec<(String, f64)> = data
        .registry
        .ids()
        .map(|id| (data.registry.name(id).to_string(), data.true_skills[id.0]))
        .collect();
    match_data::write_ratings(
        BufWriter::new(File::create(run_dir.file("true_skills.csv"))?),
        &rows,
    )?;

    println!(
        "generated {} games among {} teams (seed {seed})",
        data.matches.len(),
        data.registry.len()
    );
    println!("outputs in {}", run_dir.path.display());
    Ok(())
}
