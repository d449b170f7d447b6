//! Seeded synthetic match generator: ground-truth skills with outcomes
//! sampled from a chosen model, the desk-scale stand-in for real data.

use chrono::{Days, NaiveDate};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::match_data::{MatchRecord, ShootoutWinner, TeamId, TeamRegistry};
use crate::models::{davidson, DavidsonParams, OutcomeProbs, SkellamParams};

/// Observed share of each game category in international play, used to give
/// synthetic fixtures a realistic importance mix.
const CATEGORY_WEIGHTS: [f64; 9] = [436.0, 583.0, 347.0, 84.0, 1189.0, 209.0, 52.0, 56.0, 8.0];

#[derive(Debug, Clone)]
pub enum GenModel {
    Davidson(DavidsonParams),
    Skellam(SkellamParams),
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub teams: usize,
    pub games: usize,
    pub model: GenModel,
    /// Spread of the ground-truth skills, in rating units.
    pub skill_stddev: f64,
    /// Probability that a game is played in the home team's country.
    pub home_venue_prob: f64,
    /// Probability that a game is flagged as knockout stage.
    pub knockout_prob: f64,
    /// Probability that a drawn game goes to a shootout.
    pub shootout_prob: f64,
    pub start_date: NaiveDate,
}

impl SynthConfig {
    pub fn new(seed: u64, teams: usize, games: usize, model: GenModel) -> Self {
        Self {
            seed,
            teams,
            games,
            model,
            skill_stddev: 200.0,
            home_venue_prob: 0.74,
            knockout_prob: 0.0,
            shootout_prob: 0.0,
            start_date: NaiveDate::from_ymd_opt(2018, 6, 4).unwrap(),
        }
    }
}

#[derive(Debug)]
pub struct SynthData {
    pub registry: TeamRegistry,
    pub matches: Vec<MatchRecord>,
    /// Ground-truth skill per team id.
    pub true_skills: Vec<f64>,
}

fn sample_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; good enough for skill seeding and fully deterministic.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn sample_poisson(rng: &mut ChaCha12Rng, mean: f64) -> u32 {
    // Knuth's product method; intensities here are small.
    let cutoff = (-mean).exp();
    let mut count = 0u32;
    let mut product: f64 = rng.random_range(0.0..1.0);
    while product > cutoff && count < 99 {
        count += 1;
        product *= rng.random_range(0.0..1.0f64);
    }
    count
}

fn sample_category(rng: &mut ChaCha12Rng) -> u8 {
    let total: f64 = CATEGORY_WEIGHTS.iter().sum();
    let mut draw = rng.random_range(0.0..total);
    for (c, w) in CATEGORY_WEIGHTS.iter().enumerate() {
        if draw < *w {
            return c as u8;
        }
        draw -= w;
    }
    8
}

fn sample_outcome(rng: &mut ChaCha12Rng, probs: &OutcomeProbs) -> (u32, u32) {
    let u: f64 = rng.random_range(0.0..1.0);
    let loser_goals = [0, 0, 1, 1, 2][rng.random_range(0..5usize)];
    let margin = [1, 1, 1, 2, 2, 3][rng.random_range(0..6usize)];
    if u < probs.home {
        (loser_goals + margin, loser_goals)
    } else if u < probs.home + probs.draw {
        let k = rng.random_range(0..3u32);
        (k, k)
    } else {
        (loser_goals, loser_goals + margin)
    }
}

/// Generate a deterministic synthetic dataset. The same config always yields
/// identical data.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    if config.teams < 2 {
        return Err(Error::InvalidParameter(
            "need at least two teams".to_string(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut registry = TeamRegistry::new();
    let width = config.teams.to_string().len().max(2);
    for i in 1..=config.teams {
        registry.register(&format!("T{i:0width$}"))?;
    }

    let true_skills: Vec<f64> = (0..config.teams)
        .map(|_| config.skill_stddev * sample_normal(&mut rng))
        .collect();

    let mut matches = Vec::with_capacity(config.games);
    for idx in 1..=config.games {
        let home = rng.random_range(0..config.teams);
        let mut away = rng.random_range(0..config.teams - 1);
        if away >= home {
            away += 1;
        }
        let home_venue = rng.random_range(0.0..1.0) < config.home_venue_prob;
        let z = true_skills[home] - true_skills[away];

        let (home_goals, away_goals) = match &config.model {
            GenModel::Davidson(p) => {
                let probs = davidson::outcome_probs(z / p.scale, home_venue, p);
                sample_outcome(&mut rng, &probs)
            }
            GenModel::Skellam(p) => {
                let w = z / p.scale + if home_venue { p.eta } else { 0.0 };
                if w.abs() > 10.0 {
                    return Err(Error::IntensityOverflow(w.abs()));
                }
                let mu_h = (p.c + w).exp();
                let mu_a = (p.c - w).exp();
                (
                    sample_poisson(&mut rng, mu_h),
                    sample_poisson(&mut rng, mu_a),
                )
            }
        };

        let knockout = rng.random_range(0.0..1.0) < config.knockout_prob;
        let shootout_winner = if home_goals == away_goals
            && knockout
            && rng.random_range(0.0..1.0) < config.shootout_prob
        {
            if rng.random_range(0.0..1.0) < 0.5 {
                ShootoutWinner::Home
            } else {
                ShootoutWinner::Away
            }
        } else {
            ShootoutWinner::None
        };

        matches.push(MatchRecord {
            match_index: idx,
            date: config.start_date + Days::new((idx as u64 - 1) / 3),
            home: TeamId(home),
            away: TeamId(away),
            home_goals,
            away_goals,
            category: sample_category(&mut rng),
            home_venue,
            shootout_winner,
            knockout,
            two_legged: false,
        });
    }

    Ok(SynthData {
        registry,
        matches,
        true_skills,
    })
}
