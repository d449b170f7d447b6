//! Match-result ingestion: CSV parsing, validation, canonical ordering, and
//! the derived per-game quantities (outcomes, subjective scores, margin-of-victory
//! categories, outcome frequencies).
//!
//! The CSV schema is
//! `date,home,away,home_goals,away_goals,category,home_venue,shootout_winner,knockout,two_legged`
//! with an ISO-8601 date, `home_venue` = 1 when the game was played in the home
//! team's country (0 on neutral venues), `shootout_winner` in {none,home,away},
//! and 0/1 flags for `knockout` and `two_legged`.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound used to catch column-swap mistakes; no real result exceeds it.
pub const MAX_GOALS: u32 = 99;

/// Number of game-importance categories (c in 0..=8).
pub const CATEGORY_COUNT: usize = 9;

pub const MATCH_CSV_HEADER: [&str; 10] = [
    "date",
    "home",
    "away",
    "home_goals",
    "away_goals",
    "category",
    "home_venue",
    "shootout_winner",
    "knockout",
    "two_legged",
];

/// Dense team identifier: an index into the [`TeamRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TeamId(pub usize);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between team names and dense ids.
#[derive(Debug, Clone, Default)]
pub struct TeamRegistry {
    names: Vec<String>,
    by_key: HashMap<String, TeamId>,
}

impl TeamRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a team name, returning its id. Re-registering the identical
    /// name returns the existing id; a name that differs from a registered one
    /// only by surrounding whitespace is rejected as a likely data error.
    pub fn register(&mut self, raw: &str) -> Result<TeamId> {
        let key = raw.trim();
        if key.is_empty() {
            return Err(Error::InvalidParameter("empty team name".into()));
        }
        if let Some(&id) = self.by_key.get(key) {
            if self.names[id.0] != raw {
                return Err(Error::InvalidParameter(format!(
                    "duplicate team names differing only by whitespace: {:?} vs {:?}",
                    self.names[id.0], raw
                )));
            }
            return Ok(id);
        }
        let id = TeamId(self.names.len());
        self.names.push(raw.to_string());
        self.by_key.insert(key.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<TeamId> {
        self.by_key.get(name.trim()).copied()
    }

    pub fn name(&self, id: TeamId) -> &str {
        &self.names[id.0]
    }

    /// Number of distinct registered teams (M).
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TeamId> {
        (0..self.names.len()).map(TeamId)
    }
}

/// Regulation game result from the home team's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Home,
    Draw,
    Away,
}

impl Outcome {
    /// Numeric score mapping: away 0, draw 0.5, home win 1.
    pub fn score(self) -> f64 {
        match self {
            Outcome::Home => 1.0,
            Outcome::Draw => 0.5,
            Outcome::Away => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Home => "H",
            Outcome::Draw => "D",
            Outcome::Away => "A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShootoutWinner {
    None,
    Home,
    Away,
}

impl ShootoutWinner {
    pub fn label(self) -> &'static str {
        match self {
            ShootoutWinner::None => "none",
            ShootoutWinner::Home => "home",
            ShootoutWinner::Away => "away",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Home,
    Away,
}

/// One validated game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    /// Position t in chronological order, 1-based.
    pub match_index: usize,
    pub date: NaiveDate,
    pub home: TeamId,
    pub away: TeamId,
    pub home_goals: u32,
    pub away_goals: u32,
    /// Game-importance category c in 0..=8.
    pub category: u8,
    /// True when the game was played in the home team's country (b = 1).
    pub home_venue: bool,
    pub shootout_winner: ShootoutWinner,
    pub knockout: bool,
    /// Suppresses the shootout score substitution in two-legged qualifiers.
    pub two_legged: bool,
}

impl MatchRecord {
    pub fn outcome(&self) -> Outcome {
        if self.home_goals > self.away_goals {
            Outcome::Home
        } else if self.home_goals == self.away_goals {
            Outcome::Draw
        } else {
            Outcome::Away
        }
    }

    /// Goal difference d = home goals - away goals.
    pub fn goal_diff(&self) -> i64 {
        self.home_goals as i64 - self.away_goals as i64
    }

    /// Venue indicator b: 1.0 in the home team's country, 0.0 on neutral ground.
    pub fn venue_indicator(&self) -> f64 {
        if self.home_venue {
            1.0
        } else {
            0.0
        }
    }

    /// Whether the shootout score substitution applies to this game.
    pub fn shootout_substituted(&self) -> bool {
        self.shootout_winner != ShootoutWinner::None && !self.two_legged
    }

    /// Per-team subjective score y̌: the home side gets the game score
    /// and the away side its complement. A shootout (outside two-legged ties)
    /// substitutes 0.75 for the winner and 0.5 for the loser.
    pub fn subjective_score(&self, side: Side) -> f64 {
        if self.shootout_substituted() {
            let winner = match self.shootout_winner {
                ShootoutWinner::Home => Side::Home,
                ShootoutWinner::Away => Side::Away,
                ShootoutWinner::None => unreachable!(),
            };
            return if side == winner { 0.75 } else { 0.5 };
        }
        match side {
            Side::Home => self.outcome().score(),
            Side::Away => 1.0 - self.outcome().score(),
        }
    }
}

/// Margin-of-victory category: v = |d| capped at V.
pub fn mov_category(goal_diff: i64, cap: usize) -> usize {
    (goal_diff.unsigned_abs() as usize).min(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VenueFilter {
    All,
    NeutralOnly,
    HomeVenueOnly,
}

impl VenueFilter {
    fn admits(self, m: &MatchRecord) -> bool {
        match self {
            VenueFilter::All => true,
            VenueFilter::NeutralOnly => !m.home_venue,
            VenueFilter::HomeVenueOnly => m.home_venue,
        }
    }
}

/// Empirical outcome frequencies over a (possibly venue-filtered) set of games.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OutcomeFrequencies {
    pub home: f64,
    pub draw: f64,
    pub away: f64,
    pub games: usize,
}

pub fn outcome_frequencies(
    matches: &[MatchRecord],
    filter: VenueFilter,
) -> Result<OutcomeFrequencies> {
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for m in matches.iter().filter(|m| filter.admits(m)) {
        let slot = match m.outcome() {
            Outcome::Home => 0,
            Outcome::Draw => 1,
            Outcome::Away => 2,
        };
        counts[slot] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptySelection(
            "no games match the venue filter".into(),
        ));
    }
    let t = total as f64;
    Ok(OutcomeFrequencies {
        home: counts[0] as f64 / t,
        draw: counts[1] as f64 / t,
        away: counts[2] as f64 / t,
        games: total,
    })
}

/// Histogram of absolute goal differences, bucketed 0,1,2,3,4,5,>=6.
pub fn mov_histogram(matches: &[MatchRecord]) -> [u64; 7] {
    let mut buckets = [0u64; 7];
    for m in matches {
        let d = m.goal_diff().unsigned_abs() as usize;
        buckets[d.min(6)] += 1;
    }
    buckets
}

/// One malformed-row diagnostic from [`audit_matches`].
#[derive(Debug, Clone)]
pub struct RowIssue {
    /// 1-based file row (the header is row 1).
    pub row: usize,
    pub message: String,
}

/// Full-file validation report.
#[derive(Debug)]
pub struct MatchAudit {
    pub registry: TeamRegistry,
    pub matches: Vec<MatchRecord>,
    pub issues: Vec<RowIssue>,
}

fn check_header(rec: &csv::StringRecord) -> Result<()> {
    let got: Vec<&str> = rec.iter().map(str::trim).collect();
    if got != MATCH_CSV_HEADER {
        return Err(Error::Parse {
            row: 1,
            message: format!(
                "bad header: expected {:?}, got {:?}",
                MATCH_CSV_HEADER.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn field(rec: &csv::StringRecord, idx: usize, row: usize) -> Result<&str> {
    rec.get(idx).ok_or_else(|| Error::Parse {
        row,
        message: format!("missing column {}", MATCH_CSV_HEADER[idx]),
    })
}

fn parse_flag(raw: &str, column: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            row,
            message: format!("{column} must be 0 or 1, got {other:?}"),
        }),
    }
}

fn parse_goals(raw: &str, column: &str, row: usize) -> Result<u32> {
    let goals: u32 = raw.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("invalid {column}: {raw:?} (expected a non-negative integer)"),
    })?;
    if goals > MAX_GOALS {
        return Err(Error::Parse {
            row,
            message: format!("{column} {goals} exceeds {MAX_GOALS}"),
        });
    }
    Ok(goals)
}

fn parse_row(
    registry: &mut TeamRegistry,
    rec: &csv::StringRecord,
    row: usize,
) -> Result<MatchRecord> {
    if rec.len() != MATCH_CSV_HEADER.len() {
        return Err(Error::Parse {
            row,
            message: format!(
                "expected {} columns, got {}",
                MATCH_CSV_HEADER.len(),
                rec.len()
            ),
        });
    }

    let date = NaiveDate::parse_from_str(field(rec, 0, row)?.trim(), "%Y-%m-%d").map_err(|e| {
        Error::Parse {
            row,
            message: format!("invalid date: {e}"),
        }
    })?;

    let home = registry
        .register(field(rec, 1, row)?)
        .map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
    let away = registry
        .register(field(rec, 2, row)?)
        .map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
    if home == away {
        return Err(Error::Parse {
            row,
            message: "home and away teams are identical".into(),
        });
    }

    let home_goals = parse_goals(field(rec, 3, row)?, "home_goals", row)?;
    let away_goals = parse_goals(field(rec, 4, row)?, "away_goals", row)?;

    let category: u8 = field(rec, 5, row)?.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("invalid category: {:?}", rec.get(5).unwrap_or("")),
    })?;
    if category as usize >= CATEGORY_COUNT {
        return Err(Error::Parse {
            row,
            message: format!("category out of range: {category} (must be 0..=8)"),
        });
    }

    let home_venue = parse_flag(field(rec, 6, row)?, "home_venue", row)?;

    let shootout_winner = match field(rec, 7, row)?.trim() {
        "none" => ShootoutWinner::None,
        "home" => ShootoutWinner::Home,
        "away" => ShootoutWinner::Away,
        other => {
            return Err(Error::Parse {
                row,
                message: format!("shootout_winner must be none/home/away, got {other:?}"),
            })
        }
    };
    if shootout_winner != ShootoutWinner::None && home_goals != away_goals {
        return Err(Error::Parse {
            row,
            message: "shootout flag on a non-drawn game".into(),
        });
    }

    let knockout = parse_flag(field(rec, 8, row)?, "knockout", row)?;
    let two_legged = parse_flag(field(rec, 9, row)?, "two_legged", row)?;

    Ok(MatchRecord {
        match_index: 0, // assigned after chronological ordering
        date,
        home,
        away,
        home_goals,
        away_goals,
        category,
        home_venue,
        shootout_winner,
        knockout,
        two_legged,
    })
}

fn finalize(mut matches: Vec<MatchRecord>) -> Vec<MatchRecord> {
    // Stable sort: date ties keep file order, which then defines match_index.
    matches.sort_by_key(|m| m.date);
    for (i, m) in matches.iter_mut().enumerate() {
        m.match_index = i + 1;
    }
    matches
}

/// Parse a match CSV, failing on the first malformed row.
pub fn parse_matches<R: Read>(reader: R) -> Result<(TeamRegistry, Vec<MatchRecord>)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    check_header(csv_reader.headers()?)?;

    let mut registry = TeamRegistry::new();
    let mut matches = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        matches.push(parse_row(&mut registry, &rec, row)?);
    }
    Ok((registry, finalize(matches)))
}

/// Parse a match CSV collecting every malformed row instead of stopping at the
/// first; the returned matches cover the valid rows only.
pub fn audit_matches<R: Read>(reader: R) -> Result<MatchAudit> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    check_header(csv_reader.headers()?)?;

    let mut registry = TeamRegistry::new();
    let mut matches = Vec::new();
    let mut issues = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        match parse_row(&mut registry, &rec, row) {
            Ok(m) => matches.push(m),
            Err(Error::Parse { row, message }) => issues.push(RowIssue { row, message }),
            Err(other) => return Err(other),
        }
    }
    Ok(MatchAudit {
        registry,
        matches: finalize(matches),
        issues,
    })
}

/// Write matches in the canonical CSV schema; `parse_matches` of the output
/// reproduces the records exactly.
pub fn write_matches<W: Write>(
    writer: W,
    registry: &TeamRegistry,
    matches: &[MatchRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MATCH_CSV_HEADER)?;
    for m in matches {
        w.write_record([
            m.date.format("%Y-%m-%d").to_string().as_str(),
            registry.name(m.home),
            registry.name(m.away),
            &m.home_goals.to_string(),
            &m.away_goals.to_string(),
            &m.category.to_string(),
            if m.home_venue { "1" } else { "0" },
            m.shootout_winner.label(),
            if m.knockout { "1" } else { "0" },
            if m.two_legged { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parse an initial-ratings CSV with header `team,rating`. Each team may
/// appear once.
pub fn parse_ratings<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<&str> = csv_reader.headers()?.iter().map(str::trim).collect();
    if headers != ["team", "rating"] {
        return Err(Error::Parse {
            row: 1,
            message: format!("bad header: expected \"team,rating\", got {:?}", headers.join(",")),
        });
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let team = rec
            .get(0)
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::Parse {
                row,
                message: "missing team name".into(),
            })?;
        if !seen.insert(team.to_string()) {
            return Err(Error::Parse {
                row,
                message: format!("team {team:?} listed more than once"),
            });
        }
        let rating: f64 = rec
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Parse {
                row,
                message: format!("invalid rating: {:?}", rec.get(1).unwrap_or("")),
            })?;
        if !rating.is_finite() {
            return Err(Error::Parse {
                row,
                message: "rating must be finite".into(),
            });
        }
        out.push((team.to_string(), rating));
    }
    Ok(out)
}

/// Write a `team,rating` CSV.
pub fn write_ratings<W: Write>(writer: W, rows: &[(String, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["team", "rating"])?;
    for (team, rating) in rows {
        w.write_record([team.as_str(), &format!("{rating}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str =
        "date,home,away,home_goals,away_goals,category,home_venue,shootout_winner,knockout,two_legged\n";

    fn parse_str(body: &str) -> Result<(TeamRegistry, Vec<MatchRecord>)> {
        parse_matches(format!("{HEADER}{body}").as_bytes())
    }

    fn game(home_goals: u32, away_goals: u32) -> MatchRecord {
        MatchRecord {
            match_index: 1,
            date: NaiveDate::from_ymd_opt(2018, 6, 4).unwrap(),
            home: TeamId(0),
            away: TeamId(1),
            home_goals,
            away_goals,
            category: 0,
            home_venue: false,
            shootout_winner: ShootoutWinner::None,
            knockout: false,
            two_legged: false,
        }
    }

    #[test]
    fn parses_single_row() {
        let (registry, matches) =
            parse_str("2018-06-04,BEL,FRA,1,0,4,1,none,0,0\n").unwrap();
        assert_eq!(registry.len(), 2);
        assert_eq!(matches.len(), 1);
        let m = &matches[0];
        assert_eq!(m.match_index, 1);
        assert_eq!(registry.name(m.home), "BEL");
        assert_eq!(registry.name(m.away), "FRA");
        assert_eq!(m.outcome(), Outcome::Home);
        assert_eq!(m.category, 4);
        assert!(m.home_venue);
    }

    #[test]
    fn rejects_category_out_of_range() {
        let err = parse_str("2018-06-04,BEL,FRA,1,0,9,1,none,0,0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("category out of range"), "{msg}");
        assert!(msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn rejects_negative_goals() {
        let err = parse_str("2018-06-04,BEL,FRA,-1,0,4,1,none,0,0\n").unwrap_err();
        assert!(err.to_string().contains("invalid home_goals"));
    }

    #[test]
    fn rejects_absurd_goals() {
        let err = parse_str("2018-06-04,BEL,FRA,100,0,4,1,none,0,0\n").unwrap_err();
        assert!(err.to_string().contains("exceeds 99"));
    }

    #[test]
    fn accepts_shootout_on_draw() {
        let (_, matches) = parse_str("2018-07-06,RUS,CRO,2,2,7,0,home,1,0\n").unwrap();
        assert_eq!(matches[0].outcome(), Outcome::Draw);
        assert_eq!(matches[0].shootout_winner, ShootoutWinner::Home);
    }

    #[test]
    fn rejects_shootout_on_decided_game() {
        let err = parse_str("2018-07-06,RUS,CRO,2,1,7,0,home,1,0\n").unwrap_err();
        assert!(err.to_string().contains("shootout flag on a non-drawn game"));
    }

    #[test]
    fn rejects_same_team_twice() {
        let err = parse_str("2018-06-04,BEL,BEL,1,0,4,1,none,0,0\n").unwrap_err();
        assert!(err.to_string().contains("identical"));
    }

    #[test]
    fn rejects_whitespace_duplicate_names() {
        let err = parse_str(
            "2018-06-04,BEL,FRA,1,0,4,1,none,0,0\n2018-06-05,BEL ,GER,1,0,4,1,none,0,0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("whitespace"));
    }

    #[test]
    fn sorts_by_date_then_file_order() {
        let (_, matches) = parse_str(
            "2018-06-05,AAA,BBB,1,0,0,0,none,0,0\n\
             2018-06-04,CCC,DDD,0,1,0,0,none,0,0\n\
             2018-06-05,EEE,FFF,2,2,0,0,none,0,0\n",
        )
        .unwrap();
        let indices: Vec<usize> = matches.iter().map(|m| m.match_index).collect();
        assert_eq!(indices, vec![1, 2, 3]);
        assert_eq!(matches[0].date, NaiveDate::from_ymd_opt(2018, 6, 4).unwrap());
        // date tie broken by file order: AAA/BBB precedes EEE/FFF
        assert_eq!(matches[1].home, TeamId(0));
        assert_eq!(matches[2].home, TeamId(4));
    }

    #[test]
    fn audit_collects_all_issues() {
        let audit = audit_matches(
            format!(
                "{HEADER}2018-06-04,BEL,FRA,1,0,9,1,none,0,0\n\
                 2018-06-05,GER,ESP,2,0,4,1,none,0,0\n\
                 2018-06-06,ITA,POR,3,x,4,1,none,0,0\n"
            )
            .as_bytes(),
        )
        .unwrap();
        assert_eq!(audit.matches.len(), 1);
        assert_eq!(audit.issues.len(), 2);
        assert_eq!(audit.issues[0].row, 2);
        assert_eq!(audit.issues[1].row, 4);
    }

    #[test]
    fn empty_file_parses_to_zero_games() {
        let (registry, matches) = parse_str("").unwrap();
        assert_eq!(registry.len(), 0);
        assert!(matches.is_empty());
    }

    #[test]
    fn outcome_mapping() {
        assert_eq!(game(3, 1).outcome(), Outcome::Home);
        assert_eq!(game(2, 2).outcome(), Outcome::Draw);
        assert_eq!(game(0, 4).outcome(), Outcome::Away);
        assert_eq!(Outcome::Home.score(), 1.0);
        assert_eq!(Outcome::Draw.score(), 0.5);
        assert_eq!(Outcome::Away.score(), 0.0);
    }

    #[test]
    fn subjective_score_shootout_substitution() {
        let mut m = game(2, 2);
        m.shootout_winner = ShootoutWinner::Home;
        assert_eq!(m.subjective_score(Side::Home), 0.75);
        assert_eq!(m.subjective_score(Side::Away), 0.5);

        m.two_legged = true;
        assert_eq!(m.subjective_score(Side::Home), 0.5);
        assert_eq!(m.subjective_score(Side::Away), 0.5);

        let win = game(1, 0);
        assert_eq!(win.subjective_score(Side::Home), 1.0);
        assert_eq!(win.subjective_score(Side::Away), 0.0);
    }

    #[test]
    fn ratings_csv_rejects_duplicates() {
        let parsed = parse_ratings("team,rating\nBEL,1800\nFRA,1750\n".as_bytes()).unwrap();
        assert_eq!(parsed.len(), 2);
        let err =
            parse_ratings("team,rating\nBEL,1800\nBEL,1700\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("more than once"));
        assert!(parse_ratings("team,rating\nBEL,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn mov_category_formula() {
        assert_eq!(mov_category(0, 2), 0);
        assert_eq!(mov_category(-1, 2), 1);
        assert_eq!(mov_category(5, 2), 2);
    }

    #[test]
    fn frequencies_count_outcomes() {
        let matches = vec![game(1, 0), game(2, 0), game(1, 1), game(0, 3)];
        let f = outcome_frequencies(&matches, VenueFilter::All).unwrap();
        assert_eq!(f.home, 0.5);
        assert_eq!(f.draw, 0.25);
        assert_eq!(f.away, 0.25);
        assert_eq!(f.games, 4);
        assert!((f.home + f.draw + f.away - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frequencies_empty_filter_errors() {
        let mut m = game(1, 0);
        m.home_venue = true;
        assert!(outcome_frequencies(&[m], VenueFilter::NeutralOnly).is_err());
        assert!(outcome_frequencies(&[], VenueFilter::All).is_err());
    }

    #[test]
    fn histogram_buckets() {
        assert_eq!(mov_histogram(&[]), [0; 7]);
        assert_eq!(mov_histogram(&[game(8, 0)]), [0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(
            mov_histogram(&[game(1, 1), game(2, 0), game(0, 2)]),
            [1, 0, 2, 0, 0, 0, 0]
        );
    }

    proptest! {
        #[test]
        fn mirror_scores_sum_to_one(hg in 0u32..10, ag in 0u32..10) {
            let m = game(hg, ag);
            let mirrored = game(ag, hg);
            prop_assert!((m.outcome().score() + mirrored.outcome().score() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn mov_category_symmetric_and_capped(d in -20i64..=20, cap in 1usize..=8) {
            prop_assert_eq!(mov_category(d, cap), mov_category(-d, cap));
            prop_assert!(mov_category(d, cap) <= cap);
        }

        #[test]
        fn csv_round_trip_is_identity(
            games in proptest::collection::vec(
                (0u32..6, 0u32..6, 0u8..=8, any::<bool>(), any::<bool>(), 0u32..500),
                0..20,
            )
        ) {
            let mut registry = TeamRegistry::new();
            let base = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
            let mut matches = Vec::new();
            for (i, (hg, ag, cat, venue, knockout, day)) in games.iter().enumerate() {
                let home = registry.register(&format!("T{:02}", 2 * i)).unwrap();
                let away = registry.register(&format!("T{:02}", 2 * i + 1)).unwrap();
                let shootout = if hg == ag && *knockout {
                    ShootoutWinner::Home
                } else {
                    ShootoutWinner::None
                };
                matches.push(MatchRecord {
                    match_index: 0,
                    date: base + chrono::Days::new(*day as u64),
                    home,
                    away,
                    home_goals: *hg,
                    away_goals: *ag,
                    category: *cat,
                    home_venue: *venue,
                    shootout_winner: shootout,
                    knockout: *knockout,
                    two_legged: false,
                });
            }
            let matches = super::finalize(matches);

            let mut buf = Vec::new();
            write_matches(&mut buf, &registry, &matches).unwrap();
            let (registry2, reparsed) = parse_matches(buf.as_slice()).unwrap();
            prop_assert_eq!(registry2.len(), registry.len());

            // Ids are reassigned by first appearance in chronological order,
            // so compare records through their team names.
            let resolve = |reg: &TeamRegistry, ms: &[MatchRecord]| -> Vec<(String, String, MatchRecord)> {
                ms.iter()
                    .map(|m| (reg.name(m.home).to_string(), reg.name(m.away).to_string(), m.clone()))
                    .collect()
            };
            for ((hn, an, orig), (hn2, an2, back)) in
                resolve(&registry, &matches).iter().zip(resolve(&registry2, &reparsed).iter())
            {
                prop_assert_eq!(hn, hn2);
                prop_assert_eq!(an, an2);
                prop_assert_eq!(orig.match_index, back.match_index);
                prop_assert_eq!(orig.date, back.date);
                prop_assert_eq!(orig.home_goals, back.home_goals);
                prop_assert_eq!(orig.away_goals, back.away_goals);
                prop_assert_eq!(orig.category, back.category);
                prop_assert_eq!(orig.home_venue, back.home_venue);
                prop_assert_eq!(orig.shootout_winner, back.shootout_winner);
                prop_assert_eq!(orig.knockout, back.knockout);
                prop_assert_eq!(orig.two_legged, back.two_legged);
            }

            // Serialize -> parse -> serialize is a fixed point.
            let mut buf2 = Vec::new();
            write_matches(&mut buf2, &registry2, &reparsed).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
