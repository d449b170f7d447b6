//! Resolution of `key=value` parameter maps into fully-specified engines,
//! batch problems, and generator configs, with per-model defaults and strict
//! unknown-key rejection. This is the single place where model defaults live;
//! the CLI and the Python bindings both build on it.

use std::collections::BTreeMap;

use serde_json::json;

use crate::batch::LossModel;
use crate::error::{Error, Result};
use crate::match_data::CATEGORY_COUNT;
use crate::models::{DavidsonParams, SkellamParams};
use crate::online::{Engine, ImportanceTable, WeightScheme};
use crate::synth::{GenModel, SynthConfig};

/// The published FIFA category weights xi_c = I_c / I_0.
pub const FIFA_XI: [f64; CATEGORY_COUNT] = [1.0, 2.0, 3.0, 5.0, 5.0, 7.0, 8.0, 10.0, 12.0];

pub type ParamMap = BTreeMap<String, f64>;

/// Parse repeated `key=value` arguments; `s` is accepted as an alias for
/// `scale`.
pub fn parse_params(raw: &[String]) -> Result<ParamMap> {
    let mut out = ParamMap::new();
    for item in raw {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("expected key=value, got {item:?}"))
        })?;
        let key = match key.trim() {
            "s" => "scale",
            other => other,
        };
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("invalid numeric value in {item:?}"))
        })?;
        if out.insert(key.to_string(), value).is_some() {
            return Err(Error::InvalidParameter(format!(
                "parameter {key} given more than once"
            )));
        }
    }
    Ok(out)
}

/// Consume one key, or fall back to its default.
fn take(params: &mut ParamMap, key: &str, default: f64) -> f64 {
    params.remove(key).unwrap_or(default)
}

fn reject_leftovers(params: &ParamMap, context: &str) -> Result<()> {
    if let Some(key) = params.keys().next() {
        return Err(Error::InvalidParameter(format!(
            "unknown parameter {key:?} for {context}"
        )));
    }
    Ok(())
}

/// Pull xi_1..xi_8 overrides out of the map, on top of the given defaults.
fn take_xi(params: &mut ParamMap, defaults: [f64; CATEGORY_COUNT]) -> [f64; CATEGORY_COUNT] {
    let mut xi = defaults;
    for (c, slot) in xi.iter_mut().enumerate().skip(1) {
        if let Some(v) = params.remove(&format!("xi_{c}")) {
            *slot = v;
        }
    }
    xi
}

/// Pull zeta_1..zeta_V out of the map; V is the largest index mentioned and
/// gaps default to 1.
fn take_zeta(params: &mut ParamMap) -> Result<Vec<f64>> {
    let indices: Vec<usize> = params
        .keys()
        .filter_map(|k| k.strip_prefix("zeta_").and_then(|i| i.parse().ok()))
        .collect();
    let cap = indices.iter().copied().max().unwrap_or(0);
    if indices.contains(&0) {
        return Err(Error::InvalidParameter("zeta_0 is pinned at 1".into()));
    }
    let mut zeta = vec![1.0; cap + 1];
    for (v, slot) in zeta.iter_mut().enumerate().skip(1) {
        if let Some(value) = params.remove(&format!("zeta_{v}")) {
            *slot = value;
        }
    }
    Ok(zeta)
}

/// A resolved online engine plus its echo for the manifest and the Davidson
/// wrapper used to score the FIFA replica.
pub struct ResolvedEngine {
    pub engine: Engine,
    pub wrapper: Option<DavidsonParams>,
    pub echo: serde_json::Value,
}

pub fn build_engine(model: &str, mut params: ParamMap) -> Result<ResolvedEngine> {
    match model {
        "fifa" => {
            let k = take(&mut params, "k", 5.0);
            let scale = take(&mut params, "scale", 600.0);
            let xi = take_xi(&mut params, FIFA_XI);
            let wrap_kappa = take(&mut params, "wrap_kappa", 2.0);
            let wrap_eta = take(&mut params, "wrap_eta", 0.0);
            reject_leftovers(&params, "the fifa engine")?;
            let table = ImportanceTable::from_step_and_weights(k, &xi)?;
            let wrapper = DavidsonParams::new(wrap_eta, wrap_kappa, scale)?;
            Ok(ResolvedEngine {
                engine: Engine::Fifa { table, scale },
                wrapper: Some(wrapper),
                echo: json!({
                    "model": "fifa",
                    "k": k,
                    "scale": scale,
                    "xi": xi.to_vec(),
                    "wrap_kappa": wrap_kappa,
                    "wrap_eta": wrap_eta,
                }),
            })
        }
        "davidson" => {
            let k = take(&mut params, "k", 35.0);
            let eta = take(&mut params, "eta", 0.0);
            let kappa = take(&mut params, "kappa", 2.0);
            let scale = take(&mut params, "scale", 200.0);
            let xi = take_xi(&mut params, [1.0; CATEGORY_COUNT]);
            let zeta = take_zeta(&mut params)?;
            reject_leftovers(&params, "the davidson engine")?;
            let weights = WeightScheme::new(xi, zeta.clone())?;
            let model_params = DavidsonParams::new(eta, kappa, scale)?;
            Ok(ResolvedEngine {
                engine: Engine::Davidson {
                    k,
                    weights,
                    params: model_params,
                },
                wrapper: None,
                echo: json!({
                    "model": "davidson",
                    "k": k,
                    "eta": eta,
                    "kappa": kappa,
                    "scale": scale,
                    "xi": xi.to_vec(),
                    "zeta": zeta,
                }),
            })
        }
        "skellam" => {
            let k = take(&mut params, "k", 7.5);
            let c = take(&mut params, "c", 0.0);
            let eta = take(&mut params, "eta", 0.0);
            let scale = take(&mut params, "scale", 300.0);
            let truncation = take(&mut params, "truncation", 50.0) as u32;
            reject_leftovers(&params, "the skellam engine")?;
            let model_params = SkellamParams::new(c, eta, scale, truncation)?;
            Ok(ResolvedEngine {
                engine: Engine::Skellam {
                    k,
                    params: model_params,
                },
                wrapper: None,
                echo: json!({
                    "model": "skellam",
                    "k": k,
                    "c": c,
                    "eta": eta,
                    "scale": scale,
                    "truncation": truncation,
                }),
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown engine model {other:?} (expected fifa, davidson, or skellam)"
        ))),
    }
}

/// A resolved batch problem, everything except the matches themselves.
pub struct ResolvedBatch {
    pub model: LossModel,
    pub weights: WeightScheme,
    pub alpha: f64,
    pub scale: f64,
    pub echo: serde_json::Value,
}

pub fn build_batch(model: &str, mut params: ParamMap) -> Result<ResolvedBatch> {
    let alpha = take(&mut params, "alpha", 1.0);
    match model {
        "davidson" => {
            let eta = take(&mut params, "eta", 0.0);
            let kappa = take(&mut params, "kappa", 2.0);
            let scale = take(&mut params, "scale", 200.0);
            let xi = take_xi(&mut params, [1.0; CATEGORY_COUNT]);
            let zeta = take_zeta(&mut params)?;
            reject_leftovers(&params, "the davidson batch model")?;
            Ok(ResolvedBatch {
                model: LossModel::Davidson(DavidsonParams::new(eta, kappa, scale)?),
                weights: WeightScheme::new(xi, zeta.clone())?,
                alpha,
                scale,
                echo: json!({
                    "model": "davidson",
                    "alpha": alpha,
                    "eta": eta,
                    "kappa": kappa,
                    "scale": scale,
                    "xi": xi.to_vec(),
                    "zeta": zeta,
                }),
            })
        }
        "skellam" => {
            let c = take(&mut params, "c", 0.0);
            let eta = take(&mut params, "eta", 0.0);
            let scale = take(&mut params, "scale", 300.0);
            let truncation = take(&mut params, "truncation", 50.0) as u32;
            reject_leftovers(&params, "the skellam batch model")?;
            Ok(ResolvedBatch {
                model: LossModel::Skellam(SkellamParams::new(c, eta, scale, truncation)?),
                weights: WeightScheme::default(),
                alpha,
                scale,
                echo: json!({
                    "model": "skellam",
                    "alpha": alpha,
                    "c": c,
                    "eta": eta,
                    "scale": scale,
                    "truncation": truncation,
                }),
            })
        }
        "quadratic" => {
            let scale = take(&mut params, "scale", 1.0);
            reject_leftovers(&params, "the quadratic batch model")?;
            Ok(ResolvedBatch {
                model: LossModel::Quadratic,
                weights: WeightScheme::default(),
                alpha,
                scale,
                echo: json!({
                    "model": "quadratic",
                    "alpha": alpha,
                    "scale": scale,
                }),
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown batch model {other:?} (expected davidson, skellam, or quadratic)"
        ))),
    }
}

/// A resolved synthetic-generator configuration.
pub struct ResolvedSynth {
    pub config: SynthConfig,
    pub echo: serde_json::Value,
}

pub fn build_synth(
    model: &str,
    seed: u64,
    teams: usize,
    games: usize,
    mut params: ParamMap,
) -> Result<ResolvedSynth> {
    let skill_stddev = take(&mut params, "skill_stddev", 200.0);
    let home_venue_prob = take(&mut params, "home_venue_prob", 0.74);
    let knockout_prob = take(&mut params, "knockout_prob", 0.0);
    let shootout_prob = take(&mut params, "shootout_prob", 0.0);
    let (gen_model, model_echo) = match model {
        "davidson" => {
            let eta = take(&mut params, "eta", 0.3);
            let kappa = take(&mut params, "kappa", 0.8);
            let scale = take(&mut params, "scale", 200.0);
            reject_leftovers(&params, "the davidson generator")?;
            (
                GenModel::Davidson(DavidsonParams::new(eta, kappa, scale)?),
                json!({"model": "davidson", "eta": eta, "kappa": kappa, "scale": scale}),
            )
        }
        "skellam" => {
            let c = take(&mut params, "c", 0.0);
            let eta = take(&mut params, "eta", 0.2);
            let scale = take(&mut params, "scale", 300.0);
            reject_leftovers(&params, "the skellam generator")?;
            (
                GenModel::Skellam(SkellamParams::new(c, eta, scale, 50)?),
                json!({"model": "skellam", "c": c, "eta": eta, "scale": scale}),
            )
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown generator model {other:?} (expected davidson or skellam)"
            )))
        }
    };
    let mut config = SynthConfig::new(seed, teams, games, gen_model);
    config.skill_stddev = skill_stddev;
    config.home_venue_prob = home_venue_prob;
    config.knockout_prob = knockout_prob;
    config.shootout_prob = shootout_prob;
    let mut echo = model_echo;
    let obj = echo.as_object_mut().unwrap();
    obj.insert("seed".into(), json!(seed));
    obj.insert("teams".into(), json!(teams));
    obj.insert("games".into(), json!(games));
    obj.insert("skill_stddev".into(), json!(skill_stddev));
    obj.insert("home_venue_prob".into(), json!(home_venue_prob));
    obj.insert("knockout_prob".into(), json!(knockout_prob));
    obj.insert("shootout_prob".into(), json!(shootout_prob));
    Ok(ResolvedSynth { config, echo })
}
