//! TOML run configuration. Every key is optional; flags take precedence.
//!
//! ```toml
//! seed = 7
//!
//! [paths]
//! corpus = "corpus"          # or posts / embeddings / references / surveillance
//! features = "out/features.csv"
//! out = "out"
//!
//! [features]
//! keywords = ["yskä", "kuume"]
//! threshold_multiplier = 2.0
//! profile_corpus = "train"   # or "all"
//! modalities = ["date", "count", "image"]
//!
//! [eval]
//! split_date = 2017-05-29
//! horizon = 0
//! folds = 10
//! shuffle_seed = 3           # omit for contiguous folds
//!
//! [model]
//! kind = "gbt"
//! hyperparameters = { learning_rate = 0.3 }
//!
//! [[grid]]
//! kind = "ridge"
//! hyperparameters = { alpha = 10 }
//!
//! [synth]
//! weeks = 317
//! peak_amplitude = 200.0
//! ```
//!
//! Relative paths resolve against the working directory.

use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::NaiveDate;
use flucast::features::{Modality, ProfileCorpus};
use flucast::models::ModelSpec;
use flucast::synth::SynthConfig;
use serde::Deserialize;

use crate::usage;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub paths: PathsConfig,
    pub features: FeaturesConfig,
    pub eval: EvalConfig,
    pub model: Option<ModelSpec>,
    pub grid: Vec<ModelSpec>,
    pub synth: Option<SynthConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub corpus: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub surveillance: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub keywords: Option<Vec<String>>,
    pub threshold_multiplier: Option<f64>,
    pub profile_corpus: Option<ProfileCorpus>,
    pub modalities: Option<Vec<Modality>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub split_date: Option<NaiveDate>,
    pub horizon: Option<usize>,
    pub folds: Option<usize>,
    pub shuffle_seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("{}", path.display()))
            .map_err(|e| usage(format!("{e:#}")))?;
        let bad = |e: &dyn std::fmt::Display| usage(format!("{}: {e}", path.display()));
        let mut value: toml::Value = toml::from_str(&text).map_err(|e| bad(&e))?;
        dates_to_strings(&mut value);
        value.try_into().map_err(|e| bad(&e))
    }
}

/// Bare TOML dates become `YYYY-MM-DD` strings, which is what the date
/// fields deserialize from.
fn dates_to_strings(value: &mut toml::Value) {
    match value {
        toml::Value::Datetime(dt) if dt.time.is_none() && dt.offset.is_none() => {
            *value = toml::Value::String(dt.to_string());
        }
        toml::Value::Array(items) => items.iter_mut().for_each(dates_to_strings),
        toml::Value::Table(table) => table.iter_mut().for_each(|(_, v)| dates_to_strings(v)),
        _ => {}
    }
}

pub fn parse_date(s: &str) -> anyhow::Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| usage(format!("`{s}` is not a YYYY-MM-DD date")))
}

pub fn parse_modality(s: &str) -> anyhow::Result<Modality> {
    Modality::ALL
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| usage(format!("unknown modality `{s}` (expected date, count or image)")))
}

pub fn parse_profile_corpus(s: &str) -> anyhow::Result<ProfileCorpus> {
    match s {
        "train" => Ok(ProfileCorpus::Train),
        "all" => Ok(ProfileCorpus::All),
        other => Err(usage(format!("unknown profile corpus `{other}` (expected train or all)"))),
    }
}
