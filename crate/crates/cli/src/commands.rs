use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{Datelike, NaiveDate, Weekday};
use flucast::eval::{
    grid_search, shift_horizon, train_eval, write_predictions_csv, CvRow, FoldMode, SearchResult, SplitConfig,
};
use flucast::features::{zscore_fit, Dataset, KeywordConfig, Modality, ProfileCorpus, DEFAULT_THRESHOLD_MULTIPLIER};
use flucast::models::{fit, save_model, HyperValue, ModelKind, ModelSpec};
use flucast::pipeline::{featurize as run_featurize, load_inputs, read_dataset, write_dataset, CorpusPaths, FeaturizeConfig};
use flucast::synth::{generate, write_corpus, SynthConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_date, parse_modality, parse_profile_corpus, RunConfig};
use crate::grid::default_grid;
use crate::{manifest, usage, DataArgs, EvalArgs, FeaturizeArgs, ModelArgs, SearchArgs, SynthArgs, TrainArgs};

fn out_dir(cfg: &RunConfig, flag: &Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| cfg.paths.out.clone())
        .ok_or_else(|| usage("no output directory (use --out or [paths].out)"))?;
    std::fs::create_dir_all(&dir).with_context(|| format!("{}", dir.display()))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut body = serde_json::to_vec_pretty(value)?;
    body.push(b'\n');
    std::fs::write(path, body).with_context(|| format!("{}", path.display()))
}

struct FeatureSettings {
    keywords: KeywordConfig,
    threshold: f64,
    profile_corpus: ProfileCorpus,
    modalities: Vec<Modality>,
}

impl FeatureSettings {
    fn resolve(cfg: &RunConfig, data: &DataArgs) -> anyhow::Result<Self> {
        let keywords = match data.keywords.clone().or_else(|| cfg.features.keywords.clone()) {
            Some(k) => KeywordConfig::new(k).map_err(|e| usage(e.to_string()))?,
            None => KeywordConfig::default(),
        };
        let threshold = data
            .threshold
            .or(cfg.features.threshold_multiplier)
            .unwrap_or(DEFAULT_THRESHOLD_MULTIPLIER);
        if !threshold.is_finite() {
            return Err(usage("threshold multiplier must be finite"));
        }
        let profile_corpus = match &data.profile_corpus {
            Some(s) => parse_profile_corpus(s)?,
            None => cfg.features.profile_corpus.unwrap_or_default(),
        };
        let mut modalities = match &data.modalities {
            Some(list) => list.iter().map(|s| parse_modality(s)).collect::<anyhow::Result<Vec<_>>>()?,
            None => cfg.features.modalities.clone().unwrap_or_else(|| Modality::ALL.to_vec()),
        };
        modalities.sort();
        modalities.dedup();
        if modalities.is_empty() {
            return Err(usage("at least one feature modality is required"));
        }
        Ok(Self {
            keywords,
            threshold,
            profile_corpus,
            modalities,
        })
    }

    fn describe(&self) -> Value {
        json!({
            "keywords": self.keywords.keywords(),
            "threshold_multiplier": self.threshold,
            "profile_corpus": self.profile_corpus,
            "modalities": self.modalities,
        })
    }
}

enum Source {
    Features(PathBuf),
    Corpus(CorpusPaths),
}

impl Source {
    fn resolve(cfg: &RunConfig, data: &DataArgs) -> anyhow::Result<Self> {
        let corpus_flags = data.corpus.is_some()
            || data.posts.is_some()
            || data.embeddings.is_some()
            || data.references.is_some()
            || data.surveillance.is_some();
        if let Some(f) = &data.features {
            if corpus_flags {
                return Err(usage("--features cannot be combined with corpus inputs"));
            }
            return Ok(Source::Features(f.clone()));
        }
        if !corpus_flags {
            if let Some(f) = &cfg.paths.features {
                return Ok(Source::Features(f.clone()));
            }
        }
        let p = &cfg.paths;
        let pick = |flag: &Option<PathBuf>, conf: &Option<PathBuf>, name: &str| -> anyhow::Result<PathBuf> {
            flag.clone()
                .or_else(|| data.corpus.as_ref().map(|d| CorpusPaths::in_dir(d).field(name)))
                .or_else(|| conf.clone())
                .or_else(|| p.corpus.as_ref().map(|d| CorpusPaths::in_dir(d).field(name)))
                .ok_or_else(|| usage(format!("no {name} input (use --{name}, --corpus or --features)")))
        };
        Ok(Source::Corpus(CorpusPaths {
            posts: pick(&data.posts, &p.posts, "posts")?,
            embeddings: pick(&data.embeddings, &p.embeddings, "embeddings")?,
            references: pick(&data.references, &p.references, "references")?,
            surveillance: pick(&data.surveillance, &p.surveillance, "surveillance")?,
        }))
    }

    fn files(&self) -> Vec<PathBuf> {
        match self {
            Source::Features(f) => vec![f.clone()],
            Source::Corpus(c) => vec![
                c.posts.clone(),
                c.embeddings.clone(),
                c.references.clone(),
                c.surveillance.clone(),
            ],
        }
    }

    fn describe(&self) -> Value {
        let s = |p: &Path| p.display().to_string();
        match self {
            Source::Features(f) => json!({ "features": s(f) }),
            Source::Corpus(c) => json!({
                "posts": s(&c.posts),
                "embeddings": s(&c.embeddings),
                "references": s(&c.references),
                "surveillance": s(&c.surveillance),
            }),
        }
    }
}

trait CorpusField {
    fn field(self, name: &str) -> PathBuf;
}

impl CorpusField for CorpusPaths {
    fn field(self, name: &str) -> PathBuf {
        match name {
            "posts" => self.posts,
            "embeddings" => self.embeddings,
            "references" => self.references,
            _ => self.surveillance,
        }
    }
}

fn split_date(cfg: &RunConfig, data: &DataArgs) -> anyhow::Result<Option<NaiveDate>> {
    let date = match &data.split_date {
        Some(s) => Some(parse_date(s)?),
        None => cfg.eval.split_date,
    };
    if let Some(d) = date {
        if d.weekday() != Weekday::Mon {
            return Err(usage(format!("split date {d} is not a Monday")));
        }
    }
    Ok(date)
}

fn require_split(date: Option<NaiveDate>) -> anyhow::Result<NaiveDate> {
    date.ok_or_else(|| usage("no split date (use --split-date or [eval].split_date)"))
}

fn load_dataset(source: &Source, fs: &FeatureSettings, split: Option<NaiveDate>) -> anyhow::Result<Dataset> {
    match source {
        Source::Features(path) => {
            let ds = read_dataset(path)?;
            Ok(ds.with_modalities(&fs.modalities).with_context(|| format!("{}", path.display()))?)
        }
        Source::Corpus(paths) => {
            if fs.profile_corpus == ProfileCorpus::Train && fs.modalities.contains(&Modality::Image) && split.is_none() {
                return Err(usage("training-period reference profiles need a split date"));
            }
            let inputs = load_inputs(paths)?;
            let config = FeaturizeConfig {
                keywords: fs.keywords.clone(),
                threshold_multiplier: fs.threshold,
                profile_corpus: fs.profile_corpus,
                split_date: split,
                modalities: fs.modalities.clone(),
            };
            Ok(run_featurize(&inputs, &config)?.dataset)
        }
    }
}

fn parse_hp(raw: &str) -> anyhow::Result<(String, HyperValue)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| usage(format!("hyperparameter `{raw}` is not NAME=VALUE")))?;
    let value = match v.parse::<f64>() {
        Ok(n) => HyperValue::Number(n),
        Err(_) => HyperValue::Text(v.to_string()),
    };
    Ok((k.trim().to_string(), value))
}

fn parse_kind(s: &str) -> anyhow::Result<ModelKind> {
    ModelKind::parse(s).map_err(|e| usage(e.to_string()))
}

fn resolve_spec(cfg: &RunConfig, m: &ModelArgs) -> anyhow::Result<ModelSpec> {
    let mut spec = if let Some(path) = &m.spec {
        let bytes = std::fs::read(path).with_context(|| format!("{}", path.display()))?;
        serde_json::from_slice::<ModelSpec>(&bytes).with_context(|| format!("{}", path.display()))?
    } else if let Some(kind) = &m.model {
        ModelSpec::new(parse_kind(kind)?).with_seed(cfg.seed.unwrap_or(0))
    } else if let Some(spec) = &cfg.model {
        spec.clone()
    } else {
        return Err(usage("no model given (use --model, --spec or [model])"));
    };
    for raw in &m.hyperparameters {
        let (k, v) = parse_hp(raw)?;
        spec.hyperparameters.insert(k, v);
    }
    if let Some(seed) = m.seed {
        spec.seed = seed;
    }
    spec.params().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

fn resolve_grid(cfg: &RunConfig, kinds: Option<&[String]>, seed: Option<u64>) -> anyhow::Result<Vec<ModelSpec>> {
    let mut grid = if cfg.grid.is_empty() {
        default_grid(seed.or(cfg.seed).unwrap_or(0))
    } else {
        cfg.grid.clone()
    };
    if let Some(kinds) = kinds {
        let kinds = kinds.iter().map(|k| parse_kind(k)).collect::<anyhow::Result<Vec<_>>>()?;
        grid.retain(|s| kinds.contains(&s.kind));
    }
    if let Some(seed) = seed {
        for s in &mut grid {
            s.seed = seed;
        }
    }
    if grid.is_empty() {
        return Err(usage("the model grid is empty"));
    }
    for s in &grid {
        s.params().map_err(|e| usage(format!("grid entry {}: {e}", s.label())))?;
    }
    Ok(grid)
}

fn fold_mode(cfg: &RunConfig, shuffle_seed: Option<u64>) -> FoldMode {
    match shuffle_seed.or(cfg.eval.shuffle_seed) {
        Some(seed) => FoldMode::Shuffled { seed },
        None => FoldMode::Contiguous,
    }
}

fn split_config(cfg: &RunConfig, date: NaiveDate, horizon: usize, folds: Option<usize>, mode: FoldMode) -> anyhow::Result<SplitConfig> {
    let folds = folds.or(cfg.eval.folds).unwrap_or(10);
    if folds < 2 {
        return Err(usage("at least 2 folds are required"));
    }
    Ok(SplitConfig {
        split_date: date,
        horizon,
        folds,
        fold_mode: mode,
    })
}

/// Training rows of the horizon-shifted dataset.
fn training_rows(ds: &Dataset, split: &SplitConfig) -> anyhow::Result<Dataset> {
    let shifted = shift_horizon(ds, split.horizon)?;
    let (train, _) = split.partition(&shifted)?;
    Ok(shifted.select_rows(&train))
}

pub fn synth(cfg: &RunConfig, a: SynthArgs) -> anyhow::Result<()> {
    let mut config = cfg.synth.clone().unwrap_or_default();
    if let Some(seed) = a.seed.or(cfg.seed) {
        config.seed = seed;
    }
    if let Some(weeks) = a.weeks {
        config.weeks = weeks;
    }
    if a.realistic {
        config.embedding_dim = SynthConfig::REALISTIC_DIM;
    }
    if a.negative_control {
        config = config.negative_control();
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    let dir = out_dir(cfg, &a.out)?;
    let corpus = generate(&config)?;
    let paths = write_corpus(&corpus, &dir)?;
    let outputs = vec![paths.posts, paths.embeddings, paths.references, paths.surveillance];
    manifest::write(&dir, "synth", &serde_json::to_value(&config)?, Some(config.seed), &[], &outputs)?;
    eprintln!(
        "wrote {} weeks, {} posts, {} references to {}",
        corpus.series.len(),
        corpus.posts.len(),
        corpus.references.len(),
        dir.display()
    );
    Ok(())
}

pub fn featurize(cfg: &RunConfig, a: FeaturizeArgs) -> anyhow::Result<()> {
    let source = Source::resolve(cfg, &a.data)?;
    let Source::Corpus(paths) = &source else {
        return Err(usage("featurize reads a corpus, not a features file"));
    };
    let fs = FeatureSettings::resolve(cfg, &a.data)?;
    let split = split_date(cfg, &a.data)?;
    if fs.profile_corpus == ProfileCorpus::Train && fs.modalities.contains(&Modality::Image) && split.is_none() {
        return Err(usage("training-period reference profiles need a split date"));
    }
    let dir = out_dir(cfg, &a.data.out)?;
    let inputs = load_inputs(paths)?;
    let out = run_featurize(
        &inputs,
        &FeaturizeConfig {
            keywords: fs.keywords.clone(),
            threshold_multiplier: fs.threshold,
            profile_corpus: fs.profile_corpus,
            split_date: split,
            modalities: fs.modalities.clone(),
        },
    )?;
    let features = dir.join("features.csv");
    let profiles = dir.join("profiles.json");
    write_dataset(&features, &out.dataset)?;
    write_json(&profiles, &out.profiles)?;
    let config = json!({
        "inputs": source.describe(),
        "features": fs.describe(),
        "split_date": split,
    });
    manifest::write(&dir, "featurize", &config, None, &source.files(), &[features, profiles])?;
    eprintln!(
        "{} weeks × {} features; {} posts outside the series range",
        out.dataset.n(),
        out.dataset.p(),
        out.dropped_posts
    );
    Ok(())
}

pub fn cv_search(cfg: &RunConfig, a: SearchArgs) -> anyhow::Result<()> {
    let source = Source::resolve(cfg, &a.data)?;
    let fs = FeatureSettings::resolve(cfg, &a.data)?;
    let date = require_split(split_date(cfg, &a.data)?)?;
    let horizon = a.horizon.or(cfg.eval.horizon).unwrap_or(0);
    let split = split_config(cfg, date, horizon, a.folds, fold_mode(cfg, a.shuffle_seed))?;
    let grid = resolve_grid(cfg, a.model.as_deref(), a.seed)?;
    let dir = out_dir(cfg, &a.data.out)?;
    let ds = load_dataset(&source, &fs, Some(date))?;
    let train = training_rows(&ds, &split)?;
    let result = grid_search(&grid, &train, split.folds, split.fold_mode)?;
    let table = dir.join("cv_table.json");
    let best = dir.join("best_spec.json");
    write_json(&table, &result)?;
    write_json(&best, &result.best)?;
    let config = json!({
        "inputs": source.describe(),
        "features": fs.describe(),
        "split": split,
        "grid": grid,
    });
    manifest::write(&dir, "cv-search", &config, a.seed.or(cfg.seed), &source.files(), &[table, best])?;
    let row = &result.table[result.best_index];
    eprintln!("best {} with mean CV MAE {:.4}", row.spec.label(), row.mean_mae);
    Ok(())
}

pub fn train(cfg: &RunConfig, a: TrainArgs) -> anyhow::Result<()> {
    let source = Source::resolve(cfg, &a.data)?;
    let fs = FeatureSettings::resolve(cfg, &a.data)?;
    let date = require_split(split_date(cfg, &a.data)?)?;
    let horizon = a.horizon.or(cfg.eval.horizon).unwrap_or(0);
    let split = split_config(cfg, date, horizon, None, FoldMode::Contiguous)?;
    let spec = resolve_spec(cfg, &a.model)?;
    let dir = out_dir(cfg, &a.data.out)?;
    let ds = load_dataset(&source, &fs, Some(date))?;
    let tr = training_rows(&ds, &split)?;
    let norm = zscore_fit(&tr.x)?;
    let model = fit(&spec, &norm.apply(&tr.x)?, &tr.y, &tr.columns)?;
    let model_path = dir.join("model.json");
    let norm_path = dir.join("normalizer.json");
    std::fs::write(&model_path, save_model(&model)?).with_context(|| format!("{}", model_path.display()))?;
    write_json(&norm_path, &norm)?;
    let config = json!({
        "inputs": source.describe(),
        "features": fs.describe(),
        "split_date": date,
        "horizon": horizon,
        "spec": spec,
    });
    manifest::write(&dir, "train", &config, Some(spec.seed), &source.files(), &[model_path, norm_path])?;
    eprintln!("trained {} on {} rows", spec.label(), tr.n());
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a Value,
    spec: &'a ModelSpec,
    n_train: usize,
    metrics: &'a flucast::eval::Metrics,
    cv_table: &'a [CvRow],
    importances: &'a Option<flucast::models::ImportanceReport>,
    predictions: &'a [flucast::eval::PredictionRow],
}

pub fn evaluate(cfg: &RunConfig, a: EvalArgs, command: &str) -> anyhow::Result<()> {
    let source = Source::resolve(cfg, &a.data)?;
    let fs = FeatureSettings::resolve(cfg, &a.data)?;
    let date = require_split(split_date(cfg, &a.data)?)?;
    let horizon = match (command, a.horizon.or(cfg.eval.horizon)) {
        ("forecast", None | Some(0)) => return Err(usage("forecast needs --horizon of at least 1")),
        (_, h) => h.unwrap_or(0),
    };
    let split = split_config(cfg, date, horizon, a.folds, fold_mode(cfg, a.shuffle_seed))?;
    let dir = out_dir(cfg, &a.data.out)?;
    let ds = load_dataset(&source, &fs, Some(date))?;
    let (spec, search): (ModelSpec, Option<SearchResult>) = if a.search {
        let kinds = a.model.model.as_ref().map(|k| vec![k.clone()]);
        let grid = resolve_grid(cfg, kinds.as_deref(), a.model.seed)?;
        let result = grid_search(&grid, &training_rows(&ds, &split)?, split.folds, split.fold_mode)?;
        (result.best.clone(), Some(result))
    } else {
        (resolve_spec(cfg, &a.model)?, None)
    };
    let (report, _) = train_eval(&ds, &spec, &split)?;
    let config = json!({
        "command": command,
        "inputs": source.describe(),
        "features": fs.describe(),
        "split": split,
        "search": a.search,
    });
    let report_path = dir.join("report.json");
    let preds_path = dir.join("predictions.csv");
    write_json(
        &report_path,
        &ReportFile {
            config: &config,
            spec: &report.spec,
            n_train: report.n_train,
            metrics: &report.metrics,
            cv_table: search.as_ref().map_or(&[][..], |s| &s.table[..]),
            importances: &report.importances,
            predictions: &report.predictions,
        },
    )?;
    {
        let file = File::create(&preds_path).with_context(|| format!("{}", preds_path.display()))?;
        write_predictions_csv(BufWriter::new(file), &report.predictions)?;
    }
    manifest::write(&dir, command, &config, Some(spec.seed), &source.files(), &[report_path, preds_path])?;
    let m = &report.metrics;
    let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
    eprintln!(
        "{} h={horizon}: n={} MAE={:.4} R²={} r={} p={}",
        spec.label(),
        m.n,
        m.mae,
        show(m.r2),
        show(m.pearson_r),
        show(m.p_value)
    );
    Ok(())
}
