//! Seeded synthetic corpus: a seasonal ILI series, hashtag posts whose
//! weekly volume tracks it, and clustered image embeddings.
//!
//! Every random draw comes from a stream named after its purpose
//! (`epidemic`, `seasons`, `drift`, `posts`, `embeddings`, `references`), so changing
//! how one part is generated leaves the others untouched.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::DEFAULT_KEYWORDS;
use crate::ingest::{
    write_embeddings, write_posts, write_surveillance, EmbeddingRecord, EmbeddingSet, PostRecord, SurveillanceSeries,
    WeekCount,
};
use crate::pipeline::CorpusPaths;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashtagRate {
    pub tag: String,
    /// Weekly posts independent of incidence.
    pub a: f64,
    /// Extra weekly posts per reported case.
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub start: NaiveDate,
    pub weeks: usize,
    pub base_rate: f64,
    pub peak_amplitude: f64,
    pub peak_week: f64,
    pub peak_width: f64,
    /// Std of the per-season shift of the peak, in weeks.
    pub peak_jitter: f64,
    /// Std of the per-season log-amplitude factor.
    pub amplitude_jitter: f64,
    /// AR(1) coefficient of the weekly log-intensity drift.
    pub drift_ar: f64,
    /// Innovation std of the weekly log-intensity drift.
    pub drift_sd: f64,
    pub hashtags: Vec<HashtagRate>,
    pub flu_image_prob: f64,
    pub embedding_dim: usize,
    pub embedding_noise: f64,
    pub n_references: usize,
}

const DEFAULT_RATES: [(f64, f64); 7] = [
    (3.0, 0.375),
    (2.0, 0.25),
    (4.0, 0.75),
    (1.0, 0.625),
    (1.0, 0.05),
    (5.0, 0.25),
    (1.0, 0.125),
];

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            start: NaiveDate::from_ymd_opt(2012, 4, 30).expect("valid date"),
            weeks: 317,
            base_rate: 20.0,
            peak_amplitude: 200.0,
            peak_week: 8.0,
            peak_width: 4.0,
            peak_jitter: 3.0,
            amplitude_jitter: 0.3,
            drift_ar: 0.9,
            drift_sd: 0.1,
            hashtags: DEFAULT_KEYWORDS
                .iter()
                .zip(DEFAULT_RATES)
                .map(|(tag, (a, b))| HashtagRate { tag: tag.to_string(), a, b })
                .collect(),
            flu_image_prob: 0.3,
            embedding_dim: 16,
            embedding_noise: 0.05,
            n_references: 4,
        }
    }
}

impl SynthConfig {
    /// Embedding width of the production image model.
    pub const REALISTIC_DIM: usize = 1536;

    /// Same corpus shape with no incidence signal in posts or images.
    pub fn negative_control(mut self) -> Self {
        for h in &mut self.hashtags {
            h.b = 0.0;
        }
        self.flu_image_prob = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.start.weekday() != Weekday::Mon {
            return bad(format!("start {} is not a Monday", self.start));
        }
        if self.weeks < 60 {
            return bad(format!("weeks must be at least 60, got {}", self.weeks));
        }
        let rates = [
            ("base_rate", self.base_rate),
            ("peak_amplitude", self.peak_amplitude),
            ("peak_jitter", self.peak_jitter),
            ("amplitude_jitter", self.amplitude_jitter),
            ("drift_sd", self.drift_sd),
            ("embedding_noise", self.embedding_noise),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite value ≥ 0, got {v}"));
            }
        }
        if !(self.peak_width > 0.0 && self.peak_width.is_finite()) {
            return bad(format!("peak_width must be > 0, got {}", self.peak_width));
        }
        if !(0.0..1.0).contains(&self.drift_ar) {
            return bad(format!("drift_ar must lie in [0, 1), got {}", self.drift_ar));
        }
        if !(1.0..=53.0).contains(&self.peak_week) {
            return bad(format!("peak_week must lie in 1..=53, got {}", self.peak_week));
        }
        if !(0.0..=1.0).contains(&self.flu_image_prob) {
            return bad(format!("flu_image_prob must lie in [0, 1], got {}", self.flu_image_prob));
        }
        if self.embedding_dim < 2 {
            return bad(format!("embedding_dim must be at least 2, got {}", self.embedding_dim));
        }
        if self.n_references == 0 {
            return bad("n_references must be positive".into());
        }
        if self.hashtags.is_empty() {
            return bad("at least one hashtag rate is required".into());
        }
        let mut seen = BTreeSet::new();
        for h in &self.hashtags {
            if !(h.a >= 0.0 && h.b >= 0.0 && h.a.is_finite() && h.b.is_finite()) {
                return bad(format!("hashtag `{}` has a negative or non-finite rate", h.tag));
            }
            if h.tag.is_empty() || h.tag != h.tag.to_lowercase() || !seen.insert(&h.tag) {
                return bad(format!("hashtag `{}` must be non-empty, lowercase and unique", h.tag));
            }
        }
        Ok(())
    }
}

/// Poisson draw by CDF inversion. Large means are split into chunks of at
/// most 30 so `exp(−λ)` stays well away from underflow.
pub fn poisson(lambda: f64, rng: &mut Rng) -> u64 {
    const CHUNK: f64 = 30.0;
    if lambda <= 0.0 {
        return 0;
    }
    let chunks = (lambda / CHUNK).ceil();
    let part = lambda / chunks;
    let mut total = 0;
    for _ in 0..chunks as u64 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-part).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= part / k as f64;
            cdf += p;
            if p < 1e-300 && cdf < u {
                break;
            }
        }
        total += k;
    }
    total
}

fn weeks_in_iso_year(year: i32) -> u32 {
    NaiveDate::from_isoywd_opt(year, 53, Weekday::Mon).map_or(52, |_| 53)
}

/// Circular distance between week numbers on a year of `len` weeks.
pub fn circular_distance(week: f64, peak: f64, len: u32) -> f64 {
    let len = len as f64;
    let d = (week - peak).rem_euclid(len);
    d.min(len - d)
}

/// Season parameters: (peak week, amplitude). A season is keyed by the ISO
/// year of its peak; weeks more than half a year past the peak belong to the
/// next one.
fn season_of(config: &SynthConfig, week: NaiveDate) -> (f64, f64) {
    let iso = week.iso_week();
    let len = weeks_in_iso_year(iso.year());
    let key = if (iso.week() as f64) > config.peak_week + len as f64 / 2.0 {
        iso.year() + 1
    } else {
        iso.year()
    };
    let mut r = rng::from_seed(rng::derive_indexed(rng::derive_seed(config.seed, "seasons"), key as u64));
    let z1: f64 = r.sample(StandardNormal);
    let z2: f64 = r.sample(StandardNormal);
    (
        config.peak_week + config.peak_jitter * z1,
        config.peak_amplitude * (config.amplitude_jitter * z2).exp(),
    )
}

/// Seasonal incidence at `week` before the drift factor.
pub fn intensity(config: &SynthConfig, week: NaiveDate) -> f64 {
    let (peak, amplitude) = season_of(config, week);
    let iso = week.iso_week();
    let d = circular_distance(iso.week() as f64, peak, weeks_in_iso_year(iso.year()));
    let tau = config.peak_width;
    config.base_rate + amplitude * (-d * d / (2.0 * tau * tau)).exp()
}

pub fn week_starts(config: &SynthConfig) -> Vec<NaiveDate> {
    (0..config.weeks).map(|t| config.start + Duration::weeks(t as i64)).collect()
}

/// Weekly Poisson means: the seasonal intensity times `exp(z_t)`, where
/// `z` is a stationary AR(1) process started from its stationary law.
pub fn intensity_path(config: &SynthConfig) -> Vec<f64> {
    let mut r = rng::stream(config.seed, "drift");
    let rho = config.drift_ar;
    let mut z = config.drift_sd / (1.0 - rho * rho).sqrt() * r.sample::<f64, _>(StandardNormal);
    week_starts(config)
        .into_iter()
        .enumerate()
        .map(|(t, w)| {
            if t > 0 {
                z = rho * z + config.drift_sd * r.sample::<f64, _>(StandardNormal);
            }
            intensity(config, w) * z.exp()
        })
        .collect()
}

pub fn gen_epidemic(config: &SynthConfig) -> Result<SurveillanceSeries> {
    config.validate()?;
    let mut r = rng::stream(config.seed, "epidemic");
    let entries = week_starts(config)
        .into_iter()
        .zip(intensity_path(config))
        .map(|(w, lambda)| WeekCount {
            week_start: w,
            count: poisson(lambda, &mut r),
        })
        .collect();
    SurveillanceSeries::new(entries)
}

fn unit_gaussian(dim: usize, r: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub series: SurveillanceSeries,
    pub posts: Vec<PostRecord>,
    pub embeddings: EmbeddingSet,
    pub references: EmbeddingSet,
}

/// Posts, their embeddings and the reference set for a given series.
pub fn gen_posts(config: &SynthConfig, series: &SurveillanceSeries) -> Result<(Vec<PostRecord>, EmbeddingSet, EmbeddingSet)> {
    config.validate()?;
    let dim = config.embedding_dim;
    let mut ref_rng = rng::stream(config.seed, "references");
    let mut references = EmbeddingSet::new(dim);
    for i in 0..config.n_references {
        references.push(EmbeddingRecord {
            id: format!("r{}", i + 1),
            vector: unit_gaussian(dim, &mut ref_rng),
        })?;
    }
    let mut post_rng = rng::stream(config.seed, "posts");
    let mut emb_rng = rng::stream(config.seed, "embeddings");
    let mut posts = Vec::new();
    let mut embeddings = EmbeddingSet::new(dim);
    for entry in series.entries() {
        let week_start = Utc.from_utc_datetime(&entry.week_start.and_hms_opt(0, 0, 0).expect("midnight"));
        let y = entry.count as f64;
        for h in &config.hashtags {
            let n = poisson(h.a + h.b * y, &mut post_rng);
            for _ in 0..n {
                let number = posts.len() + 1;
                let offset = post_rng.random_range(0..7 * 86_400i64);
                let flu = post_rng.random::<f64>() < config.flu_image_prob;
                let vector = if flu {
                    let r = &references.records()[emb_rng.random_range(0..config.n_references)];
                    r.vector
                        .iter()
                        .map(|v| v + config.embedding_noise * emb_rng.sample::<f64, _>(StandardNormal))
                        .collect()
                } else {
                    unit_gaussian(dim, &mut emb_rng)
                };
                let embedding_id = format!("e{number:06}");
                embeddings.push(EmbeddingRecord {
                    id: embedding_id.clone(),
                    vector,
                })?;
                posts.push(PostRecord::new(
                    format!("p{number:06}"),
                    week_start + Duration::seconds(offset),
                    [h.tag.as_str()],
                    Some(embedding_id),
                ));
            }
        }
    }
    Ok((posts, embeddings, references))
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    let series = gen_epidemic(config)?;
    let (posts, embeddings, references) = gen_posts(config, &series)?;
    Ok(SynthCorpus {
        series,
        posts,
        embeddings,
        references,
    })
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let run = || -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| e.in_file(path))
}

/// Writes the four corpus files into `dir`, which must exist.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> Result<CorpusPaths> {
    let paths = CorpusPaths::in_dir(dir);
    write_file(&paths.posts, |w| write_posts(w, &corpus.posts))?;
    write_file(&paths.embeddings, |w| write_embeddings(w, &corpus.embeddings))?;
    write_file(&paths.references, |w| write_embeddings(w, &corpus.references))?;
    write_file(&paths.surveillance, |w| write_surveillance(w, &corpus.series))?;
    Ok(paths)
}
