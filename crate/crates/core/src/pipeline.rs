//! File-level wiring of ingest and feature extraction.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    assemble, count_features, date_feature_matrix, image_features, profile_corpus, read_features_csv,
    reference_profiles, write_features_csv, Dataset, FeatureBlock, KeywordConfig, Modality, ProfileCorpus,
    ReferenceProfile, DEFAULT_THRESHOLD_MULTIPLIER,
};
use crate::ingest::{
    bucket_weeks, parse_embeddings, parse_posts, parse_surveillance, EmbeddingSet, PostRecord, SurveillanceSeries,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub posts: PathBuf,
    pub embeddings: PathBuf,
    pub references: PathBuf,
    pub surveillance: PathBuf,
}

impl CorpusPaths {
    /// The file names written by the synthetic generator.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            posts: dir.join("posts.jsonl"),
            embeddings: dir.join("embeddings.csv"),
            references: dir.join("references.csv"),
            surveillance: dir.join("surveillance.csv"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub posts: Vec<PostRecord>,
    pub embeddings: EmbeddingSet,
    pub references: EmbeddingSet,
    pub series: SurveillanceSeries,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::from(e).in_file(path))
}

pub fn load_inputs(paths: &CorpusPaths) -> Result<Inputs> {
    let posts = parse_posts(open(&paths.posts)?).map_err(|e| e.in_file(&paths.posts))?;
    let embeddings = parse_embeddings(open(&paths.embeddings)?).map_err(|e| e.in_file(&paths.embeddings))?;
    let references = parse_embeddings(open(&paths.references)?).map_err(|e| e.in_file(&paths.references))?;
    let series = parse_surveillance(open(&paths.surveillance)?).map_err(|e| e.in_file(&paths.surveillance))?;
    if references.dim() != embeddings.dim() {
        return Err(Error::DimensionMismatch {
            expected: embeddings.dim(),
            actual: references.dim(),
        }
        .in_file(&paths.references));
    }
    Ok(Inputs {
        posts,
        embeddings,
        references,
        series,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizeConfig {
    pub keywords: KeywordConfig,
    pub threshold_multiplier: f64,
    pub profile_corpus: ProfileCorpus,
    /// First test week; required when profiles use the training period.
    pub split_date: Option<NaiveDate>,
    pub modalities: Vec<Modality>,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        Self {
            keywords: KeywordConfig::default(),
            threshold_multiplier: DEFAULT_THRESHOLD_MULTIPLIER,
            profile_corpus: ProfileCorpus::Train,
            split_date: None,
            modalities: Modality::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Featurized {
    pub dataset: Dataset,
    pub profiles: Vec<ReferenceProfile>,
    pub dropped_posts: usize,
}

pub fn featurize(inputs: &Inputs, config: &FeaturizeConfig) -> Result<Featurized> {
    let buckets = bucket_weeks(&inputs.posts, &inputs.series);
    let mut blocks = Vec::new();
    let mut profiles = Vec::new();
    if config.modalities.contains(&Modality::Date) {
        blocks.push(FeatureBlock::date(date_feature_matrix(&inputs.series.week_starts())?));
    }
    if config.modalities.contains(&Modality::Count) {
        blocks.push(FeatureBlock::counts(
            count_features(&buckets, &inputs.posts, &config.keywords),
            &config.keywords,
        ));
    }
    if config.modalities.contains(&Modality::Image) {
        let corpus = profile_corpus(
            &buckets,
            &inputs.posts,
            &inputs.embeddings,
            config.profile_corpus,
            config.split_date,
        )?;
        profiles = reference_profiles(&inputs.references, &corpus, config.threshold_multiplier)?;
        let m = image_features(&buckets, &inputs.posts, &inputs.embeddings, &profiles)?;
        blocks.push(FeatureBlock::images(m, &profiles));
    }
    Ok(Featurized {
        dataset: assemble(blocks, &inputs.series)?,
        profiles,
        dropped_posts: buckets.dropped(),
    })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_features_csv(open(path)?).map_err(|e| e.in_file(path))
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let run = || -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write_features_csv(&mut w, ds)?;
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| e.in_file(path))
}
