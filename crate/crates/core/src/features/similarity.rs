use std::collections::{BTreeSet, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{EmbeddingRecord, EmbeddingSet, PostRecord, WeeklyBuckets};
use crate::matrix::{mean_std, Matrix};

pub const DEFAULT_THRESHOLD_MULTIPLIER: f64 = 2.0;

/// `1 − a·b / (‖a‖‖b‖)`, clamped to `[0, 2]`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (mut dot, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::InvalidInput("cosine distance of a zero-norm vector".into()));
    }
    let cos = dot / (aa.sqrt() * bb.sqrt());
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

/// Which embeddings the per-reference distance statistics are computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileCorpus {
    /// Images posted in weeks before the split date only.
    #[default]
    Train,
    /// Every bucketed image, including the test period.
    All,
}

/// Distance statistics of one reference image against the image corpus.
/// An image matches when its distance is strictly below
/// `mu − multiplier · sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub ref_id: String,
    pub ref_vector: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub multiplier: f64,
}

impl ReferenceProfile {
    pub fn threshold(&self) -> f64 {
        self.mu - self.multiplier * self.sigma
    }

    pub fn matches(&self, distance: f64) -> bool {
        distance < self.threshold()
    }
}

/// Population mean and standard deviation of the cosine distances between
/// `reference` and every corpus vector.
pub fn reference_profile(
    reference: &EmbeddingRecord,
    corpus: &[&EmbeddingRecord],
    multiplier: f64,
) -> Result<ReferenceProfile> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput(format!(
            "empty corpus for reference profile `{}`",
            reference.id
        )));
    }
    if !multiplier.is_finite() {
        return Err(Error::InvalidInput(format!("threshold multiplier {multiplier}")));
    }
    let distances = corpus
        .par_iter()
        .map(|e| cosine_distance(&reference.vector, &e.vector))
        .collect::<Result<Vec<f64>>>()?;
    let (mu, sigma) = mean_std(&distances);
    Ok(ReferenceProfile {
        ref_id: reference.id.clone(),
        ref_vector: reference.vector.clone(),
        mu,
        sigma,
        multiplier,
    })
}

pub fn reference_profiles(
    references: &EmbeddingSet,
    corpus: &[&EmbeddingRecord],
    multiplier: f64,
) -> Result<Vec<ReferenceProfile>> {
    references
        .records()
        .iter()
        .map(|r| reference_profile(r, corpus, multiplier))
        .collect()
}

/// Distinct embeddings referenced by bucketed posts, in bucket order. With
/// [`ProfileCorpus::Train`] only weeks starting before `split_date` count.
pub fn profile_corpus<'a>(
    buckets: &WeeklyBuckets,
    posts: &[PostRecord],
    embeddings: &'a EmbeddingSet,
    mode: ProfileCorpus,
    split_date: Option<NaiveDate>,
) -> Result<Vec<&'a EmbeddingRecord>> {
    if mode == ProfileCorpus::Train && split_date.is_none() {
        return Err(Error::InvalidInput(
            "training-period reference profiles need a split date".into(),
        ));
    }
    check_embeddings_present(buckets, posts, embeddings)?;
    let mut seen = HashSet::new();
    let mut corpus = Vec::new();
    for (week, members) in buckets.iter() {
        if mode == ProfileCorpus::Train && split_date.is_some_and(|s| week >= s) {
            break;
        }
        for &i in members {
            if let Some(id) = &posts[i].embedding_id {
                if seen.insert(id.as_str()) {
                    corpus.extend(embeddings.get(id));
                }
            }
        }
    }
    Ok(corpus)
}

fn check_embeddings_present(
    buckets: &WeeklyBuckets,
    posts: &[PostRecord],
    embeddings: &EmbeddingSet,
) -> Result<()> {
    let missing: BTreeSet<&str> = buckets
        .iter()
        .flat_map(|(_, members)| members.iter())
        .filter_map(|&i| posts[i].embedding_id.as_deref())
        .filter(|id| embeddings.get(id).is_none())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingEmbeddings(missing.into_iter().map(String::from).collect()))
    }
}

/// Cell `(t, i)` counts the posts in week `t` whose image matches reference
/// `i`. One image may match several references.
pub fn image_features(
    buckets: &WeeklyBuckets,
    posts: &[PostRecord],
    embeddings: &EmbeddingSet,
    profiles: &[ReferenceProfile],
) -> Result<Matrix> {
    check_embeddings_present(buckets, posts, embeddings)?;
    let rows = (0..buckets.len())
        .into_par_iter()
        .map(|t| {
            let mut row = vec![0.0; profiles.len()];
            for &i in buckets.week(t) {
                let Some(id) = &posts[i].embedding_id else { continue };
                let vector = &embeddings.get(id).expect("checked above").vector;
                for (cell, profile) in row.iter_mut().zip(profiles) {
                    if profile.matches(cosine_distance(&profile.ref_vector, vector)?) {
                        *cell += 1.0;
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = Matrix::zeros(buckets.len(), profiles.len());
    for (t, row) in rows.iter().enumerate() {
        m.row_mut(t).copy_from_slice(row);
    }
    Ok(m)
}
