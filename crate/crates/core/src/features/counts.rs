use crate::error::{Error, Result};
use crate::ingest::{PostRecord, WeeklyBuckets};
use crate::matrix::Matrix;

/// Finnish symptom hashtags: cough, fever, flu, influenza, muscle ache,
/// sick, throat ache.
pub const DEFAULT_KEYWORDS: [&str; 7] = [
    "yskä",
    "kuume",
    "flunssa",
    "influenssa",
    "lihaskipu",
    "kipeä",
    "kurkkukipu",
];

/// Ordered list of tracked hashtags; the order fixes the count-column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordConfig {
    keywords: Vec<String>,
}

impl KeywordConfig {
    pub fn new<S: AsRef<str>>(keywords: impl IntoIterator<Item = S>) -> Result<Self> {
        let keywords: Vec<String> = keywords
            .into_iter()
            .map(|k| k.as_ref().trim().trim_start_matches('#').to_string())
            .collect();
        if keywords.is_empty() {
            return Err(Error::InvalidInput("keyword list is empty".into()));
        }
        for (i, k) in keywords.iter().enumerate() {
            if k.is_empty() || *k != k.to_lowercase() {
                return Err(Error::InvalidInput(format!("keyword `{k}` must be non-empty lowercase")));
            }
            if keywords[..i].contains(k) {
                return Err(Error::InvalidInput(format!("keyword `{k}` listed twice")));
            }
        }
        Ok(Self { keywords })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

impl Default for KeywordConfig {
    fn default() -> Self {
        Self {
            keywords: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Cell `(t, k)` is the number of posts in week `t` carrying keyword `k`. A
/// post with several tracked tags counts once in each of their columns.
pub fn count_features(
    buckets: &WeeklyBuckets,
    posts: &[PostRecord],
    keywords: &KeywordConfig,
) -> Matrix {
    let mut m = Matrix::zeros(buckets.len(), keywords.len());
    for t in 0..buckets.len() {
        let row = m.row_mut(t);
        for &i in buckets.week(t) {
            for (k, kw) in keywords.keywords().iter().enumerate() {
                if posts[i].has_hashtag(kw) {
                    row[k] += 1.0;
                }
            }
        }
    }
    m
}
