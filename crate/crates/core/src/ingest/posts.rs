use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One social-media post. Only the fields needed for feature extraction are
/// kept: no author, text body, location or engagement counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    /// Lowercased, deduplicated, sorted.
    pub hashtags: BTreeSet<String>,
    pub embedding_id: Option<String>,
}

impl PostRecord {
    pub fn new(
        id: impl Into<String>,
        timestamp: DateTime<Utc>,
        hashtags: impl IntoIterator<Item = impl AsRef<str>>,
        embedding_id: Option<String>,
    ) -> Self {
        Self {
            id: id.into(),
            timestamp: timestamp.with_nanosecond(0).unwrap_or(timestamp),
            hashtags: normalize_hashtags(hashtags),
            embedding_id,
        }
    }

    pub fn has_hashtag(&self, tag: &str) -> bool {
        self.hashtags.contains(tag)
    }
}

fn normalize_hashtags(tags: impl IntoIterator<Item = impl AsRef<str>>) -> BTreeSet<String> {
    tags.into_iter()
        .map(|t| t.as_ref().trim().trim_start_matches('#').to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPost {
    id: String,
    timestamp: String,
    hashtags: Vec<String>,
    #[serde(default)]
    embedding_id: Option<String>,
}

#[derive(Serialize)]
struct RawPostOut<'a> {
    id: &'a str,
    timestamp: String,
    hashtags: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding_id: Option<&'a str>,
}

fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("invalid timestamp `{s}`: {e}"))
}

/// Parses a JSON Lines posts stream. Blank lines are skipped.
pub fn parse_posts<R: BufRead>(reader: R) -> Result<Vec<PostRecord>> {
    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPost =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if raw.id.is_empty() {
            return Err(Error::parse(lineno, "empty post id"));
        }
        let timestamp = parse_timestamp(&raw.timestamp).map_err(|m| Error::parse(lineno, m))?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        let embedding_id = raw.embedding_id.filter(|e| !e.is_empty());
        posts.push(PostRecord::new(raw.id, timestamp, raw.hashtags, embedding_id));
    }
    Ok(posts)
}

pub fn write_posts<W: Write>(mut writer: W, posts: &[PostRecord]) -> Result<()> {
    for post in posts {
        let out = RawPostOut {
            id: &post.id,
            timestamp: post.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
            hashtags: post.hashtags.iter().map(String::as_str).collect(),
            embedding_id: post.embedding_id.as_deref(),
        };
        serde_json::to_writer(&mut writer, &out)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
