//! Input formats: post records (JSON Lines), embeddings (CSV) and the weekly
//! surveillance series (CSV), plus week bucketing.
//!
//! All timestamps are interpreted in UTC and weeks start on Monday.

mod buckets;
mod embeddings;
mod posts;
mod surveillance;

pub use buckets::{bucket_weeks, week_start_of, WeeklyBuckets};
pub use embeddings::{parse_embeddings, write_embeddings, EmbeddingRecord, EmbeddingSet};
pub use posts::{parse_posts, write_posts, PostRecord};
pub use surveillance::{parse_surveillance, write_surveillance, SurveillanceSeries, WeekCount};
