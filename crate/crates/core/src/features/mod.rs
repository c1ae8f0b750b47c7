//! Weekly feature extraction.
//!
//! A row per surveillance week, columns ordered `date | count | image`:
//! three calendar features, one count per tracked hashtag, and one count per
//! reference image of posts whose embedding lies unusually close to it.

mod counts;
mod dataset;
mod date;
mod normalize;
mod similarity;

pub use counts::{count_features, KeywordConfig, DEFAULT_KEYWORDS};
pub use dataset::{
    assemble, read_features_csv, write_features_csv, Column, Dataset, FeatureBlock, Modality,
    DATE_COLUMNS,
};
pub use date::{date_feature_matrix, date_features, DateFeatures};
pub use normalize::{zscore_fit, Normalizer};
pub use similarity::{
    cosine_distance, image_features, profile_corpus, reference_profile, reference_profiles,
    ProfileCorpus,
    ReferenceProfile, DEFAULT_THRESHOLD_MULTIPLIER,
};
