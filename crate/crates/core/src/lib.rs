//! Nowcasting and forecasting of weekly influenza-like-illness (ILI) incidence
//! from social-media post metadata and image-embedding similarity counts.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`ingest`]: parse post records, embedding files and the official weekly
//!   surveillance series, and bucket posts into Monday-start weeks.
//! - [`features`]: date features, per-hashtag weekly counts, weekly counts of
//!   images similar to reference images, and z-score normalization.
//! - [`models`]: nine regression algorithms behind one fit/predict contract.
//! - [`eval`]: chronological split, k-fold grid search, horizon shifting and
//!   the MAE / R² / Pearson metric suite.
//! - [`synth`]: a seeded generator producing a stand-in corpus in the ingest
//!   formats.
//!
//! [`pipeline`] wires the stages together over files on disk.

pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod matrix;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
