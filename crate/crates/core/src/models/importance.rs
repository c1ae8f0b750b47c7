use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Column, Modality};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureShare {
    pub name: String,
    pub modality: Modality,
    pub share: f64,
}

/// Normalized gain shares per feature and summed per modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub features: Vec<FeatureShare>,
    pub modalities: BTreeMap<Modality, f64>,
}

impl ImportanceReport {
    /// Fails when the model made no split at all.
    pub fn from_gains(gains: &[f64], columns: &[Column]) -> Result<Self> {
        if gains.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                actual: gains.len(),
            });
        }
        let total: f64 = gains.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidInput(
                "model has no splits with positive gain; importances are undefined".into(),
            ));
        }
        let features: Vec<FeatureShare> = gains
            .iter()
            .zip(columns)
            .map(|(g, c)| FeatureShare {
                name: c.name.clone(),
                modality: c.modality,
                share: g / total,
            })
            .collect();
        let mut modalities: BTreeMap<Modality, f64> = columns.iter().map(|c| (c.modality, 0.0)).collect();
        for f in &features {
            *modalities.entry(f.modality).or_default() += f.share;
        }
        Ok(Self { features, modalities })
    }

    pub fn modality_share(&self, m: Modality) -> f64 {
        self.modalities.get(&m).copied().unwrap_or(0.0)
    }
}
