use std::io::{Read, Write};

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::metrics::{clip_nonnegative, metrics, Metrics};
use super::split::{shift_horizon, SplitConfig};
use crate::error::{Error, Result};
use crate::features::{zscore_fit, Dataset};
use crate::models::{fit, ImportanceReport, ModelSpec, TrainedModel};

/// `week_start` is the target week being predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub week_start: NaiveDate,
    pub actual: f64,
    pub predicted: f64,
}

/// `p_value` tests the Pearson correlation between actual and predicted,
/// which for one prediction series is also the test of R².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ModelSpec,
    pub split: SplitConfig,
    pub n_train: usize,
    pub metrics: Metrics,
    pub predictions: Vec<PredictionRow>,
    pub importances: Option<ImportanceReport>,
}

/// Shift by the horizon, split chronologically, fit the normalizer and the
/// model on the training rows, then score clipped test predictions.
pub fn train_eval(ds: &Dataset, spec: &ModelSpec, split: &SplitConfig) -> Result<(EvalReport, TrainedModel)> {
    let shifted = shift_horizon(ds, split.horizon)?;
    let (train, test) = split.partition(&shifted)?;
    let tr = shifted.select_rows(&train);
    let te = shifted.select_rows(&test);
    let norm = zscore_fit(&tr.x)?;
    let model = fit(spec, &norm.apply(&tr.x)?, &tr.y, &tr.columns)?;
    let predicted = clip_nonnegative(&model.predict(&norm.apply(&te.x)?)?);
    let lead = Duration::weeks(split.horizon as i64);
    let predictions = te
        .week_starts
        .iter()
        .zip(&te.y)
        .zip(&predicted)
        .map(|((w, a), p)| PredictionRow {
            week_start: *w + lead,
            actual: *a,
            predicted: *p,
        })
        .collect();
    let report = EvalReport {
        spec: spec.clone(),
        split: split.clone(),
        n_train: tr.n(),
        metrics: metrics(&te.y, &predicted)?,
        predictions,
        importances: model.importances().ok(),
    };
    Ok((report, model))
}

pub fn write_predictions_csv<W: Write>(mut w: W, rows: &[PredictionRow]) -> Result<()> {
    w.write_all(b"week_start,actual,predicted\n")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.week_start.format("%Y-%m-%d"), r.actual, r.predicted)?;
    }
    Ok(())
}

pub fn read_predictions_csv<R: Read>(r: R) -> Result<Vec<PredictionRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["week_start", "actual", "predicted"] {
        return Err(Error::parse(1, "header must be `week_start,actual,predicted`"));
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| Error::parse(i + 2, e.to_string())))
        .collect()
}
