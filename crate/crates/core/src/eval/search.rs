use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{clip_nonnegative, mae};
use super::split::{kfold_split, FoldMode};
use crate::error::{Error, Result};
use crate::features::{zscore_fit, Dataset};
use crate::models::{fit, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub spec: ModelSpec,
    pub fold_mae: Vec<f64>,
    pub mean_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub best: ModelSpec,
    pub table: Vec<CvRow>,
}

/// Fits normalizer and model on every row outside `held`, returns the MAE
/// of clipped predictions on `held`.
fn fold_mae(spec: &ModelSpec, ds: &Dataset, held: &[usize]) -> Result<f64> {
    let mut is_held = vec![false; ds.n()];
    for &i in held {
        is_held[i] = true;
    }
    let train: Vec<usize> = (0..ds.n()).filter(|&i| !is_held[i]).collect();
    if train.len() < 2 {
        return Err(Error::InvalidInput(format!("fold leaves {} training rows", train.len())));
    }
    let tr = ds.select_rows(&train);
    let te = ds.select_rows(held);
    let norm = zscore_fit(&tr.x)?;
    let model = fit(spec, &norm.apply(&tr.x)?, &tr.y, &tr.columns)?;
    let pred = clip_nonnegative(&model.predict(&norm.apply(&te.x)?)?);
    Ok(mae(&te.y, &pred))
}

/// Per-fold MAE of one spec.
pub fn cv_score(spec: &ModelSpec, ds: &Dataset, k: usize, mode: FoldMode) -> Result<Vec<f64>> {
    let folds = kfold_split(ds.n(), k, mode)?;
    folds.par_iter().map(|held| fold_mae(spec, ds, held)).collect()
}

/// Lowest mean CV MAE wins; ties go to the earlier grid entry.
pub fn grid_search(grid: &[ModelSpec], ds: &Dataset, k: usize, mode: FoldMode) -> Result<SearchResult> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty model grid".into()));
    }
    let folds = kfold_split(ds.n(), k, mode)?;
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|s| (0..k).map(move |f| (s, f))).collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, f)| fold_mae(&grid[s], ds, &folds[f]))
        .collect::<Result<_>>()?;
    let table: Vec<CvRow> = grid
        .iter()
        .zip(scores.chunks(k))
        .map(|(spec, fold_mae)| CvRow {
            spec: spec.clone(),
            fold_mae: fold_mae.to_vec(),
            mean_mae: fold_mae.iter().sum::<f64>() / k as f64,
        })
        .collect();
    let mut best_index = 0;
    for (i, row) in table.iter().enumerate() {
        if row.mean_mae < table[best_index].mean_mae {
            best_index = i;
        }
    }
    Ok(SearchResult {
        best_index,
        best: table[best_index].spec.clone(),
        table,
    })
}
