//! AdaBoost.R2 (Drucker, 1997) with regression-tree base learners.
//!
//! Each round fits a tree to a weighted resample of the training set, scores
//! every training row by its normalized absolute error, and down-weights the
//! rows it already predicts well. Prediction is the weighted median of the
//! ensemble, weights `learning_rate · ln(1/β)`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostLoss {
    Linear,
    Square,
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub loss: BoostLoss,
    pub max_depth: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self {
            n_estimators: 300,
            learning_rate: 0.001,
            loss: BoostLoss::Linear,
            max_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub estimators: Vec<RegressionTree>,
    pub weights: Vec<f64>,
}

/// Draws `n` row indices with probability proportional to `weights`.
fn resample(weights: &[f64], rng: &mut Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

pub fn fit_adaboost_r2(x: &Matrix, y: &[f64], params: &AdaBoostParams, seed: u64) -> Result<AdaBoostModel> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!("AdaBoost.R2 needs n ≥ 2 rows, got {n}")));
    }
    let tree_params = TreeParams {
        max_depth: Some(params.max_depth),
        ..TreeParams::default()
    };
    let mut rng = rng::from_seed(seed);
    let mut sample_weight = vec![1.0 / n as f64; n];
    let mut model = AdaBoostModel {
        estimators: Vec::new(),
        weights: Vec::new(),
    };
    for round in 0..params.n_estimators {
        let indices = resample(&sample_weight, &mut rng);
        let tree = fit_tree_on(x, y, &indices, &tree_params, &mut rng);
        let mut err: Vec<f64> = x
            .iter_rows()
            .zip(y)
            .map(|(row, t)| (tree.predict_row(row) - t).abs())
            .collect();
        let max_err = err.iter().copied().fold(0.0, f64::max);
        if max_err > 0.0 {
            for e in &mut err {
                *e /= max_err;
                *e = match params.loss {
                    BoostLoss::Linear => *e,
                    BoostLoss::Square => *e * *e,
                    BoostLoss::Exponential => 1.0 - (-*e).exp(),
                };
            }
        }
        let avg_loss: f64 = err.iter().zip(&sample_weight).map(|(e, w)| e * w).sum();
        if avg_loss <= 0.0 {
            // Perfect fit: it alone decides every later prediction.
            model.estimators.push(tree);
            model.weights.push(1.0);
            break;
        }
        if avg_loss >= 0.5 {
            if model.estimators.is_empty() {
                model.estimators.push(tree);
                model.weights.push(1.0);
            }
            break;
        }
        let beta = avg_loss / (1.0 - avg_loss);
        model.estimators.push(tree);
        model.weights.push(params.learning_rate * (1.0 / beta).ln());
        if round + 1 < params.n_estimators {
            for (w, e) in sample_weight.iter_mut().zip(&err) {
                *w *= beta.powf((1.0 - e) * params.learning_rate);
            }
            let total: f64 = sample_weight.iter().sum();
            if !(total > 0.0) {
                break;
            }
            for w in &mut sample_weight {
                *w /= total;
            }
        }
    }
    Ok(model)
}

/// Smallest value whose cumulative weight (values ascending, ties in input
/// order) reaches half the total.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let half = 0.5 * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i];
        if acc >= half {
            return values[i];
        }
    }
    values[order[order.len() - 1]]
}

impl AdaBoostModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let preds: Vec<f64> = self.estimators.iter().map(|t| t.predict_row(row)).collect();
        weighted_median(&preds, &self.weights)
    }
}
