//! Bagged regression trees with per-node feature subsampling.
//!
//! Tree `t` draws everything from its own stream seeded by
//! `derive_indexed(seed, t)`, so the fitted forest does not depend on how
//! many worker threads built it.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

pub fn fit_random_forest(x: &Matrix, y: &[f64], params: &ForestParams, seed: u64) -> Result<RandomForest> {
    if let Some(m) = params.tree.max_features {
        if m > x.cols() {
            return Err(Error::InvalidInput(format!(
                "max_features {m} exceeds the {} available features",
                x.cols()
            )));
        }
    }
    let n = x.rows();
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::from_seed(rng::derive_indexed(seed, t as u64));
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on(x, y, &indices, &params.tree, &mut rng)
        })
        .collect();
    Ok(RandomForest { trees })
}

impl RandomForest {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn feature_gains(&self, n_features: usize) -> Vec<f64> {
        let mut gains = vec![0.0; n_features];
        for t in &self.trees {
            t.add_gains(&mut gains);
        }
        gains
    }
}
