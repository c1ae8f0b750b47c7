//! Regression models behind one fit/predict contract.
//!
//! A [`ModelSpec`] names an algorithm, its hyperparameters and a seed;
//! [`fit`] turns it into an immutable [`TrainedModel`].

pub mod adaboost;
pub mod forest;
pub mod gbt;
mod importance;
pub mod knn;
pub mod linear;
mod persist;
mod spec;
pub mod svr;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Column;
use crate::matrix::Matrix;

pub use importance::{FeatureShare, ImportanceReport};
pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use spec::{HyperValue, ModelKind, ModelSpec, Params};

/// Kind-specific fitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fitted {
    Linear(linear::LinearModel),
    Knn(knn::KnnModel),
    Svr(svr::SvrModel),
    Tree(tree::RegressionTree),
    RandomForest(forest::RandomForest),
    AdaboostR2(adaboost::AdaBoostModel),
    Gbt(gbt::GbtModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub columns: Vec<Column>,
    pub fitted: Fitted,
}

/// Fits `spec` on `(x, y)`. `columns` describes the columns of `x` and is
/// kept for importance reporting and width checks.
pub fn fit(spec: &ModelSpec, x: &Matrix, y: &[f64], columns: &[Column]) -> Result<TrainedModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.cols() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: columns.len(),
            actual: x.cols(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::InvalidInput("cannot fit on zero rows".into()));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("training data contains non-finite values".into()));
    }
    let fitted = match spec.params()? {
        Params::Linear { alpha, l1_ratio } => Fitted::Linear(linear::fit_linear(x, y, alpha, l1_ratio)?),
        Params::Knn(p) => Fitted::Knn(knn::fit_knn(x, y, p.k)?),
        Params::Svr(p) => Fitted::Svr(svr::fit_svr(x, y, &p)?),
        Params::Tree(p) => Fitted::Tree(tree::fit_tree(x, y, &p, spec.seed)),
        Params::RandomForest(p) => Fitted::RandomForest(forest::fit_random_forest(x, y, &p, spec.seed)?),
        Params::AdaboostR2(p) => Fitted::AdaboostR2(adaboost::fit_adaboost_r2(x, y, &p, spec.seed)?),
        Params::Gbt(p) => Fitted::Gbt(gbt::fit_gbt(x, y, &p, spec.seed)?),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        columns: columns.to_vec(),
        fitted,
    })
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Raw predictions; negative values are left for the evaluation stage to clip.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        Ok(x.iter_rows().map(|row| self.predict_row(row)).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.fitted {
            Fitted::Linear(m) => m.predict_row(row),
            Fitted::Knn(m) => m.predict_row(row),
            Fitted::Svr(m) => m.predict_row(row),
            Fitted::Tree(m) => m.predict_row(row),
            Fitted::RandomForest(m) => m.predict_row(row),
            Fitted::AdaboostR2(m) => m.predict_row(row),
            Fitted::Gbt(m) => m.predict_row(row),
        }
    }

    /// Gain-based importances; defined for tree, random forest and GBT models.
    pub fn importances(&self) -> Result<ImportanceReport> {
        let gains = match &self.fitted {
            Fitted::Tree(t) => t.feature_gains(self.n_features()),
            Fitted::RandomForest(f) => f.feature_gains(self.n_features()),
            Fitted::Gbt(g) => g.feature_gains(self.n_features()),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "importances are not defined for {} models",
                    self.spec.kind.name()
                )))
            }
        };
        ImportanceReport::from_gains(&gains, &self.columns)
    }
}
