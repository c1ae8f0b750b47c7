use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::adaboost::{AdaBoostParams, BoostLoss};
use super::forest::ForestParams;
use super::gbt::GbtParams;
use super::knn::KnnParams;
use super::svr::SvrParams;
use super::tree::TreeParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    Ridge,
    Lasso,
    ElasticNet,
    Knn,
    Svr,
    Tree,
    RandomForest,
    AdaboostR2,
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Ols,
        ModelKind::Ridge,
        ModelKind::Lasso,
        ModelKind::ElasticNet,
        ModelKind::Knn,
        ModelKind::Svr,
        ModelKind::Tree,
        ModelKind::RandomForest,
        ModelKind::AdaboostR2,
        ModelKind::Gbt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ols => "ols",
            ModelKind::Ridge => "ridge",
            ModelKind::Lasso => "lasso",
            ModelKind::ElasticNet => "elastic_net",
            ModelKind::Knn => "knn",
            ModelKind::Svr => "svr",
            ModelKind::Tree => "tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::AdaboostR2 => "adaboost_r2",
            ModelKind::Gbt => "gbt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown model kind `{s}`")))
    }

    /// Hyperparameter names accepted by this kind.
    pub fn schema(self) -> &'static [&'static str] {
        match self {
            ModelKind::Ols => &[],
            ModelKind::Ridge => &["alpha"],
            ModelKind::Lasso => &["alpha"],
            ModelKind::ElasticNet => &["alpha", "l1_ratio"],
            ModelKind::Knn => &["k"],
            ModelKind::Svr => &["c", "epsilon", "gamma", "tol", "max_iter"],
            ModelKind::Tree => &["max_depth", "min_samples_leaf", "max_features"],
            ModelKind::RandomForest => &[
                "n_estimators",
                "max_features",
                "max_depth",
                "min_samples_leaf",
                "bootstrap",
            ],
            ModelKind::AdaboostR2 => &["n_estimators", "learning_rate", "loss", "max_depth"],
            ModelKind::Gbt => &[
                "n_estimators",
                "learning_rate",
                "reg_alpha",
                "reg_lambda",
                "max_depth",
                "min_child_weight",
                "gamma",
                "subsample",
            ],
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            ModelKind::Tree | ModelKind::RandomForest | ModelKind::AdaboostR2 | ModelKind::Gbt
        )
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Number(f64),
    Text(String),
}

impl From<f64> for HyperValue {
    fn from(v: f64) -> Self {
        HyperValue::Number(v)
    }
}

impl From<&str> for HyperValue {
    fn from(v: &str) -> Self {
        HyperValue::Text(v.to_string())
    }
}

/// An algorithm choice with hyperparameters and a seed. Keys absent from
/// `hyperparameters` take the kind's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, HyperValue>,
    #[serde(default)]
    pub seed: u64,
}

/// Typed, validated hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Linear { alpha: f64, l1_ratio: f64 },
    Knn(KnnParams),
    Svr(SvrParams),
    Tree(TreeParams),
    RandomForest(ForestParams),
    AdaboostR2(AdaBoostParams),
    Gbt(GbtParams),
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<HyperValue>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Short human-readable label, e.g. `ridge(alpha=10)`.
    pub fn label(&self) -> String {
        let hp: Vec<String> = self
            .hyperparameters
            .iter()
            .map(|(k, v)| match v {
                HyperValue::Number(n) => format!("{k}={n}"),
                HyperValue::Text(t) => format!("{k}={t}"),
            })
            .collect();
        format!("{}({})", self.kind, hp.join(","))
    }

    pub fn params(&self) -> Result<Params> {
        let allowed = self.kind.schema();
        if let Some(bad) = self.hyperparameters.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidInput(format!(
                "`{bad}` is not a hyperparameter of {} (expected one of: {})",
                self.kind,
                allowed.join(", ")
            )));
        }
        let h = Reader(self);
        Ok(match self.kind {
            ModelKind::Ols => Params::Linear { alpha: 0.0, l1_ratio: 0.0 },
            ModelKind::Ridge => Params::Linear {
                alpha: h.non_negative("alpha", 10.0)?,
                l1_ratio: 0.0,
            },
            ModelKind::Lasso => Params::Linear {
                alpha: h.non_negative("alpha", 1.0)?,
                l1_ratio: 1.0,
            },
            ModelKind::ElasticNet => {
                let l1_ratio = h.non_negative("l1_ratio", 0.9)?;
                if l1_ratio > 1.0 {
                    return Err(Error::InvalidInput(format!("l1_ratio {l1_ratio} outside [0, 1]")));
                }
                Params::Linear {
                    alpha: h.non_negative("alpha", 10.0)?,
                    l1_ratio,
                }
            }
            ModelKind::Knn => Params::Knn(KnnParams {
                k: h.integer("k", 6, 1)?,
            }),
            ModelKind::Svr => Params::Svr(SvrParams {
                c: h.positive("c", 100.0)?,
                epsilon: h.non_negative("epsilon", 0.1)?,
                gamma: h.optional_positive("gamma")?,
                tol: h.positive("tol", 1e-3)?,
                max_iter: h.integer("max_iter", 10_000_000, 1)?,
            }),
            ModelKind::Tree => Params::Tree(h.tree(None, None)?),
            ModelKind::RandomForest => Params::RandomForest(ForestParams {
                n_estimators: h.integer("n_estimators", 300, 1)?,
                tree: h.tree(None, Some(3))?,
                bootstrap: h.flag("bootstrap", true)?,
            }),
            ModelKind::AdaboostR2 => Params::AdaboostR2(AdaBoostParams {
                n_estimators: h.integer("n_estimators", 300, 1)?,
                learning_rate: h.positive("learning_rate", 0.001)?,
                loss: match h.text("loss", "linear")? {
                    "linear" => BoostLoss::Linear,
                    "square" => BoostLoss::Square,
                    "exponential" => BoostLoss::Exponential,
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "loss `{other}` (expected linear, square or exponential)"
                        )))
                    }
                },
                max_depth: h.integer("max_depth", 3, 0)?,
            }),
            ModelKind::Gbt => {
                let subsample = h.positive("subsample", 1.0)?;
                if subsample > 1.0 {
                    return Err(Error::InvalidInput(format!("subsample {subsample} outside (0, 1]")));
                }
                Params::Gbt(GbtParams {
                    n_estimators: h.integer("n_estimators", 300, 0)?,
                    learning_rate: h.positive("learning_rate", 0.3)?,
                    reg_alpha: h.non_negative("reg_alpha", 10.0)?,
                    reg_lambda: h.non_negative("reg_lambda", 1.0)?,
                    max_depth: h.integer("max_depth", 6, 0)?,
                    min_child_weight: h.non_negative("min_child_weight", 1.0)?,
                    gamma: h.non_negative("gamma", 0.0)?,
                    subsample,
                })
            }
        })
    }
}

struct Reader<'a>(&'a ModelSpec);

impl Reader<'_> {
    fn number(&self, name: &str) -> Result<Option<f64>> {
        match self.0.hyperparameters.get(name) {
            None => Ok(None),
            Some(HyperValue::Number(v)) if v.is_finite() => Ok(Some(*v)),
            Some(other) => Err(Error::InvalidInput(format!(
                "{}: `{name}` must be a finite number, got {other:?}",
                self.0.kind
            ))),
        }
    }

    fn non_negative(&self, name: &str, default: f64) -> Result<f64> {
        let v = self.number(name)?.unwrap_or(default);
        if v < 0.0 {
            return Err(Error::InvalidInput(format!("{}: `{name}` must be ≥ 0, got {v}", self.0.kind)));
        }
        Ok(v)
    }

    fn positive(&self, name: &str, default: f64) -> Result<f64> {
        let v = self.number(name)?.unwrap_or(default);
        if v <= 0.0 {
            return Err(Error::InvalidInput(format!("{}: `{name}` must be > 0, got {v}", self.0.kind)));
        }
        Ok(v)
    }

    fn optional_positive(&self, name: &str) -> Result<Option<f64>> {
        match self.number(name)? {
            Some(v) if v <= 0.0 => Err(Error::InvalidInput(format!(
                "{}: `{name}` must be > 0, got {v}",
                self.0.kind
            ))),
            other => Ok(other),
        }
    }

    fn optional_integer(&self, name: &str, min: usize) -> Result<Option<usize>> {
        match self.number(name)? {
            None => Ok(None),
            Some(v) if v.fract() == 0.0 && v >= min as f64 && v <= u32::MAX as f64 => Ok(Some(v as usize)),
            Some(v) => Err(Error::InvalidInput(format!(
                "{}: `{name}` must be an integer ≥ {min}, got {v}",
                self.0.kind
            ))),
        }
    }

    fn integer(&self, name: &str, default: usize, min: usize) -> Result<usize> {
        Ok(self.optional_integer(name, min)?.unwrap_or(default))
    }

    fn flag(&self, name: &str, default: bool) -> Result<bool> {
        match self.number(name)? {
            None => Ok(default),
            Some(v) if v == 0.0 => Ok(false),
            Some(v) if v == 1.0 => Ok(true),
            Some(v) => Err(Error::InvalidInput(format!("{}: `{name}` must be 0 or 1, got {v}", self.0.kind))),
        }
    }

    fn text(&self, name: &str, default: &'static str) -> Result<&str> {
        match self.0.hyperparameters.get(name) {
            None => Ok(default),
            Some(HyperValue::Text(t)) => Ok(t),
            Some(other) => Err(Error::InvalidInput(format!(
                "{}: `{name}` must be a string, got {other:?}",
                self.0.kind
            ))),
        }
    }

    fn tree(&self, max_depth: Option<usize>, max_features: Option<usize>) -> Result<TreeParams> {
        Ok(TreeParams {
            max_depth: self.optional_integer("max_depth", 0)?.or(max_depth),
            min_samples_leaf: self.integer("min_samples_leaf", 1, 1)?,
            max_features: self.optional_integer("max_features", 1)?.or(max_features),
        })
    }
}
