//! Gradient-boosted regression trees on squared error, second-order split
//! search with L1 and L2 penalties on leaf weights.
//!
//! With gradient sum `G` and hessian sum `H` over a node, the optimal leaf
//! weight is `−T(G)/(H+λ)` where `T` soft-thresholds by `reg_alpha`, and the
//! node score is `T(G)²/(H+λ)`. A split is kept when
//! `½(score_L + score_R − score_P) − γ` is positive.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::tree::{Node, RegressionTree};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub reg_alpha: f64,
    pub reg_lambda: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub gamma: f64,
    pub subsample: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_estimators: 300,
            learning_rate: 0.3,
            reg_alpha: 10.0,
            reg_lambda: 1.0,
            max_depth: 6,
            min_child_weight: 1.0,
            gamma: 0.0,
            subsample: 1.0,
        }
    }
}

/// Leaf values already include the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
}

fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

pub fn fit_gbt(x: &Matrix, y: &[f64], params: &GbtParams, seed: u64) -> Result<GbtModel> {
    let n = x.rows();
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::InvalidInput(format!("subsample {} outside (0, 1]", params.subsample)));
    }
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut rng = rng::from_seed(seed);
    let mut trees = Vec::with_capacity(params.n_estimators);
    for _ in 0..params.n_estimators {
        let grad: Vec<f64> = pred.iter().zip(y).map(|(p, t)| p - t).collect();
        let mut idx: Vec<usize> = if params.subsample < 1.0 {
            let m = ((params.subsample * n as f64).round() as usize).clamp(1, n);
            let mut s = sample(&mut rng, n, m).into_vec();
            s.sort_unstable();
            s
        } else {
            (0..n).collect()
        };
        let mut builder = Builder {
            x,
            grad: &grad,
            params,
            nodes: Vec::new(),
        };
        builder.grow(&mut idx, 0);
        let tree = RegressionTree { nodes: builder.nodes };
        for (p, row) in pred.iter_mut().zip(x.iter_rows()) {
            *p += tree.predict_row(row);
        }
        trees.push(tree);
    }
    Ok(GbtModel { base_score, trees })
}

struct Builder<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    params: &'a GbtParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        let t = soft_threshold(g, self.params.reg_alpha);
        let d = h + self.params.reg_lambda;
        if d > 0.0 {
            t * t / d
        } else {
            0.0
        }
    }

    fn weight(&self, g: f64, h: f64) -> f64 {
        let d = h + self.params.reg_lambda;
        if d > 0.0 {
            -soft_threshold(g, self.params.reg_alpha) / d
        } else {
            0.0
        }
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let g: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h = idx.len() as f64;
        self.nodes.push(Node::Leaf {
            value: self.params.learning_rate * self.weight(g, h),
        });
        if depth >= self.params.max_depth || idx.len() < 2 {
            return at;
        }
        let parent = self.score(g, h);
        let mut best: Option<(usize, f64, f64, usize)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x.cols() {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
            let mut gl = 0.0;
            for k in 1..order.len() {
                gl += self.grad[order[k - 1]];
                let lo = self.x.get(order[k - 1], f);
                let hi = self.x.get(order[k], f);
                let hl = k as f64;
                let hr = h - hl;
                if lo == hi || hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(g - gl, hr) - parent) - self.params.gamma;
                if gain > 0.0 && best.is_none_or(|b| gain > b.2) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some((f, if mid < hi { mid } else { lo }, gain, k));
                }
            }
        }
        let Some((f, threshold, gain, n_left)) = best else {
            return at;
        };
        idx.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
        let (l, r) = idx.split_at_mut(n_left);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: f,
            threshold,
            left,
            right,
            gain,
        };
        at
    }
}

impl GbtModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    /// Prediction after each boosting round; entry 0 is the base score alone.
    pub fn staged_predictions(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        let mut acc = self.base_score;
        out.push(acc);
        for t in &self.trees {
            acc += t.predict_row(row);
            out.push(acc);
        }
        out
    }

    pub fn feature_gains(&self, n_features: usize) -> Vec<f64> {
        let mut gains = vec![0.0; n_features];
        for t in &self.trees {
            t.add_gains(&mut gains);
        }
        gains
    }
}
