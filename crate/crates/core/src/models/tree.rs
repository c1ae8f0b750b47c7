//! CART regression tree: variance-reduction splits, mean-valued leaves.
//! Also the base learner of the forest and AdaBoost ensembles.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features drawn per node; `None` or `≥ p` uses all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Summed split gain per feature.
    pub fn feature_gains(&self, n_features: usize) -> Vec<f64> {
        let mut gains = vec![0.0; n_features];
        self.add_gains(&mut gains);
        gains
    }

    pub(crate) fn add_gains(&self, gains: &mut [f64]) {
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                gains[*feature] += gain;
            }
        }
    }
}

pub fn fit_tree(x: &Matrix, y: &[f64], params: &TreeParams, seed: u64) -> RegressionTree {
    let indices: Vec<usize> = (0..x.rows()).collect();
    fit_tree_on(x, y, &indices, params, &mut rng::from_seed(seed))
}

/// Fits on the rows listed in `indices`, which may repeat (bootstrap samples).
pub fn fit_tree_on(
    x: &Matrix,
    y: &[f64],
    indices: &[usize],
    params: &TreeParams,
    rng: &mut Rng,
) -> RegressionTree {
    let mut builder = Builder {
        x,
        y,
        params,
        rng,
        nodes: Vec::new(),
    };
    let mut idx = indices.to_vec();
    builder.grow(&mut idx, 0);
    RegressionTree {
        nodes: builder.nodes,
    }
}

struct Builder<'a, 'r> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a TreeParams,
    rng: &'r mut Rng,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    n_left: usize,
}

impl Builder<'_, '_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        self.nodes.push(Node::Leaf { value: mean });

        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if n == 0 || pure || !depth_ok || n < 2 * self.params.min_samples_leaf {
            return at;
        }
        let Some(best) = self.best_split(idx, sum) else {
            return at;
        };
        let f = best.feature;
        idx.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
        let (left_idx, right_idx) = idx.split_at_mut(best.n_left);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature: f,
            threshold: best.threshold,
            left,
            right,
            gain: best.gain,
        };
        at
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.cols();
        match self.params.max_features {
            Some(m) if m < p => sample(self.rng, p, m).into_vec(),
            _ => (0..p).collect(),
        }
    }

    /// Best variance-reduction split. The gain is the drop in the sum of
    /// squared deviations, `S_L²/n_L + S_R²/n_R − S²/n`.
    fn best_split(&mut self, idx: &[usize], total: f64) -> Option<Candidate> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let parent = total * total / n as f64;
        let mut best: Option<Candidate> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for f in self.candidate_features() {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += self.y[order[k - 1]];
                let lo = self.x.get(order[k - 1], f);
                let hi = self.x.get(order[k], f);
                if lo == hi || k < min_leaf || n - k < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64 - parent;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(Candidate {
                        feature: f,
                        threshold: if mid < hi { mid } else { lo },
                        gain,
                        n_left: k,
                    });
                }
            }
        }
        best
    }
}
