//! ε-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved as a single box-constrained QP over `2n` variables
//! `β = (α, α*)` with one equality constraint, by sequential minimal
//! optimization: each step picks a maximal-violating pair using second-order
//! information and solves the two-variable subproblem analytically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// `None` selects `1 / (p · Var(X))` over all entries of `X`.
    pub gamma: Option<f64>,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 100.0,
            epsilon: 0.1,
            gamma: None,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Matrix,
    /// `α_i − α*_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub intercept: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub c: f64,
    pub iterations: usize,
}

impl SvrModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .support_vectors
                .iter_rows()
                .zip(&self.dual_coef)
                .map(|(sv, a)| a * rbf(sv, row, self.gamma))
                .sum::<f64>()
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// `1 / (p · Var(X))` with the variance taken over every entry; `1` when
/// `X` is constant.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let v = x.as_slice();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

pub fn fit_svr(x: &Matrix, y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!("SVR needs n ≥ 2 rows, got {n}")));
    }
    let gamma = params.gamma.unwrap_or_else(|| scale_gamma(x));
    let kernel: Vec<f64> = {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rbf(x.row(i), x.row(j), gamma);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    };
    let mut solver = Solver::new(&kernel, n, y, params.c, params.epsilon);
    let outcome = solver.solve(params.tol, params.max_iter);

    let beta = &solver.alpha;
    let mut sv_rows = Vec::new();
    let mut dual_coef = Vec::new();
    for i in 0..n {
        let coef = beta[i] - beta[i + n];
        if coef != 0.0 {
            sv_rows.push(i);
            dual_coef.push(coef);
        }
    }
    let model = SvrModel {
        support_vectors: x.select_rows(&sv_rows),
        dual_coef,
        intercept: -solver.rho(),
        gamma,
        epsilon: params.epsilon,
        c: params.c,
        iterations: solver.iterations,
    };
    match outcome {
        Ok(()) => Ok(model),
        Err(gap) => Err(Error::NotConverged {
            iterations: solver.iterations,
            gap,
            best: Box::new(model),
        }),
    }
}

/// Dual in the form `min ½ βᵀQβ + pᵀβ` s.t. `sᵀβ = 0`, `0 ≤ β ≤ C`, where
/// `s_t = +1` for the `α` half and `−1` for the `α*` half and
/// `Q_tu = s_t s_u K(t mod n, u mod n)`.
struct Solver<'a> {
    kernel: &'a [f64],
    n: usize,
    c: f64,
    sign: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    iterations: usize,
}

impl<'a> Solver<'a> {
    fn new(kernel: &'a [f64], n: usize, y: &[f64], c: f64, epsilon: f64) -> Self {
        let mut sign = vec![1.0; 2 * n];
        let mut grad = vec![0.0; 2 * n];
        for i in 0..n {
            sign[i + n] = -1.0;
            grad[i] = epsilon - y[i];
            grad[i + n] = epsilon + y[i];
        }
        Self {
            kernel,
            n,
            c,
            sign,
            alpha: vec![0.0; 2 * n],
            grad,
            iterations: 0,
        }
    }

    fn k(&self, t: usize, u: usize) -> f64 {
        self.kernel[(t % self.n) * self.n + u % self.n]
    }

    fn q(&self, t: usize, u: usize) -> f64 {
        self.sign[t] * self.sign[u] * self.k(t, u)
    }

    fn is_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    fn is_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    /// Second-order working-set selection. Returns the pair, or the KKT gap
    /// when it is already below `tol`.
    fn select(&self, tol: f64) -> std::result::Result<(usize, usize), f64> {
        let m = 2 * self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..m {
            if self.sign[t] > 0.0 {
                if !self.is_upper(t) && -self.grad[t] >= gmax {
                    gmax = -self.grad[t];
                    i_sel = t;
                }
            } else if !self.is_lower(t) && self.grad[t] >= gmax {
                gmax = self.grad[t];
                i_sel = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        let qd_i = if i_sel == usize::MAX { 0.0 } else { self.k(i_sel, i_sel) };
        for t in 0..m {
            if self.sign[t] > 0.0 {
                if !self.is_lower(t) {
                    let grad_diff = gmax + self.grad[t];
                    gmax2 = gmax2.max(self.grad[t]);
                    if grad_diff > 0.0 {
                        let quad = qd_i + self.k(t, t) - 2.0 * self.sign[i_sel] * self.q(i_sel, t);
                        let obj = -(grad_diff * grad_diff) / quad.max(TAU);
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = t;
                        }
                    }
                }
            } else if !self.is_upper(t) {
                let grad_diff = gmax - self.grad[t];
                gmax2 = gmax2.max(-self.grad[t]);
                if grad_diff > 0.0 {
                    let quad = qd_i + self.k(t, t) + 2.0 * self.sign[i_sel] * self.q(i_sel, t);
                    let obj = -(grad_diff * grad_diff) / quad.max(TAU);
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = t;
                    }
                }
            }
        }
        let gap = gmax + gmax2;
        if gap < tol || j_sel == usize::MAX {
            Err(gap.max(0.0))
        } else {
            Ok((i_sel, j_sel))
        }
    }

    /// Runs to convergence; `Err(gap)` when `max_iter` is exhausted.
    fn solve(&mut self, tol: f64, max_iter: usize) -> std::result::Result<(), f64> {
        loop {
            let (i, j) = match self.select(tol) {
                Ok(pair) => pair,
                Err(_) => return Ok(()),
            };
            if self.iterations >= max_iter {
                return Err(self.violation());
            }
            self.iterations += 1;
            self.step(i, j);
        }
    }

    fn violation(&self) -> f64 {
        let m = 2 * self.n;
        let up = (0..m)
            .filter(|&t| if self.sign[t] > 0.0 { !self.is_upper(t) } else { !self.is_lower(t) })
            .map(|t| -self.sign[t] * self.grad[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let low = (0..m)
            .filter(|&t| if self.sign[t] > 0.0 { !self.is_lower(t) } else { !self.is_upper(t) })
            .map(|t| -self.sign[t] * self.grad[t])
            .fold(f64::INFINITY, f64::min);
        up - low
    }

    fn step(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let qii = self.k(i, i);
        let qjj = self.k(j, j);
        let qij = self.q(i, j);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.sign[i] != self.sign[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..2 * self.n {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
    }

    /// Offset from the free variables when there are any, otherwise the
    /// midpoint of the feasible interval.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..2 * self.n {
            let yg = self.sign[t] * self.grad[t];
            if self.is_upper(t) {
                if self.sign[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.is_lower(t) {
                if self.sign[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}
