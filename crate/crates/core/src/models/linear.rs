//! Penalized least squares.
//!
//! Minimizes
//!
//! ```text
//! (1/2n)·‖y − Xw − b‖² + alpha·l1_ratio·‖w‖₁ + (alpha/2)·(1 − l1_ratio)·‖w‖²
//! ```
//!
//! with an unpenalized intercept. `alpha = 0` is ordinary least squares,
//! `l1_ratio = 1` the LASSO and `l1_ratio = 0` ridge. Problems with an L1
//! term are solved by cyclic coordinate descent; the others in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const CD_TOLERANCE: f64 = 1e-7;
pub const CD_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Set when an unregularized system was singular and the minimum-norm
    /// solution was returned instead.
    pub rank_deficient: bool,
    /// Coordinate-descent sweeps used; zero for closed-form fits.
    pub sweeps: usize,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }
}

struct Centered {
    x: Matrix,
    y: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

fn center(x: &Matrix, y: &[f64]) -> Centered {
    let n = x.rows() as f64;
    let x_mean: Vec<f64> = (0..x.cols()).map(|j| x.column(j).iter().sum::<f64>() / n).collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut xc = x.clone();
    for i in 0..xc.rows() {
        for (v, m) in xc.row_mut(i).iter_mut().zip(&x_mean) {
            *v -= m;
        }
    }
    Centered {
        x: xc,
        y: y.iter().map(|v| v - y_mean).collect(),
        x_mean,
        y_mean,
    }
}

fn with_intercept(c: &Centered, weights: Vec<f64>, rank_deficient: bool, sweeps: usize) -> LinearModel {
    let intercept = c.y_mean - c.x_mean.iter().zip(&weights).map(|(m, w)| m * w).sum::<f64>();
    LinearModel {
        weights,
        intercept,
        rank_deficient,
        sweeps,
    }
}

fn check(x: &Matrix, y: &[f64], alpha: f64, l1_ratio: f64) -> Result<()> {
    if x.rows() < 2 {
        return Err(Error::InvalidInput(format!("linear fit needs n ≥ 2 rows, got {}", x.rows())));
    }
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training data".into()));
    }
    if !(alpha.is_finite() && alpha >= 0.0) || !(0.0..=1.0).contains(&l1_ratio) {
        return Err(Error::InvalidInput(format!("alpha {alpha}, l1_ratio {l1_ratio}")));
    }
    Ok(())
}

/// Dispatches to the closed form when there is no L1 term.
pub fn fit_linear(x: &Matrix, y: &[f64], alpha: f64, l1_ratio: f64) -> Result<LinearModel> {
    check(x, y, alpha, l1_ratio)?;
    if alpha == 0.0 || l1_ratio == 0.0 {
        closed_form(x, y, alpha)
    } else {
        coordinate_descent(x, y, alpha, l1_ratio, CD_TOLERANCE, CD_MAX_SWEEPS)
    }
}

/// Ridge / OLS via the normal equations `(X̃ᵀX̃ + n·alpha·I) w = X̃ᵀỹ` on
/// centered data. With `alpha = 0` the minimum-norm least-squares solution
/// is taken from an SVD and rank deficiency is flagged.
pub fn closed_form(x: &Matrix, y: &[f64], alpha: f64) -> Result<LinearModel> {
    check(x, y, alpha, 0.0)?;
    let c = center(x, y);
    let (n, p) = (x.rows(), x.cols());
    if p == 0 {
        return Ok(with_intercept(&c, Vec::new(), false, 0));
    }
    let xm = DMatrix::from_row_slice(n, p, c.x.as_slice());
    let yv = DVector::from_column_slice(&c.y);
    if alpha > 0.0 {
        let mut gram = xm.transpose() * &xm;
        for j in 0..p {
            gram[(j, j)] += n as f64 * alpha;
        }
        let rhs = xm.transpose() * yv;
        let w = gram
            .cholesky()
            .ok_or_else(|| Error::Data("ridge system is not positive definite".into()))?
            .solve(&rhs);
        return Ok(with_intercept(&c, w.iter().copied().collect(), false, 0));
    }
    let svd = xm.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * f64::EPSILON * n.max(p) as f64;
    let rank_deficient = p > n || svd.singular_values.iter().any(|&s| s <= cutoff);
    let w = svd
        .solve(&yv, cutoff)
        .map_err(|e| Error::Data(format!("least-squares solve failed: {e}")))?;
    Ok(with_intercept(&c, w.iter().copied().collect(), rank_deficient, 0))
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent on centered data. Stops when the largest
/// coordinate update of a sweep falls below `tol`, or after `max_sweeps`.
pub fn coordinate_descent(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LinearModel> {
    check(x, y, alpha, l1_ratio)?;
    let c = center(x, y);
    let (n, p) = (x.rows(), x.cols());
    let nf = n as f64;
    let l1 = nf * alpha * l1_ratio;
    let l2 = nf * alpha * (1.0 - l1_ratio);
    let cols: Vec<Vec<f64>> = (0..p).map(|j| c.x.column(j)).collect();
    let col_sq: Vec<f64> = cols.iter().map(|col| col.iter().map(|v| v * v).sum()).collect();
    let mut w = vec![0.0; p];
    let mut resid = c.y.clone();
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() + col_sq[j] * w[j];
            let updated = soft_threshold(rho, l1) / (col_sq[j] + l2);
            let delta = updated - w[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= delta * a;
                }
                w[j] = updated;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < tol {
            break;
        }
    }
    Ok(with_intercept(&c, w, false, sweeps))
}

/// Value of the penalized objective for `(weights, intercept)`.
pub fn objective(x: &Matrix, y: &[f64], alpha: f64, l1_ratio: f64, weights: &[f64], intercept: f64) -> f64 {
    let n = x.rows() as f64;
    let rss: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, &t)| {
            let r = t - intercept - row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
            r * r
        })
        .sum();
    let l1: f64 = weights.iter().map(|w| w.abs()).sum();
    let l2: f64 = weights.iter().map(|w| w * w).sum();
    rss / (2.0 * n) + alpha * l1_ratio * l1 + 0.5 * alpha * (1.0 - l1_ratio) * l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn exact_line() {
        let m = fit_linear(&col(&[1.0, 2.0, 3.0]), &[1.0, 2.0, 3.0], 0.0, 0.0).unwrap();
        assert!((m.weights[0] - 1.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
        assert!(!m.rank_deficient);
    }

    #[test]
    fn lasso_above_alpha_max_is_null_model() {
        let x = col(&[1.0, 2.0, 3.0]);
        let y = [1.0, 2.0, 3.0];
        // alpha_max = max|X̃ᵀ(y − ȳ)| / n = 2/3.
        let alpha_max = 2.0 / 3.0;
        // Oracle: brute-force scan of the objective over w with the optimal
        // intercept ȳ − x̄·w.
        let grid_argmin = |alpha: f64| {
            (-2000..=2000)
                .map(|k| k as f64 * 1e-3)
                .map(|w| (w, objective(&x, &y, alpha, 1.0, &[w], 2.0 - 2.0 * w)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0
        };
        assert_eq!(grid_argmin(alpha_max), 0.0);
        assert!(grid_argmin(alpha_max * 0.9) > 0.0);
        for alpha in [alpha_max, 1.0, 5.0] {
            let m = fit_linear(&x, &y, alpha, 1.0).unwrap();
            assert_eq!(m.weights, vec![0.0]);
            assert!((m.intercept - 2.0).abs() < 1e-12);
        }
        let m = fit_linear(&x, &y, alpha_max * 0.9, 1.0).unwrap();
        assert!(m.weights[0] > 0.0);
    }

    #[test]
    fn ridge_hand_value() {
        // Σxy / (Σx² + n·alpha) = 2 / (2 + 2).
        let m = fit_linear(&col(&[1.0, -1.0]), &[1.0, -1.0], 1.0, 0.0).unwrap();
        assert!((m.weights[0] - 0.5).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
        let cd = coordinate_descent(&col(&[1.0, -1.0]), &[1.0, -1.0], 1.0, 0.0, 1e-12, 10_000).unwrap();
        assert!((cd.weights[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn singular_ols_is_minimum_norm_and_flagged() {
        // Two identical columns: the minimum-norm solution splits the weight.
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let m = fit_linear(&x, &[2.0, 4.0, 6.0], 0.0, 0.0).unwrap();
        assert!(m.rank_deficient);
        assert!((m.weights[0] - 1.0).abs() < 1e-9 && (m.weights[1] - 1.0).abs() < 1e-9);
        let m = fit_linear(&Matrix::from_rows(&[[5.0], [5.0], [5.0]]).unwrap(), &[1.0, 2.0, 3.0], 0.0, 0.0).unwrap();
        assert!(m.rank_deficient);
        assert_eq!(m.weights, vec![0.0]);
        assert!((m.intercept - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_linear(&col(&[1.0]), &[1.0], 0.0, 0.0).is_err());
        assert!(fit_linear(&col(&[1.0, f64::NAN]), &[1.0, 2.0], 0.0, 0.0).is_err());
        assert!(fit_linear(&col(&[1.0, 2.0]), &[1.0, 2.0], -1.0, 0.0).is_err());
    }

    fn fixture(rows: &[Vec<f64>]) -> (Matrix, Vec<f64>) {
        let x = Matrix::from_rows(&rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect::<Vec<_>>()).unwrap();
        let y = rows.iter().map(|r| r[r.len() - 1]).collect();
        (x, y)
    }

    proptest! {
        #[test]
        fn ols_residuals_orthogonal(rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 4), 8..30)) {
            let (x, y) = fixture(&rows);
            let m = fit_linear(&x, &y, 0.0, 0.0).unwrap();
            let resid: Vec<f64> = x.iter_rows().zip(&y).map(|(r, t)| t - m.predict_row(r)).collect();
            prop_assert!(resid.iter().sum::<f64>().abs() < 1e-6);
            for j in 0..x.cols() {
                let dot: f64 = x.column(j).iter().zip(&resid).map(|(a, r)| a * r).sum();
                prop_assert!(dot.abs() < 1e-6);
            }
        }

        #[test]
        fn ridge_shrinks(rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 4), 5..30),
                         a1 in 0.0f64..5.0, extra in 1e-3f64..5.0) {
            let (x, y) = fixture(&rows);
            let norm = |a: f64| fit_linear(&x, &y, a, 0.0).unwrap().weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            prop_assert!(norm(a1 + extra) <= norm(a1) + 1e-9);
        }
    }
}
