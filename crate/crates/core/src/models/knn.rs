use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnParams {
    pub k: usize,
}

/// Euclidean k-nearest-neighbour regressor: the unweighted mean of the `k`
/// closest training targets, ties broken by lower training-row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<f64>,
}

pub fn fit_knn(x: &Matrix, y: &[f64], k: usize) -> Result<KnnModel> {
    if k == 0 || k > x.rows() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must lie in 1..={} (training rows)",
            x.rows()
        )));
    }
    Ok(KnnModel {
        k,
        x: x.clone(),
        y: y.to_vec(),
    })
}

impl KnnModel {
    /// Training-row indices of the `k` nearest neighbours, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, query: &[f64]) -> f64 {
        let idx = self.neighbors(query);
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn one_neighbor_recalls_training_target() {
        let m = fit_knn(&col(&[0.0, 1.0, 10.0]), &[5.0, 6.0, 7.0], 1).unwrap();
        assert_eq!(m.predict_row(&[10.0]), 7.0);
    }

    #[test]
    fn k_equals_n_is_mean() {
        let m = fit_knn(&col(&[0.0, 1.0, 10.0]), &[3.0, 6.0, 9.0], 3).unwrap();
        assert_eq!(m.predict_row(&[-100.0]), 6.0);
        assert_eq!(m.predict_row(&[4.2]), 6.0);
    }

    #[test]
    fn two_nearest_by_exhaustive_scan() {
        let m = fit_knn(&col(&[0.0, 1.0, 10.0]), &[0.0, 1.0, 10.0], 2).unwrap();
        assert_eq!(m.neighbors(&[0.4]), vec![0, 1]);
        assert_eq!(m.predict_row(&[0.4]), 0.5);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let m = fit_knn(&col(&[1.0, -1.0, 1.0]), &[10.0, 20.0, 30.0], 1).unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![0]);
        let m = fit_knn(&col(&[2.0, 1.0, 1.0]), &[10.0, 20.0, 30.0], 2).unwrap();
        assert_eq!(m.neighbors(&[1.0]), vec![1, 2]);
    }

    #[test]
    fn k_out_of_range() {
        assert!(fit_knn(&col(&[0.0, 1.0]), &[0.0, 1.0], 3).is_err());
        assert!(fit_knn(&col(&[0.0, 1.0]), &[0.0, 1.0], 0).is_err());
    }

    #[test]
    fn permutation_invariant_without_ties() {
        let xs = [0.3, 2.9, -1.7, 5.5, 0.8, 4.1, -3.2];
        let ys = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let perm = [4, 0, 6, 2, 5, 1, 3];
        let a = fit_knn(&col(&xs), &ys, 3).unwrap();
        let b = fit_knn(
            &col(&perm.map(|i| xs[i])),
            &perm.map(|i| ys[i]),
            3,
        )
        .unwrap();
        for q in [-2.0, 0.0, 1.1, 3.3, 6.0] {
            assert!((a.predict_row(&[q]) - b.predict_row(&[q])).abs() < 1e-12);
        }
    }
}
