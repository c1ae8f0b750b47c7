use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{mean_std, Matrix};

/// Per-column z-score statistics fitted on training rows (population std).
/// Constant columns map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

pub fn zscore_fit(x: &Matrix) -> Result<Normalizer> {
    if x.rows() < 2 {
        return Err(Error::InvalidInput(format!(
            "normalizer needs at least 2 rows, got {}",
            x.rows()
        )));
    }
    let mut norm = Normalizer {
        mean: Vec::with_capacity(x.cols()),
        std: Vec::with_capacity(x.cols()),
        constant: Vec::with_capacity(x.cols()),
    };
    for j in 0..x.cols() {
        let col = x.column(j);
        // Exact comparison: a rounded mean would leave a tiny non-zero std.
        let constant = col.iter().all(|&v| v == col[0]);
        let (mean, std) = if constant { (col[0], 0.0) } else { mean_std(&col) };
        norm.mean.push(mean);
        norm.std.push(std);
        norm.constant.push(constant);
    }
    Ok(norm)
}

impl Normalizer {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x)?;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = if self.constant[j] {
                    0.0
                } else {
                    (*v - self.mean[j]) / self.std[j]
                };
            }
        }
        Ok(out)
    }

    /// Inverse of [`Normalizer::apply`]; constant columns come back as their mean.
    pub fn invert(&self, z: &Matrix) -> Result<Matrix> {
        self.check_width(z)?;
        let mut out = z.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = if self.constant[j] {
                    self.mean[j]
                } else {
                    *v * self.std[j] + self.mean[j]
                };
            }
        }
        Ok(out)
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: x.cols(),
            });
        }
        Ok(())
    }
}
