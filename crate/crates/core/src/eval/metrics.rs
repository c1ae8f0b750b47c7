use serde::{Deserialize, Serialize};

use super::student::two_sided_p;
use crate::error::{Error, Result};

/// Undefined statistics (zero variance, too few rows) are `None` and
/// serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub r2: Option<f64>,
    pub pearson_r: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

pub fn clip_nonnegative(predicted: &[f64]) -> Vec<f64> {
    predicted.iter().map(|p| p.max(0.0)).collect()
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.len() < 2 {
        return Err(Error::InvalidInput(format!("metrics need at least 2 rows, got {}", actual.len())));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in metric input".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> f64 {
    actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum::<f64>() / actual.len() as f64
}

pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Option<f64> {
    let m = mean(actual);
    let ss_tot: f64 = actual.iter().map(|a| (a - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Some(1.0 - ss_res / ss_tot)
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

pub fn metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    check(actual, predicted)?;
    let r = pearson(actual, predicted);
    Ok(Metrics {
        mae: mae(actual, predicted),
        r2: r_squared(actual, predicted),
        pearson_r: r,
        p_value: r.and_then(|r| two_sided_p(r, actual.len())),
        n: actual.len(),
    })
}
