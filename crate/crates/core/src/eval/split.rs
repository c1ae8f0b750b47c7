use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::rng;

/// Pairs the features of week `t` with the target of week `t + h`. Rows keep
/// the feature week as `week_start`; the last `h` rows are dropped.
pub fn shift_horizon(ds: &Dataset, h: usize) -> Result<Dataset> {
    let n = ds.n();
    if h >= n {
        return Err(Error::InvalidInput(format!("horizon {h} leaves no rows out of {n}")));
    }
    if h == 0 {
        return Ok(ds.clone());
    }
    let keep: Vec<usize> = (0..n - h).collect();
    let mut out = ds.select_rows(&keep);
    out.y = ds.y[h..].to_vec();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FoldMode {
    Contiguous,
    Shuffled { seed: u64 },
}

impl Default for FoldMode {
    fn default() -> Self {
        FoldMode::Contiguous
    }
}

/// `k` blocks covering `0..n`; the first `n % k` blocks hold one extra row.
/// Shuffled mode permutes the rows before cutting.
pub fn kfold_split(n: usize, k: usize, mode: FoldMode) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!("cannot cut {n} rows into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let FoldMode::Shuffled { seed } = mode {
        order.shuffle(&mut rng::stream(seed, "folds"));
    }
    let (base, extra) = (n / k, n % k);
    let mut blocks = Vec::with_capacity(k);
    let mut at = 0;
    for b in 0..k {
        let size = base + usize::from(b < extra);
        blocks.push(order[at..at + size].to_vec());
        at += size;
    }
    Ok(blocks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// First test week, a Monday. Compared against the target week.
    pub split_date: NaiveDate,
    pub horizon: usize,
    pub folds: usize,
    #[serde(default)]
    pub fold_mode: FoldMode,
}

impl SplitConfig {
    pub fn new(split_date: NaiveDate, horizon: usize) -> Self {
        Self {
            split_date,
            horizon,
            folds: 10,
            fold_mode: FoldMode::Contiguous,
        }
    }

    /// Train and test row indices of an already shifted dataset. A row
    /// belongs to the test set when its target week is on or after the split.
    pub fn partition(&self, shifted: &Dataset) -> Result<(Vec<usize>, Vec<usize>)> {
        if self.split_date.weekday() != Weekday::Mon {
            return Err(Error::InvalidInput(format!("split date {} is not a Monday", self.split_date)));
        }
        let lead = Duration::weeks(self.horizon as i64);
        let (train, test): (Vec<usize>, Vec<usize>) =
            (0..shifted.n()).partition(|&i| shifted.week_starts[i] + lead < self.split_date);
        if train.len() < self.folds.max(2) {
            return Err(Error::InvalidInput(format!(
                "split at {} leaves {} training rows; need at least {}",
                self.split_date,
                train.len(),
                self.folds.max(2)
            )));
        }
        if test.is_empty() {
            return Err(Error::InvalidInput(format!("split at {} leaves no test rows", self.split_date)));
        }
        Ok((train, test))
    }
}
