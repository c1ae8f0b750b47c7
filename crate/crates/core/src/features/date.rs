use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateFeatures {
    /// ISO-8601 week number, 1..=53.
    pub week_no: u32,
    /// Month of the week's Monday, 1..=12.
    pub month: u32,
    /// ISO week-based year.
    pub year: i32,
}

pub fn date_features(week_start: NaiveDate) -> Result<DateFeatures> {
    if week_start.weekday() != Weekday::Mon {
        return Err(Error::InvalidInput(format!("{week_start} is not a Monday")));
    }
    let iso = week_start.iso_week();
    Ok(DateFeatures {
        week_no: iso.week(),
        month: week_start.month(),
        year: iso.year(),
    })
}

/// `n × 3` matrix of `(week_no, month, year)`.
pub fn date_feature_matrix(week_starts: &[NaiveDate]) -> Result<Matrix> {
    let mut m = Matrix::zeros(week_starts.len(), 3);
    for (t, &w) in week_starts.iter().enumerate() {
        let f = date_features(w)?;
        m.row_mut(t)
            .copy_from_slice(&[f64::from(f.week_no), f64::from(f.month), f64::from(f.year)]);
    }
    Ok(m)
}
