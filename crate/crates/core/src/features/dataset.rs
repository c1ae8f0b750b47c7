use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::counts::KeywordConfig;
use super::similarity::ReferenceProfile;
use crate::error::{Error, Result};
use crate::ingest::SurveillanceSeries;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Date,
    Count,
    Image,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Date, Modality::Count, Modality::Image];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Date => "date",
            Modality::Count => "count",
            Modality::Image => "image",
        }
    }
}

pub const DATE_COLUMNS: [&str; 3] = ["week_no", "month", "year"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub modality: Modality,
}

impl Column {
    /// Infers the modality from the naming scheme used by [`assemble`].
    pub fn from_name(name: &str) -> Result<Self> {
        let modality = if DATE_COLUMNS.contains(&name) {
            Modality::Date
        } else if name.starts_with("count_") {
            Modality::Count
        } else if name.starts_with("image_") {
            Modality::Image
        } else {
            return Err(Error::Data(format!("unrecognized feature column `{name}`")));
        };
        Ok(Self {
            name: name.to_string(),
            modality,
        })
    }
}

/// A group of feature columns of one modality, aligned by week.
#[derive(Debug, Clone)]
pub struct FeatureBlock {
    pub modality: Modality,
    pub names: Vec<String>,
    pub values: Matrix,
}

impl FeatureBlock {
    pub fn date(values: Matrix) -> Self {
        Self {
            modality: Modality::Date,
            names: DATE_COLUMNS.iter().map(|s| s.to_string()).collect(),
            values,
        }
    }

    pub fn counts(values: Matrix, keywords: &KeywordConfig) -> Self {
        Self {
            modality: Modality::Count,
            names: keywords.keywords().iter().map(|k| format!("count_{k}")).collect(),
            values,
        }
    }

    pub fn images(values: Matrix, profiles: &[ReferenceProfile]) -> Self {
        Self {
            modality: Modality::Image,
            names: profiles.iter().map(|p| format!("image_{}", p.ref_id)).collect(),
            values,
        }
    }
}

/// Feature matrix with targets, one row per week.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub week_starts: Vec<NaiveDate>,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub columns: Vec<Column>,
}

impl Dataset {
    pub fn new(week_starts: Vec<NaiveDate>, x: Matrix, y: Vec<f64>, columns: Vec<Column>) -> Result<Self> {
        let n = week_starts.len();
        if x.rows() != n || y.len() != n {
            return Err(Error::Data(format!(
                "row counts disagree: {n} weeks, {} feature rows, {} targets",
                x.rows(),
                y.len()
            )));
        }
        if x.cols() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                actual: x.cols(),
            });
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        Ok(Self {
            week_starts,
            x,
            y,
            columns,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            week_starts: idx.iter().map(|&i| self.week_starts[i]).collect(),
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            columns: self.columns.clone(),
        }
    }

    /// Keeps only the columns of the given modalities, preserving order.
    pub fn with_modalities(&self, keep: &[Modality]) -> Result<Dataset> {
        let idx: Vec<usize> = (0..self.p())
            .filter(|&j| keep.contains(&self.columns[j].modality))
            .collect();
        if idx.is_empty() {
            return Err(Error::InvalidInput("no feature columns selected".into()));
        }
        let mut x = Matrix::zeros(self.n(), idx.len());
        for i in 0..self.n() {
            for (k, &j) in idx.iter().enumerate() {
                x.set(i, k, self.x.get(i, j));
            }
        }
        Ok(Dataset {
            week_starts: self.week_starts.clone(),
            x,
            y: self.y.clone(),
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
        })
    }
}

/// Concatenates feature blocks in `date | count | image` order and attaches
/// the surveillance counts as targets.
pub fn assemble(blocks: Vec<FeatureBlock>, series: &SurveillanceSeries) -> Result<Dataset> {
    let mut blocks = blocks;
    blocks.sort_by_key(|b| b.modality);
    if blocks.is_empty() {
        return Err(Error::InvalidInput("no feature blocks to assemble".into()));
    }
    if blocks.windows(2).any(|w| w[0].modality == w[1].modality) {
        return Err(Error::InvalidInput("feature modality supplied twice".into()));
    }
    for b in &blocks {
        if b.values.rows() != series.len() {
            return Err(Error::Data(format!(
                "{} block has {} rows, series has {} weeks",
                b.modality.name(),
                b.values.rows(),
                series.len()
            )));
        }
        if b.values.cols() != b.names.len() {
            return Err(Error::DimensionMismatch {
                expected: b.names.len(),
                actual: b.values.cols(),
            });
        }
    }
    let x = Matrix::hstack(&blocks.iter().map(|b| &b.values).collect::<Vec<_>>())?;
    let columns = blocks
        .iter()
        .flat_map(|b| {
            b.names.iter().map(move |name| Column {
                name: name.clone(),
                modality: b.modality,
            })
        })
        .collect();
    Dataset::new(series.week_starts(), x, series.counts(), columns)
}

/// Writes `week_start,<columns>,target`. Numbers use the shortest decimal
/// form that round-trips, so integer counts print without a fraction.
pub fn write_features_csv<W: Write>(mut w: W, ds: &Dataset) -> Result<()> {
    let mut line = String::from("week_start");
    for c in &ds.columns {
        line.push(',');
        line.push_str(&c.name);
    }
    line.push_str(",target\n");
    w.write_all(line.as_bytes())?;
    for i in 0..ds.n() {
        line.clear();
        line.push_str(&ds.week_starts[i].format("%Y-%m-%d").to_string());
        for v in ds.x.row(i) {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push(',');
        line.push_str(&ds.y[i].to_string());
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_features_csv<R: Read>(r: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3 || names[0] != "week_start" || names[names.len() - 1] != "target" {
        return Err(Error::parse(1, "header must be `week_start,<columns>,target`"));
    }
    let columns = names[1..names.len() - 1]
        .iter()
        .map(|n| Column::from_name(n))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let p = columns.len();
    let (mut weeks, mut data, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in records.enumerate() {
        let lineno = i + 2;
        let rec = rec.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let week = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|_| Error::parse(lineno, format!("invalid date `{}`", &rec[0])))?;
        weeks.push(week);
        for (j, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid number `{field}`")))?;
            if j < p {
                data.push(v);
            } else {
                y.push(v);
            }
        }
    }
    let x = Matrix::from_vec(weeks.len(), p, data)?;
    Dataset::new(weeks, x, y, columns)
}
