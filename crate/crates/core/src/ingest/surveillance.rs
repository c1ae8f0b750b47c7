use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate, Weekday};
use serde::Deserialize;

use super::embeddings::csv_io;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeekCount {
    pub week_start: NaiveDate,
    pub count: u64,
}

/// Official weekly incidence. Entries are contiguous Monday-start weeks in
/// ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveillanceSeries {
    entries: Vec<WeekCount>,
}

impl SurveillanceSeries {
    /// Validates and sorts `entries`.
    pub fn new(mut entries: Vec<WeekCount>) -> Result<Self> {
        for e in &entries {
            if e.week_start.weekday() != Weekday::Mon {
                return Err(Error::Data(format!("week_start {} is not a Monday", e.week_start)));
            }
        }
        entries.sort_by_key(|e| e.week_start);
        for pair in entries.windows(2) {
            let gap = (pair[1].week_start - pair[0].week_start).num_days();
            if gap == 0 {
                return Err(Error::Data(format!("duplicate week {}", pair[0].week_start)));
            }
            if gap != 7 {
                return Err(Error::Data(format!(
                    "gap week: {} is followed by {}",
                    pair[0].week_start, pair[1].week_start
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[WeekCount] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_week(&self) -> Option<NaiveDate> {
        self.entries.first().map(|e| e.week_start)
    }

    pub fn week_starts(&self) -> Vec<NaiveDate> {
        self.entries.iter().map(|e| e.week_start).collect()
    }

    pub fn counts(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.count as f64).collect()
    }
}

#[derive(Deserialize)]
struct Row {
    week_start: String,
    count: String,
}

/// Parses a `week_start,count` CSV.
pub fn parse_surveillance<R: Read>(reader: R) -> Result<SurveillanceSeries> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["week_start", "count"] {
        return Err(Error::parse(1, "header must be `week_start,count`"));
    }
    let mut entries = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let lineno = i + 2;
        let row = row.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let week_start = NaiveDate::parse_from_str(row.week_start.trim(), "%Y-%m-%d")
            .map_err(|_| Error::parse(lineno, format!("invalid date `{}`", row.week_start)))?;
        if week_start.weekday() != Weekday::Mon {
            return Err(Error::parse(lineno, format!("week_start {week_start} is not a Monday")));
        }
        let count: i64 = row
            .count
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid count `{}`", row.count)))?;
        if count < 0 {
            return Err(Error::parse(lineno, format!("negative count {count}")));
        }
        entries.push(WeekCount {
            week_start,
            count: count as u64,
        });
    }
    SurveillanceSeries::new(entries)
}

pub fn write_surveillance<W: Write>(writer: W, series: &SurveillanceSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["week_start", "count"]).map_err(csv_io)?;
    for e in series.entries() {
        w.write_record([e.week_start.format("%Y-%m-%d").to_string(), e.count.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SurveillanceSeries> {
        parse_surveillance(s.as_bytes())
    }

    #[test]
    fn two_contiguous_weeks() {
        let s = parse("week_start,count\n2018-02-19,226\n2018-02-26,210\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.counts(), vec![226.0, 210.0]);
    }

    #[test]
    fn single_zero_week() {
        let s = parse("week_start,count\n2012-04-30,0\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.entries()[0].count, 0);
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let s = parse("week_start,count\n2018-02-26,210\n2018-02-19,226\n").unwrap();
        assert_eq!(s.counts(), vec![226.0, 210.0]);
    }

    #[test]
    fn gap_week_rejected() {
        let err = parse("week_start,count\n2018-02-19,1\n2018-03-05,2\n").unwrap_err();
        assert!(err.to_string().contains("gap"), "{err}");
    }

    #[test]
    fn duplicate_week_rejected() {
        let err = parse("week_start,count\n2018-02-19,1\n2018-02-19,2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn non_monday_and_negative_rejected() {
        assert!(matches!(
            parse("week_start,count\n2018-02-20,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("week_start,count\n2018-02-19,1\n2018-02-26,-4\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse("week,n\n2018-02-19,1\n").is_err());
    }
}
