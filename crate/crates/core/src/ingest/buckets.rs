use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc};

use super::posts::PostRecord;
use super::surveillance::SurveillanceSeries;

/// Posts grouped by Monday-start week, aligned with a surveillance series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeeklyBuckets {
    week_starts: Vec<NaiveDate>,
    /// Indices into the bucketed post slice, sorted by post id within a week.
    members: Vec<Vec<usize>>,
    dropped: usize,
}

impl WeeklyBuckets {
    pub fn week_starts(&self) -> &[NaiveDate] {
        &self.week_starts
    }

    pub fn len(&self) -> usize {
        self.week_starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.week_starts.is_empty()
    }

    /// Indices (into the post slice passed to [`bucket_weeks`]) of the posts in week `t`.
    pub fn week(&self, t: usize) -> &[usize] {
        &self.members[t]
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, &[usize])> + '_ {
        self.week_starts
            .iter()
            .copied()
            .zip(self.members.iter().map(Vec::as_slice))
    }

    /// Posts whose timestamp fell outside the aligned range.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn bucketed(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }
}

/// Monday of the UTC calendar week containing `ts`.
pub fn week_start_of(ts: DateTime<Utc>) -> NaiveDate {
    let date = ts.date_naive();
    date - Duration::days(i64::from(date.weekday().num_days_from_monday()))
}

/// Assigns every post to the week containing its UTC timestamp. Posts outside
/// the series range are counted in [`WeeklyBuckets::dropped`].
pub fn bucket_weeks(posts: &[PostRecord], series: &SurveillanceSeries) -> WeeklyBuckets {
    let week_starts = series.week_starts();
    let mut members = vec![Vec::new(); week_starts.len()];
    let mut dropped = 0;
    if let Some(&first) = week_starts.first() {
        for (i, post) in posts.iter().enumerate() {
            let offset = (week_start_of(post.timestamp) - first).num_days() / 7;
            match usize::try_from(offset).ok().filter(|&o| o < week_starts.len()) {
                Some(t) => members[t].push(i),
                None => dropped += 1,
            }
        }
    } else {
        dropped = posts.len();
    }
    for week in &mut members {
        week.sort_by(|&a, &b| posts[a].id.cmp(&posts[b].id));
    }
    WeeklyBuckets {
        week_starts,
        members,
        dropped,
    }
}
