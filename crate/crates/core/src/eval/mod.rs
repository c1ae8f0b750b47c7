//! Chronological train/test evaluation, k-fold grid search and the metric
//! suite (MAE, R², Pearson r with a two-sided t-test p-value).

mod metrics;
mod report;
mod search;
mod split;
mod student;

pub use metrics::{clip_nonnegative, mae, metrics, pearson, r_squared, Metrics};
pub use report::{read_predictions_csv, train_eval, write_predictions_csv, EvalReport, PredictionRow};
pub use search::{cv_score, grid_search, CvRow, SearchResult};
pub use split::{kfold_split, shift_horizon, FoldMode, SplitConfig};
pub use student::{ln_gamma, regularized_incomplete_beta, student_t_cdf, two_sided_p};
