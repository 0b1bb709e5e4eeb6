//! Batch evaluation, summary tables and box plots.

pub mod batch;
pub mod boxplot;
pub mod summary;

pub use batch::{case_records, render_missing_log, run_batch, BatchOptions, BatchOutcome, MissingPrediction};
pub use boxplot::{box_stats, boxplot_svg, quantile_linear, BoxStats};
pub use summary::{format_half_up, render_markdown, summarize, write_summary_csv, StdMode, SummaryRow};
