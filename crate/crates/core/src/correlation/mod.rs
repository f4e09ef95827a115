//! Online/offline correlation protocol: per-detector aggregation, Pearson and
//! Spearman coefficients, and report emitters.

mod report;
mod stats;
pub mod svg;
mod table;

pub use report::{build_report, CorrelationEntry, CorrelationReport, MIN_DETECTORS};
pub use stats::{average_ranks, pearson, spearman};
pub use table::{
    aggregate_per_detector, format_value, parse_metric_list, DetectorRow, DetectorTable, Family,
    Metric, MetricRow, MetricTable,
};
