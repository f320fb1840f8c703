//! Evaluation against gold scales and the indirect QA task.

mod metrics;
pub mod qa;
mod report;

pub use metrics::{evaluate_scale, kendall_tau_b, pairwise_accuracy, spearman_rho, ScaleResult};
pub use report::{
    best_layers, weighted_dataset_eval, write_report_csv, DatasetSummary, Metric, ReportRow,
};
