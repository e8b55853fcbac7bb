//! Metrics, the base predictor, UQ evaluation and grid search.

mod grid;
mod metrics;
mod report;

pub use grid::{grid_search, GridResult};
pub use metrics::{argmax, micro_f1, net_counts, one_hot, NetCounts};
pub use report::{
    base_predict, evaluate_records, misclassified_pct, run_uq_eval, sample_seed, EvalReport, LabeledSample,
    OutcomeKind, SampleAudit, SampleRecord,
};
