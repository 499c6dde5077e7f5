//! Splits, metrics and the experiment harness.

mod experiment;
mod metrics;
mod split;

pub use experiment::{
    ablation_on, alpha_curve_csv, alpha_sweep, evaluate, median, metrics_csv, metrics_summary,
    parse_metrics_csv, random_features, run_ablation, sweep_on, Prepared, RunOutcome, RunRecord,
    Variant, METRICS_HEADER,
};
pub use metrics::{auroc, compute_metrics, Metrics};
pub use split::{stratified_split, Split};
