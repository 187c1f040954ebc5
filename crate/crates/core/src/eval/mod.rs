//! Precision–recall evaluation, the experiment protocol (training runs,
//! comparisons, ablations) and the bundled self-checks.

mod metrics;
mod protocol;
pub mod verify;

pub use metrics::{auc, classify, mean_sd, pr_curve, threshold_metrics, PrCurve, PrPoint, DEFAULT_THRESHOLD};
pub use protocol::{
    ablation_table, build_models, compare, comparison_table, derive_seed, evaluate, evaluate_baseline, run_ablation,
    run_once, score_inclusion, score_partof, score_types, split_dataset, task_kb, train_task, AblationReport,
    AblationRow, AucMode, CompareRow, ComparisonReport, EvalReport, ExperimentConfig, ModelFile, ModelKind, Scored,
    SplitMode, Task, TrainedModel, IR_BASELINE, PART_OF,
};
