//! Seeded Monte Carlo experiments on ensembles of random geodesics.

pub mod checks;
pub mod dynamics;
pub mod ensemble;
pub mod limits;

pub use checks::{row_sum_check, sandwich_check, RowSumReport, RowSumRow, SandwichReport, SandwichRow};
pub use dynamics::{
    bump_observable, correlation_decay, double_average_check, liouville_mean, remark_counterexample,
    CorrPoint, CounterexampleReport, DecayReport, DoubleAverage, PairKernel,
};
pub use ensemble::{
    derive_seed, merge_summaries, random_trace, records_csv, run_ensemble, summarize, summary_csv,
    ExperimentConfig, ReplicaRecord, TimeCounts, TimeSummary,
};
pub use limits::{
    fit_log_variance, global_fluctuation_report, gqf_moment_fit, gqf_sample, localized_clt, normality_test,
    scaling_exponents, slln_report, FluctuationReport, GqfFit, NormalityReport, ScalingReport, SllnReport, SllnRow, SlopeFit,
};
