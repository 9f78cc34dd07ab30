//! Channel generation, Monte-Carlo and worst-case MSE evaluation, and
//! parameter sweeps that compare the robust designs with their baselines.

mod channel;
mod config;
mod metrics;
mod sweep;
mod validate;

pub use channel::{exponential_correlation, gen_channel, splitmix64, trial_seed, ChannelDraw};
pub use config::{
    two_group_weights, Baseline, ConstraintTemplate, ExperimentConfig, ExperimentRegime, ObjectiveTemplate, Point, Sweep,
    SweepVar, EXPERIMENT_SCHEMA,
};
pub use metrics::{bayes_receiver, mean_stderr, receiver_mse, sum_mse, worst_case_mse};
pub use sweep::{compare_with_oracle, oracle_point, rows_to_csv, run_point, run_sweep, OraclePoint, PointSamples, SweepRow};
pub use validate::{validate_scenario, Check, CheckOutcome, ValidationReport};
