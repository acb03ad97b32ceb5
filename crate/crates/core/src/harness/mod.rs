//! Monte Carlo convergence-rate studies.
//!
//! An [`ExperimentConfig`] fixes the model, field, noise, sample-size grid
//! and query set. [`run_experiment`] replicates data generation and
//! estimation, aggregates the error per sample size and fits the slope of
//! `log error` against `log n` for comparison with the theoretical exponent.

pub mod config;
pub mod io;
pub mod rate;
pub mod run;

pub use config::{DtRule, ExperimentConfig, Model, Overrides, QuerySet, Regime};
pub use io::{fit_results, read_results, write_plot, write_report, write_results, FittedRate, ResultRecord};
pub use rate::{curve_position_rate, curve_velocity_rate, fit_rate, reference_rate, Rational, TheoreticalRate};
pub use run::{mean_stderr, run_experiment, snake_fit_config, stubble_default_bandwidth, ExperimentOutput, RateReport, RateRow, ReplicateResult, MAX_FAILURE_SHARE};
