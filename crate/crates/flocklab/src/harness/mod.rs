//! Experiment drivers: configuration, initial data, the six canned
//! experiments, and their CSV/JSON artifacts.  Every driver takes an
//! [`ExperimentConfig`](config::ExperimentConfig) plus an optional output
//! directory and returns a serializable report with a single `pass` verdict.

pub mod config;
pub mod csvio;
pub mod init;
pub mod report;

mod audit_run;
mod decay;
mod meanfield;
mod monokinetic;
mod selftest;
mod sweep;

pub use audit_run::{run_hypothesis_audit, write_audit_artifacts};
pub use config::{
    DomainConfig, EulerConfig, ExperimentConfig, ExperimentSection, KineticConfig, ModeConfig,
};
pub use csvio::{float17, write_numeric_csv};
pub use decay::{run_flocking_decay, DecayReport, DecayRow};
pub use init::{reference_fluid, sample_ensemble};
pub use meanfield::{run_meanfield, MeanfieldReport, MeanfieldRow, MEANFIELD_CAP};
pub use monokinetic::{run_monokinetic, MonokineticReport, MonokineticRow};
pub use report::{fit_line, write_summary_json, LineFit};
pub use selftest::{run_metrics_selftest, SelftestReport, SelftestRow};
pub use sweep::{run_epsilon_sweep, SweepReport, SweepRow};
