//! Experiment orchestration: configuration files, curriculum and baseline
//! execution, time-to-threshold summaries, significance tests, and the
//! artifact files a run leaves behind (`manifest.json`, `dfa.dot`,
//! `curriculum.dot`, `curves.csv`, `summary.csv`, `stats.json`).

mod config;
mod report;
mod run;
mod stats;

pub use config::{BaselineKind, ExperimentConfig, HyperPatch, NoiseConfig, TargetConfig};
pub use report::{
    curves_to_csv, parse_curves_csv, summarize, summary_table, summary_to_csv, write_plan,
    write_run, CurveRow, SummaryRow,
};
pub use run::{
    plan, run, time_to_threshold, DfaSummary, PlanOutput, RunManifest, RunOutput, DELTA_THRESHOLD,
};
pub use stats::{welch_t_test, TTest, VARIANCE_FLOOR};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("both samples are constant and equal; the test statistic is undefined")]
    DegenerateVariance,
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Ltlf(#[from] crate::ltlf::LtlfError),
    #[error(transparent)]
    Curriculum(#[from] crate::curriculum::CurriculumError),
    #[error(transparent)]
    Oomdp(#[from] crate::oomdp::OomdpError),
    #[error(transparent)]
    Learner(#[from] crate::learner::LearnerError),
    #[error(transparent)]
    Env(#[from] crate::gridworld::EnvError),
}
