//! Accuracy evaluation over a question corpus: template ablation and
//! temperature sweeps with exact issue-set scoring.

pub mod behaviors;
mod corpus;
mod report;
mod runs;
mod scoring;

pub use corpus::{Corpus, CorpusError, EvalCase, Trait, EXPECTED_DISTRIBUTION};
pub use report::{ablation_report, ablation_summary, runs_csv, sweep_report, sweep_summary, Report, CSV_HEADER};
pub use runs::{run_ablation, run_temperature_sweep, run_variant, CaseOutcome, EvalRun, RunOptions, Sweep, SweepRow};
pub use scoring::{score_case, score_keys, DecimalSeparator, Percent, Verdict};
