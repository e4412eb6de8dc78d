use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use super::runs::{EvalRun, Sweep};
use super::scoring::DecimalSeparator;

pub const CSV_HEADER: [&str; 9] = [
    "run_id",
    "variant",
    "temperature",
    "case_id",
    "qtype",
    "generated_jql",
    "verdict",
    "prompt_tokens",
    "completion_tokens",
];

/// A rendered report: one CSV row per case per run plus a text summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// File name without extension.
    pub stem: String,
    pub csv: String,
    pub summary: String,
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '-' })
        .collect()
}

fn stamp_text(stamp: DateTime<Utc>) -> String {
    stamp.format("%Y%m%dT%H%M%SZ").to_string()
}

pub fn runs_csv(runs: &[EvalRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for run in runs {
        for o in &run.outcomes {
            w.write_record([
                run.run_id.as_str(),
                run.variant.name(),
                &run.temperature.to_string(),
                &o.case_id,
                &o.qtype.to_string(),
                o.generated_jql.as_deref().unwrap_or(""),
                o.verdict.as_str(),
                &o.prompt_tokens.to_string(),
                &o.completion_tokens.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
}

/// Variant, accuracy and token columns, one row per run.
pub fn ablation_summary(runs: &[EvalRun], sep: DecimalSeparator) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:>9} {:>7} {:>8}", "Variant", "Accuracy", "Tokens", "Correct");
    for run in runs {
        let _ = writeln!(
            out,
            "{:<8} {:>8}% {:>7} {:>5}/{}{}",
            run.variant.name(),
            run.accuracy.format(sep),
            run.variant_tokens,
            run.correct,
            run.total,
            if run.incomplete { " (incomplete)" } else { "" }
        );
    }
    out
}

pub fn sweep_summary(sweep: &Sweep, sep: DecimalSeparator) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<11} {:>9} {:>9} {:>9} {:>4}", "Temperature", "Mean", "Min", "Max", "R");
    for row in &sweep.rows {
        let _ = writeln!(
            out,
            "{:<11} {:>8}% {:>8}% {:>8}% {:>4}",
            row.temperature.to_string(),
            row.mean_accuracy.format(sep),
            row.min_accuracy.format(sep),
            row.max_accuracy.format(sep),
            row.repetitions
        );
    }
    out
}

fn header(kind: &str, backend: &str, stamp: DateTime<Utc>) -> String {
    format!("{kind} report\nbackend: {backend}\ngenerated_at: {}\n\n", stamp.to_rfc3339())
}

pub fn ablation_report(runs: &[EvalRun], sep: DecimalSeparator, stamp: DateTime<Utc>) -> Report {
    let backend = runs.first().map(|r| r.backend.as_str()).unwrap_or("none");
    let variants: Vec<&str> = runs.iter().map(|r| r.variant.name()).collect();
    let temperature = runs.first().map(|r| r.temperature.to_string()).unwrap_or_default();
    Report {
        stem: format!(
            "ablation_{}_{}_t{temperature}_{}",
            slug(backend),
            variants.join("+"),
            stamp_text(stamp)
        ),
        csv: runs_csv(runs),
        summary: header("ablation", backend, stamp) + &ablation_summary(runs, sep),
    }
}

pub fn sweep_report(sweep: &Sweep, sep: DecimalSeparator, stamp: DateTime<Utc>) -> Report {
    let backend = sweep.runs.first().map(|r| r.backend.as_str()).unwrap_or("none");
    let variant = sweep.runs.first().map(|r| r.variant.name()).unwrap_or("full");
    let temps = match (sweep.rows.first(), sweep.rows.last()) {
        (Some(a), Some(b)) => format!("{}-{}", a.temperature, b.temperature),
        _ => String::new(),
    };
    let reps = sweep.rows.first().map(|r| r.repetitions).unwrap_or(0);
    Report {
        stem: format!(
            "sweep_{}_{variant}_t{temps}_r{reps}_{}",
            slug(backend),
            stamp_text(stamp)
        ),
        csv: runs_csv(&sweep.runs),
        summary: header("temperature sweep", backend, stamp) + &sweep_summary(sweep, sep),
    }
}

impl Report {
    /// Writes `<stem>.csv` and `<stem>.txt` into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> std::io::Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.stem));
        let txt = dir.join(format!("{}.txt", self.stem));
        std::fs::write(&csv, &self.csv)?;
        std::fs::write(&txt, &self.summary)?;
        Ok((csv, txt))
    }
}
