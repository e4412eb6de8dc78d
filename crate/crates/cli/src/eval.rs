use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Subcommand};
use jiragpt_core::eval::{ablation_report, sweep_report, run_ablation, run_temperature_sweep, Corpus, DecimalSeparator, RunOptions};
use jiragpt_core::fixture::load_fixture;
use jiragpt_core::llm::{ChatBackend, Temperature};
use jiragpt_core::mockjira::MockJira;
use jiragpt_core::pipeline::Pipeline;
use jiragpt_core::prompt::Variant;
use jiragpt_http::config::AppConfig;
use jiragpt_http::stack::{build_backend, load_kit};

#[derive(Subcommand)]
pub enum EvalCommand {
    /// Accuracy of each Phase-1 template variant at one temperature.
    Ablation {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Variants to run, in order. All four when omitted.
        #[arg(long = "variant")]
        variants: Vec<Variant>,
    },
    /// Accuracy of one variant at t = 0.0, 0.1, ..., 1.0.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "full")]
        variant: Variant,
        #[arg(long, default_value_t = 20)]
        repetitions: u32,
    },
}

#[derive(Args)]
pub struct Common {
    /// `scripted:<behavior>` or `live`.
    #[arg(long, default_value = "scripted:golden")]
    backend: String,
    /// Corpus JSON; the bundled 70 questions when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Fixture for the embedded mock Jira.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Seed for scripted backends. Sweep repetition `r` uses `seed + r`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the CSV and summary files.
    #[arg(long, default_value = "eval-out")]
    out: PathBuf,
    /// Print percentages with a decimal comma.
    #[arg(long)]
    decimal_comma: bool,
    /// Report timestamp (RFC 3339); now when omitted.
    #[arg(long)]
    timestamp: Option<DateTime<Utc>>,
    /// Run cases one after another.
    #[arg(long)]
    sequential: bool,
}

struct Setup {
    config: AppConfig,
    corpus: Corpus,
    pipeline: Pipeline,
    opts: RunOptions,
    sep: DecimalSeparator,
    stamp: DateTime<Utc>,
}

fn setup(common: &Common) -> Result<Setup> {
    let config = AppConfig::load(common.config.as_deref())?;
    let corpus = match &common.corpus {
        Some(p) => Corpus::load(p).with_context(|| format!("loading corpus {}", p.display()))?,
        None => Corpus::bundled(),
    };
    let jira = match common.fixture.as_ref().or(config.jira.fixture.as_ref()) {
        Some(p) => MockJira::new(load_fixture(p).with_context(|| format!("loading fixture {}", p.display()))?),
        None => MockJira::bundled(),
    };
    let stale = corpus.stale_cases(&jira.fixture());
    if !stale.is_empty() {
        bail!("corpus does not match the fixture: {}", stale.join("; "));
    }
    let kit = load_kit(&config)?;
    let llm = build_backend(&common.backend, &config, &kit, &corpus, common.seed)?;
    let lint = jira.fixture().lint_context();
    let pipeline = Pipeline::new(Arc::new(kit), llm, Arc::new(jira), lint).with_prices(config.prices.clone());
    let mut opts = RunOptions::default();
    if let Some(m) = &common.model {
        opts.model = m.clone();
    }
    if common.sequential {
        opts.execution = jiragpt_core::par::Execution::Sequential;
    }
    Ok(Setup {
        sep: if common.decimal_comma { DecimalSeparator::Comma } else { DecimalSeparator::Dot },
        stamp: common.timestamp.unwrap_or_else(Utc::now),
        config,
        corpus,
        pipeline,
        opts,
    })
}

pub fn run(cmd: EvalCommand) -> Result<ExitCode> {
    let (report, incomplete, out) = match cmd {
        EvalCommand::Ablation { common, temperature, variants } => {
            let s = setup(&common)?;
            let variants = if variants.is_empty() { Variant::ALL.to_vec() } else { variants };
            let runs = run_ablation(&s.pipeline, &s.corpus, &variants, Temperature::new(temperature)?, &s.opts);
            let incomplete = runs.iter().filter(|r| r.incomplete).count();
            (ablation_report(&runs, s.sep, s.stamp), incomplete, common.out)
        }
        EvalCommand::Sweep { common, variant, repetitions } => {
            let s = setup(&common)?;
            let kit = s.pipeline.kit.clone();
            let backend_for = |r: u32| -> Arc<dyn ChatBackend> {
                build_backend(&common.backend, &s.config, &kit, &s.corpus, common.seed + u64::from(r))
                    .expect("backend spec was accepted once already")
            };
            let sweep = run_temperature_sweep(
                &s.pipeline,
                &s.corpus,
                variant,
                &Temperature::sweep(),
                repetitions,
                &backend_for,
                &s.opts,
            );
            let incomplete = sweep.runs.iter().filter(|r| r.incomplete).count();
            (sweep_report(&sweep, s.sep, s.stamp), incomplete, common.out)
        }
    };
    let (csv, txt) = report.write(&out).with_context(|| format!("writing report to {}", out.display()))?;
    print!("{}", report.summary);
    eprintln!("wrote {} and {}", csv.display(), txt.display());
    if incomplete > 0 {
        eprintln!("{incomplete} run(s) aborted after repeated backend failures");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
