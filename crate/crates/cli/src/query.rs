use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use jiragpt_core::llm::Temperature;
use jiragpt_core::pipeline::{account, Mode, QuerySpec, Warning};
use jiragpt_core::prompt::Variant;
use jiragpt_http::config::AppConfig;
use jiragpt_http::stack::build_pipeline;

#[derive(Args)]
pub struct QueryArgs {
    /// The question, in natural language.
    text: String,
    /// Run all three phases and print an answer.
    #[arg(long)]
    complex: bool,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long)]
    model: Option<String>,
    /// Phase-1 template: B1, B1-2, B1-3 or full.
    #[arg(long, default_value = "full")]
    template: Variant,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured LLM backend (`live` or `scripted:<behavior>`).
    #[arg(long)]
    backend: Option<String>,
    /// Search an in-process copy of the bundled fixture instead of Jira.
    #[arg(long)]
    embedded: bool,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
}

pub fn run(args: QueryArgs) -> Result<ExitCode> {
    let mut config = AppConfig::load(args.config.as_deref())?;
    if let Some(b) = args.backend {
        config.llm.backend = b;
    }
    config.jira.embedded |= args.embedded;
    config.validate()?;
    let pipeline = build_pipeline(&config)?;
    let model = args.model.unwrap_or_else(|| config.default_model.clone());
    let mode = if args.complex { Mode::Complex } else { Mode::Basic };
    let spec = QuerySpec::new(args.text, mode, &model)
        .temperature(Temperature::new(args.temperature)?)
        .variant(args.template);

    let result = match pipeline.run(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            if let jiragpt_core::pipeline::PipelineError::JqlGenerationFailed { completions, .. } = &e {
                for c in completions {
                    eprintln!("  completion: {c}");
                }
            }
            return Ok(ExitCode::FAILURE);
        }
    };
    let cost = account(&result, &model, &config.prices);
    if args.json {
        let body = serde_json::json!({ "result": result, "usage": cost });
        println!("{}", serde_json::to_string_pretty(&body)?);
        return Ok(ExitCode::SUCCESS);
    }

    let base = config.jira.base_url.trim_end_matches('/');
    for issue in &result.issues {
        println!("{:<9} {:<12} {}  {base}/browse/{}", issue.key, issue.status, issue.summary, issue.key);
    }
    eprintln!("jql: {}", result.jql);
    eprintln!("{} issue(s)", result.issues.len());
    if let Some(answer) = &result.answer_text {
        eprintln!("answer: {answer}");
    }
    for w in &result.warnings {
        match w {
            Warning::Lint(f) => eprintln!("warning: {} on {} `{}`", f.code.as_str(), f.field, f.value),
            Warning::Retried { error, .. } => eprintln!("warning: retried after: {error}"),
            Warning::FieldSelectionFallback { .. } => eprintln!("warning: field selection fell back to all fields"),
            Warning::Truncated { kept, total } => eprintln!("warning: answer saw {kept} of {total} issues"),
        }
    }
    let price = match cost.cost.amount() {
        Some(x) => format!("{x:.6} {}", cost.currency),
        None => format!("unknown (no price for {model})"),
    };
    eprintln!(
        "tokens: {} prompt + {} completion, cost {price}",
        cost.prompt_tokens, cost.completion_tokens
    );
    Ok(ExitCode::SUCCESS)
}
