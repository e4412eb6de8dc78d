mod eval;
mod query;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use jiragpt_core::mockjira::MockJira;
use jiragpt_http::config::{AppConfig, ENV_MOCKJIRA_TOKEN};
use jiragpt_http::stack::build_pipeline;
use jiragpt_http::{mock_jira_router, serve, service_router, shutdown_signal};
use tracing_subscriber::filter::LevelFilter;

#[derive(Parser)]
#[command(name = "jiragpt", version, about = "Ask Jira questions in natural language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one question and print the result.
    Query(query::QueryArgs),
    /// Run the HTTP query service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the mock Jira server over a fixture.
    MockJira {
        #[arg(long, default_value_t = 8081)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Fixture JSON; the bundled 20-issue project when omitted.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Accuracy evaluation over a question corpus.
    #[command(subcommand)]
    Eval(eval::EvalCommand),
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")
}

fn run_serve(port: Option<u16>, config: Option<PathBuf>) -> Result<()> {
    let mut config = AppConfig::load(config.as_deref())?;
    if let Some(p) = port {
        config.bind.set_port(p);
    }
    let pipeline = build_pipeline(&config)?;
    let bind = config.bind;
    let router = service_router(pipeline, config);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        tracing::info!("query service listening on http://{bind}");
        serve(listener, router, shutdown_signal()).await?;
        Ok(())
    })
}

fn run_mock_jira(host: &str, port: u16, fixture: Option<PathBuf>) -> Result<()> {
    let jira = match fixture {
        Some(p) => MockJira::new(
            jiragpt_core::fixture::load_fixture(&p).with_context(|| format!("loading {}", p.display()))?,
        ),
        None => MockJira::bundled(),
    };
    let token = std::env::var(ENV_MOCKJIRA_TOKEN).ok().filter(|t| !t.is_empty());
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bind address")?;
    let router = mock_jira_router(jira, token);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        tracing::info!("mock Jira listening on http://{addr}");
        serve(listener, router, shutdown_signal()).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_max_level(
            std::env::var("RUST_LOG")
                .ok()
                .and_then(|v| v.parse::<LevelFilter>().ok())
                .unwrap_or(LevelFilter::INFO),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Query(args) => query::run(args),
        Command::Serve { port, config } => run_serve(port, config).map(|_| ExitCode::SUCCESS),
        Command::MockJira { port, host, fixture } => run_mock_jira(&host, port, fixture).map(|_| ExitCode::SUCCESS),
        Command::Eval(cmd) => eval::run(cmd),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
