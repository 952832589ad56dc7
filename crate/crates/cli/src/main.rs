//! `semtopic` — knowledge-base-enriched topic modeling from the command
//! line. The CLI is a client of the HTTP service: with `--server` it talks
//! to a running instance, otherwise it spins one up in-process on an
//! ephemeral port and drives it over localhost.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use semtopic_client::Client;
use semtopic_core::api::RunRequest;
use semtopic_core::config::{FixtureMode, PipelineConfig};
use semtopic_core::pipeline::{load_model, ComparisonReport, RunManifest};
use semtopic_service::AppState;

#[derive(Parser)]
#[command(
    name = "semtopic",
    version,
    about = "Entity-enriched LDA topic modeling over a Spotlight-compatible annotator and a SPARQL knowledge base"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline: read, annotate, enrich, tag, preprocess, fit, render.
    Run(RunArgs),
    /// Compare a plain model with an enriched one.
    Compare(CompareArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input text file; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Enrich the text with knowledge-base tags (default).
    #[arg(long, conflicts_with = "no_enrich")]
    enrich: bool,
    /// Plain LDA over the raw text; skips annotation entirely.
    #[arg(long)]
    no_enrich: bool,
    /// Fixture store directory for record/replay modes.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// How HTTP requests are satisfied: live, record or replay.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<FixtureMode>,
    /// Number of topics K.
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Gibbs sweeps.
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Terms per topic in the table and summaries.
    #[arg(long = "top-n")]
    top_n: Option<usize>,
    /// Use a running service instead of an in-process one. Input and
    /// output paths are then interpreted on the server's filesystem.
    #[arg(long)]
    server: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Plain model dump (model.json of a --no-enrich run).
    #[arg(long)]
    plain: PathBuf,
    /// Enriched model dump.
    #[arg(long)]
    enriched: PathBuf,
    /// Pooled top-N terms to compare.
    #[arg(short, default_value_t = 10)]
    n: usize,
    /// Print the raw report as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    server: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8642")]
    addr: std::net::SocketAddr,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<FixtureMode, String> {
    match s {
        "live" => Ok(FixtureMode::Live),
        "record" => Ok(FixtureMode::Record),
        "replay" => Ok(FixtureMode::Replay),
        other => Err(format!("unknown mode {other:?}; expected live, record or replay")),
    }
}

fn fail(code: i32, message: impl std::fmt::Display) -> ! {
    eprintln!("error: {message}");
    std::process::exit(code);
}

fn load_config(path: Option<&Path>) -> PipelineConfig {
    match path {
        Some(p) => PipelineConfig::load(p).unwrap_or_else(|e| fail(e.exit_code(), e)),
        None => {
            let mut cfg = PipelineConfig::default();
            cfg.apply_env_overrides();
            cfg
        }
    }
}

fn absolutize(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(path)).unwrap_or_else(|_| path.to_path_buf())
    }
}

/// Connect to --server or start an in-process service to talk to.
async fn client_for(server: Option<&str>, cfg: &PipelineConfig) -> Client {
    match server {
        Some(url) => Client::new(url),
        None => {
            let state = AppState::new(cfg.clone());
            let (addr, _handle) = semtopic_service::bind_ephemeral(state)
                .await
                .unwrap_or_else(|e| fail(3, format!("failed to start in-process service: {e}")));
            Client::new(format!("http://{addr}"))
        }
    }
}

fn apply_run_flags(cfg: &mut PipelineConfig, args: &RunArgs) {
    if let Some(dir) = &args.fixtures {
        cfg.fixture_dir = Some(absolutize(dir));
    }
    if let Some(mode) = args.mode {
        cfg.fixture_mode = mode;
    }
    if let Some(k) = args.topics {
        cfg.lda.topics = k;
    }
    if let Some(alpha) = args.alpha {
        cfg.lda.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        cfg.lda.beta = beta;
    }
    if let Some(iters) = args.iters {
        cfg.lda.iterations = iters;
    }
    if let Some(seed) = args.seed {
        cfg.lda.seed = seed;
    }
    if let Some(top_n) = args.top_n {
        cfg.lda.top_n = top_n;
        cfg.render.top_n = top_n;
    }
}

fn print_manifest(manifest: &RunManifest) {
    println!(
        "run complete ({})",
        if manifest.enriched { "enriched" } else { "plain" }
    );
    println!("  inputs:");
    for input in &manifest.inputs {
        println!("    {} ({})", input.path.display(), &input.sha256[..12]);
    }
    println!("  outputs:");
    for path in &manifest.outputs {
        println!("    {}", path.display());
    }
    if !manifest.fixtures_used.is_empty() {
        println!("  fixtures used: {}", manifest.fixtures_used.len());
    }
    let noisy: Vec<String> = manifest
        .warnings
        .iter()
        .filter(|(_, &count)| count > 0)
        .map(|(k, count)| format!("{k}={count}"))
        .collect();
    if !noisy.is_empty() {
        println!("  warnings: {}", noisy.join(", "));
    }
    let total_ms: u64 = manifest.timings_ms.values().sum();
    println!("  took {total_ms} ms");
}

fn print_report(report: &ComparisonReport) {
    println!("plain pooled top-{}:", report.top_n);
    for tw in &report.plain_top {
        println!("  {:<24} {:.6}", tw.term, tw.weight);
    }
    println!("enriched pooled top-{}:", report.top_n);
    for tw in &report.enriched_top {
        println!("  {:<24} {:.6}", tw.term, tw.weight);
    }
    if report.enriched_only.is_empty() {
        println!("enriched-only terms: none");
    } else {
        println!("enriched-only terms: {}", report.enriched_only.join(", "));
    }
    if report.kb_terms.is_empty() {
        println!("knowledge-base terms absent from the plain corpus: none");
    } else {
        println!(
            "knowledge-base terms absent from the plain corpus: {}",
            report.kb_terms.join(", ")
        );
    }
}

async fn cmd_run(args: RunArgs) {
    let mut cfg = load_config(args.config.as_deref());
    apply_run_flags(&mut cfg, &args);
    if let Err(e) = cfg.validate() {
        fail(e.exit_code(), e);
    }
    let client = client_for(args.server.as_deref(), &cfg).await;
    let request = RunRequest {
        input_paths: args.input.iter().map(|p| absolutize(p)).collect(),
        out_dir: absolutize(&args.out),
        enrich: !args.no_enrich,
        config: Some(cfg),
    };
    match client.run(&request).await {
        Ok(manifest) => print_manifest(&manifest),
        Err(e) => fail(e.exit_code(), e),
    }
}

async fn cmd_compare(args: CompareArgs) {
    let plain = load_model(&args.plain).unwrap_or_else(|e| fail(e.exit_code(), e));
    let enriched = load_model(&args.enriched).unwrap_or_else(|e| fail(e.exit_code(), e));
    let cfg = PipelineConfig::default();
    let client = client_for(args.server.as_deref(), &cfg).await;
    match client.compare(plain, enriched, args.n).await {
        Ok(report) => {
            if args.json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print_report(&report);
            }
        }
        Err(e) => fail(e.exit_code(), e),
    }
}

async fn cmd_serve(args: ServeArgs) {
    let cfg = load_config(args.config.as_deref());
    if let Err(e) = cfg.validate() {
        fail(e.exit_code(), e);
    }
    eprintln!("listening on http://{}", args.addr);
    if let Err(e) = semtopic_service::serve(args.addr, AppState::new(cfg)).await {
        fail(3, e);
    }
}

/// Die quietly when stdout's reader goes away (`semtopic run | head`)
/// instead of panicking on the broken pipe, like any other Unix filter.
#[cfg(unix)]
fn restore_default_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn restore_default_sigpipe() {}

#[tokio::main]
async fn main() {
    restore_default_sigpipe();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args).await,
        Command::Compare(args) => cmd_compare(args).await,
        Command::Serve(args) => cmd_serve(args).await,
    }
}
