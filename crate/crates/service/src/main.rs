//! Standalone service binary. The `semtopic` CLI embeds the same router;
//! this entry point exists for deployments that want the service alone.

use std::net::SocketAddr;
use std::path::PathBuf;

use semtopic_core::config::PipelineConfig;
use semtopic_service::{serve, AppState};

fn usage() -> ! {
    eprintln!("usage: semtopic-service [--addr HOST:PORT] [--config FILE]");
    std::process::exit(2);
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .init();

    let mut addr: SocketAddr = "127.0.0.1:8642".parse().unwrap();
    let mut config_path: Option<PathBuf> = None;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--addr" => match args.next().and_then(|a| a.parse().ok()) {
                Some(a) => addr = a,
                None => usage(),
            },
            "--config" => match args.next() {
                Some(p) => config_path = Some(PathBuf::from(p)),
                None => usage(),
            },
            _ => usage(),
        }
    }

    let config = match config_path {
        Some(path) => match PipelineConfig::load(&path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        },
        None => {
            let mut cfg = PipelineConfig::default();
            cfg.apply_env_overrides();
            cfg
        }
    };

    if let Err(e) = serve(addr, AppState::new(config)).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
