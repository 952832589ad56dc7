//! End-to-end over real TCP: the typed client against an ephemeral
//! service instance, walking the whole pipeline stage by stage and then
//! through the one-shot run endpoint.

use std::path::PathBuf;

use semtopic_client::{Client, ClientError};
use semtopic_core::api::RunRequest;
use semtopic_core::config::{FixtureMode, LdaConfig, PipelineConfig};
use semtopic_core::document::Document;
use semtopic_core::error::ErrorKind;
use semtopic_service::{bind_ephemeral, AppState};

fn core_fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn replay_config() -> PipelineConfig {
    PipelineConfig {
        fixture_mode: FixtureMode::Replay,
        fixture_dir: Some(core_fixtures().join("store")),
        lda: LdaConfig { topics: 2, iterations: 300, seed: 11, ..Default::default() },
        ..Default::default()
    }
}

async fn client() -> Client {
    let (addr, _handle) = bind_ephemeral(AppState::new(replay_config())).await.unwrap();
    Client::new(format!("http://{addr}"))
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stage_by_stage_over_http() {
    let client = client().await;

    let health = client.health().await.unwrap();
    assert_eq!(health.status, "ok");

    assert_eq!(client.normalize("a  b\t c ").await.unwrap(), "a b c");

    // Parse the vendored Spotlight body.
    let sample = std::fs::read(core_fixtures().join("spotlight_sample.json")).unwrap();
    let parsed = client.parse_annotation(sample).await.unwrap();
    assert_eq!(parsed.result.annotations.len(), 3);

    // Replay-mode annotate -> enrich -> tag -> strip on the example text.
    let text = std::fs::read_to_string(core_fixtures().join("obama_visit.txt")).unwrap();
    let document = Document::new("obama_visit", text);
    let annotated = client.annotate(document.clone(), None).await.unwrap();
    assert_eq!(annotated.result.annotations.len(), 7);

    let enriched = client.enrich(annotated.result, None).await.unwrap();
    assert_eq!(enriched.entities.len(), 7);
    assert_eq!(enriched.failed_lookups, 0);
    assert!(enriched.entities[5].tags.is_empty(), "chancellor row is tagless");

    let tagged = client.tag(document.clone(), enriched.entities).await.unwrap();
    assert!(tagged.tagged_text.starts_with("Barack Obama [Barack_Obama, Politician,"));
    assert_eq!(client.strip(&tagged).await.unwrap(), document.normalized_text);

    // Preprocess both variants and fit models over HTTP.
    let enriched_tokens = client.preprocess("d", &tagged.tagged_text, None).await.unwrap();
    let plain_tokens = client.preprocess("d", &document.normalized_text, None).await.unwrap();
    assert!(enriched_tokens.tokens.iter().filter(|t| *t == "politician").count() >= 3);

    let lda = LdaConfig { topics: 2, iterations: 300, seed: 11, ..Default::default() };
    let enriched_model = client.fit(vec![enriched_tokens.clone()], lda.clone()).await.unwrap();
    let plain_model = client.fit(vec![plain_tokens.clone()], lda.clone()).await.unwrap();

    let top = client.top_terms(enriched_model.clone(), 0, 5).await.unwrap();
    assert_eq!(top.terms.len(), 5);

    let perplexity = client
        .perplexity(enriched_model.clone(), vec![enriched_tokens])
        .await
        .unwrap();
    assert!(perplexity.perplexity.is_finite() && perplexity.perplexity > 1.0);
    assert_eq!(perplexity.skipped_tokens, 0);

    let table = client.render_table(enriched_model.clone(), 5).await.unwrap();
    assert!(table.starts_with("topic\tterm\tweight\n"));

    let svg = client
        .render_cloud(enriched_model.clone(), Default::default())
        .await
        .unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<text"));
    assert!(
        svg.contains(">politician</text>"),
        "enriched cloud should render the knowledge-base term"
    );

    let report = client.compare(plain_model, enriched_model, 10).await.unwrap();
    assert!(report.has_kb_terms());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn run_endpoint_writes_outputs() {
    let client = client().await;
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let request = RunRequest {
        input_paths: vec![core_fixtures().join("obama_visit.txt")],
        out_dir: out.clone(),
        enrich: true,
        config: Some(replay_config()),
    };
    let manifest = client.run(&request).await.unwrap();
    assert!(manifest.enriched);
    assert_eq!(manifest.fixtures_used.len(), 7);
    for file in ["obama_visit.tagged.txt", "model.json", "topics.tsv", "cloud.svg", "manifest.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn api_errors_reconstruct_kind_and_exit_code() {
    let client = client().await;
    let tmp = tempfile::tempdir().unwrap();
    let empty_store = tmp.path().join("empty");
    std::fs::create_dir_all(&empty_store).unwrap();
    let text = std::fs::read_to_string(core_fixtures().join("obama_visit.txt")).unwrap();
    let cfg = PipelineConfig {
        fixture_mode: FixtureMode::Replay,
        fixture_dir: Some(empty_store),
        ..Default::default()
    };
    let err = client
        .annotate(Document::new("d", text), Some(cfg))
        .await
        .unwrap_err();
    match &err {
        ClientError::Api { kind, message } => {
            assert_eq!(*kind, ErrorKind::FixtureMiss);
            assert_eq!(message.len(), 64);
        }
        other => panic!("expected Api error, got {other:?}"),
    }
    assert_eq!(err.exit_code(), 4);
}
