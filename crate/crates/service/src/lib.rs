//! HTTP/JSON service exposing the pipeline operations.
//!
//! Every endpoint is a stateless wrapper over `semtopic-core`; the only
//! server state is the default [`PipelineConfig`] applied when a request
//! does not carry its own. Errors come back as a JSON body
//! `{"error": {"kind", "message"}}` with a status derived from the kind,
//! so clients can reconstruct the typed error.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use semtopic_core::api::*;
use semtopic_core::config::PipelineConfig;
use semtopic_core::document::normalize;
use semtopic_core::error::{Error, ErrorKind};
use semtopic_core::http::make_transport;
use semtopic_core::lda;
use semtopic_core::pipeline::{self, compare_models, run_pipeline, ComparisonReport, RunManifest};
use semtopic_core::preprocess::{preprocess_document, StopwordList, TokenizedDoc};
use semtopic_core::render;
use semtopic_core::spotlight::parse_annotation_response;
use semtopic_core::tagger::{strip_tags, tag_text, TaggedDocument};

#[derive(Clone)]
pub struct AppState {
    pub default_config: Arc<PipelineConfig>,
}

impl AppState {
    pub fn new(default_config: PipelineConfig) -> Self {
        AppState { default_config: Arc::new(default_config) }
    }

    fn config(&self, request_config: Option<PipelineConfig>) -> PipelineConfig {
        request_config.unwrap_or_else(|| (*self.default_config).clone())
    }
}

/// Error wrapper so core errors map onto HTTP responses.
pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

fn status_for(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Input | ErrorKind::Encoding | ErrorKind::Parse | ErrorKind::Io => {
            StatusCode::BAD_REQUEST
        }
        ErrorKind::Contract => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorKind::FixtureMiss => StatusCode::FAILED_DEPENDENCY,
        ErrorKind::Network => StatusCode::BAD_GATEWAY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let kind = self.0.kind();
        let message = match &self.0 {
            // Carry the bare hash so clients can reconstruct the miss.
            Error::FixtureMiss { hash } => hash.clone(),
            other => other.to_string(),
        };
        let body = ErrorBody { error: WireError { kind, message } };
        (status_for(kind), Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn build_router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/normalize", post(normalize_text))
        .route("/v1/annotate", post(annotate_document))
        .route("/v1/annotate/parse", post(parse_annotation))
        .route("/v1/enrich", post(enrich_annotations))
        .route("/v1/tag", post(tag_document))
        .route("/v1/tag/strip", post(strip_tagged))
        .route("/v1/preprocess", post(preprocess_text))
        .route("/v1/lda/fit", post(fit_model))
        .route("/v1/lda/top-terms", post(model_top_terms))
        .route("/v1/lda/perplexity", post(model_perplexity))
        .route("/v1/render/table", post(render_table))
        .route("/v1/render/cloud", post(render_cloud))
        .route("/v1/run", post(run))
        .route("/v1/compare", post(compare))
        .with_state(state)
}

/// Bind and serve until the task is dropped or the process exits.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("semtopic service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, build_router(state)).await
}

/// Bind an ephemeral localhost port and serve in a background task. Used
/// by the CLI (which talks to itself over HTTP) and by tests.
pub async fn bind_ephemeral(
    state: AppState,
) -> std::io::Result<(std::net::SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", 0)).await?;
    let addr = listener.local_addr()?;
    let router = build_router(state);
    let handle = tokio::spawn(async move {
        let _ = axum::serve(listener, router).await;
    });
    Ok((addr, handle))
}

async fn health() -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn normalize_text(Json(req): Json<NormalizeRequest>) -> Json<NormalizeResponse> {
    Json(NormalizeResponse { normalized: normalize(&req.text) })
}

async fn annotate_document(
    State(state): State<AppState>,
    Json(req): Json<AnnotateRequest>,
) -> ApiResult<Json<AnnotateResponse>> {
    let cfg = state.config(req.config);
    cfg.validate()?;
    let transport = make_transport(&cfg)?;
    let (result, warnings) =
        semtopic_core::spotlight::annotate(&req.document, &cfg, transport.as_ref()).await?;
    let mut map = std::collections::BTreeMap::new();
    map.insert("skipped_resources".to_string(), warnings.skipped_resources);
    map.insert("dropped_mismatches".to_string(), warnings.dropped_mismatches);
    map.insert("dropped_overlaps".to_string(), warnings.dropped_overlaps);
    Ok(Json(AnnotateResponse { result, warnings: map }))
}

/// Pure parse of a Spotlight response body; the raw bytes are the request
/// body, not JSON-wrapped.
async fn parse_annotation(body: Bytes) -> ApiResult<Json<AnnotateResponse>> {
    let parsed = parse_annotation_response("inline", &body)?;
    let mut map = std::collections::BTreeMap::new();
    map.insert("skipped_resources".to_string(), parsed.skipped_resources);
    Ok(Json(AnnotateResponse { result: parsed.result, warnings: map }))
}

async fn enrich_annotations(
    State(state): State<AppState>,
    Json(req): Json<EnrichRequest>,
) -> ApiResult<Json<EnrichResponse>> {
    let cfg = state.config(req.config);
    cfg.validate()?;
    let transport = make_transport(&cfg)?;
    let (entities, warnings) =
        semtopic_core::enrich::enrich(&req.annotations, &cfg, transport.as_ref()).await?;
    Ok(Json(EnrichResponse { entities, failed_lookups: warnings.failed_lookups }))
}

async fn tag_document(Json(req): Json<TagRequest>) -> ApiResult<Json<TaggedDocument>> {
    Ok(Json(tag_text(&req.document, &req.entities)?))
}

async fn strip_tagged(Json(tagged): Json<TaggedDocument>) -> ApiResult<Json<StripResponse>> {
    Ok(Json(StripResponse { text: strip_tags(&tagged)? }))
}

async fn preprocess_text(
    State(state): State<AppState>,
    Json(req): Json<PreprocessRequest>,
) -> ApiResult<Json<TokenizedDoc>> {
    let cfg = state.config(req.config);
    let stopwords = StopwordList::for_config(&cfg)?;
    Ok(Json(preprocess_document(&req.document_id, &req.text, &stopwords)))
}

async fn fit_model(Json(req): Json<FitRequest>) -> ApiResult<Json<lda::TopicModel>> {
    // Collapsed Gibbs is CPU-bound; keep it off the async workers.
    let model = tokio::task::spawn_blocking(move || lda::fit(&req.corpus, &req.config))
        .await
        .map_err(|e| Error::Contract(format!("fit task panicked: {e}")))??;
    Ok(Json(model))
}

async fn model_top_terms(Json(req): Json<TopTermsRequest>) -> ApiResult<Json<TopTermsResponse>> {
    let terms = lda::top_terms(&req.model, req.topic, req.n)?
        .into_iter()
        .map(|(term, weight)| pipeline::TermWeight { term, weight })
        .collect();
    Ok(Json(TopTermsResponse { terms }))
}

async fn model_perplexity(
    Json(req): Json<PerplexityRequest>,
) -> ApiResult<Json<PerplexityResponse>> {
    let p = lda::perplexity(&req.model, &req.corpus)?;
    Ok(Json(PerplexityResponse { perplexity: p.value, skipped_tokens: p.skipped_tokens }))
}

async fn render_table(Json(req): Json<TableRequest>) -> ApiResult<Response> {
    let body = render::table_string(&req.model, req.top_n);
    Ok(([(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")], body).into_response())
}

async fn render_cloud(Json(req): Json<CloudRequest>) -> ApiResult<Response> {
    let svg = render::cloud_svg_string(&req.model, &req.spec)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn run(
    State(state): State<AppState>,
    Json(req): Json<RunRequest>,
) -> ApiResult<Json<RunManifest>> {
    let cfg = state.config(req.config.clone());
    let manifest = run_pipeline(&cfg, &req.options()).await?;
    Ok(Json(manifest))
}

async fn compare(Json(req): Json<CompareRequest>) -> ApiResult<Json<ComparisonReport>> {
    Ok(Json(compare_models(&req.plain, &req.enriched, req.n)))
}
