//! Typed HTTP client for the semtopic service. Thin by design: every
//! method is request serialization, one POST/GET, and error decoding back
//! into the core error kinds.

use semtopic_core::api::*;
use semtopic_core::config::{LdaConfig, PipelineConfig, RenderSpec};
use semtopic_core::document::Document;
use semtopic_core::enrich::EnrichedEntity;
use semtopic_core::error::ErrorKind;
use semtopic_core::lda::TopicModel;
use semtopic_core::pipeline::{ComparisonReport, RunManifest};
use semtopic_core::preprocess::TokenizedDoc;
use semtopic_core::tagger::TaggedDocument;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The request never produced a service response.
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),

    /// The service answered with a typed error body; displayed through
    /// the reconstructed core error so wording matches library use.
    #[error("{}", semtopic_core::error::from_wire(*kind, message.clone()))]
    Api { kind: ErrorKind, message: String },

    /// The response body did not decode as the expected type.
    #[error("malformed service response: {0}")]
    Decode(String),
}

impl ClientError {
    /// Exit code consistent with the core error mapping; transport and
    /// decode failures count as network errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ClientError::Api { kind, .. } => kind.exit_code(),
            ClientError::Transport(_) | ClientError::Decode(_) => ErrorKind::Network.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base_url: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base_url)
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> Result<T> {
        let status = response.status();
        let bytes = response.bytes().await?;
        if status.is_success() {
            serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
        } else {
            let body: ErrorBody = serde_json::from_slice(&bytes).map_err(|e| {
                ClientError::Decode(format!("HTTP {status} with unreadable error body: {e}"))
            })?;
            Err(ClientError::Api { kind: body.error.kind, message: body.error.message })
        }
    }

    async fn text_body(response: reqwest::Response) -> Result<String> {
        let status = response.status();
        let bytes = response.bytes().await?;
        if status.is_success() {
            String::from_utf8(bytes.to_vec()).map_err(|e| ClientError::Decode(e.to_string()))
        } else {
            let body: ErrorBody = serde_json::from_slice(&bytes).map_err(|e| {
                ClientError::Decode(format!("HTTP {status} with unreadable error body: {e}"))
            })?;
            Err(ClientError::Api { kind: body.error.kind, message: body.error.message })
        }
    }

    async fn post_json<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let response = self.http.post(self.url(path)).json(body).send().await?;
        Self::decode(response).await
    }

    pub async fn health(&self) -> Result<HealthResponse> {
        let response = self.http.get(self.url("/v1/health")).send().await?;
        Self::decode(response).await
    }

    pub async fn normalize(&self, text: &str) -> Result<String> {
        let resp: NormalizeResponse = self
            .post_json("/v1/normalize", &NormalizeRequest { text: text.to_string() })
            .await?;
        Ok(resp.normalized)
    }

    pub async fn annotate(
        &self,
        document: Document,
        config: Option<PipelineConfig>,
    ) -> Result<AnnotateResponse> {
        self.post_json("/v1/annotate", &AnnotateRequest { document, config }).await
    }

    /// Parse a raw Spotlight response body without any network use.
    pub async fn parse_annotation(&self, body: Vec<u8>) -> Result<AnnotateResponse> {
        let response = self
            .http
            .post(self.url("/v1/annotate/parse"))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .await?;
        Self::decode(response).await
    }

    pub async fn enrich(
        &self,
        annotations: semtopic_core::spotlight::AnnotationResult,
        config: Option<PipelineConfig>,
    ) -> Result<EnrichResponse> {
        self.post_json("/v1/enrich", &EnrichRequest { annotations, config }).await
    }

    pub async fn tag(&self, document: Document, entities: Vec<EnrichedEntity>) -> Result<TaggedDocument> {
        self.post_json("/v1/tag", &TagRequest { document, entities }).await
    }

    pub async fn strip(&self, tagged: &TaggedDocument) -> Result<String> {
        let resp: StripResponse = self.post_json("/v1/tag/strip", tagged).await?;
        Ok(resp.text)
    }

    pub async fn preprocess(
        &self,
        document_id: &str,
        text: &str,
        config: Option<PipelineConfig>,
    ) -> Result<TokenizedDoc> {
        self.post_json(
            "/v1/preprocess",
            &PreprocessRequest {
                document_id: document_id.to_string(),
                text: text.to_string(),
                config,
            },
        )
        .await
    }

    pub async fn fit(&self, corpus: Vec<TokenizedDoc>, config: LdaConfig) -> Result<TopicModel> {
        self.post_json("/v1/lda/fit", &FitRequest { corpus, config }).await
    }

    pub async fn top_terms(&self, model: TopicModel, topic: usize, n: usize) -> Result<TopTermsResponse> {
        self.post_json("/v1/lda/top-terms", &TopTermsRequest { model, topic, n }).await
    }

    pub async fn perplexity(
        &self,
        model: TopicModel,
        corpus: Vec<TokenizedDoc>,
    ) -> Result<PerplexityResponse> {
        self.post_json("/v1/lda/perplexity", &PerplexityRequest { model, corpus }).await
    }

    pub async fn render_table(&self, model: TopicModel, top_n: usize) -> Result<String> {
        let response = self
            .http
            .post(self.url("/v1/render/table"))
            .json(&TableRequest { model, top_n })
            .send()
            .await?;
        Self::text_body(response).await
    }

    pub async fn render_cloud(&self, model: TopicModel, spec: RenderSpec) -> Result<String> {
        let response = self
            .http
            .post(self.url("/v1/render/cloud"))
            .json(&CloudRequest { model, spec })
            .send()
            .await?;
        Self::text_body(response).await
    }

    pub async fn run(&self, request: &RunRequest) -> Result<RunManifest> {
        self.post_json("/v1/run", request).await
    }

    pub async fn compare(
        &self,
        plain: TopicModel,
        enriched: TopicModel,
        n: usize,
    ) -> Result<ComparisonReport> {
        self.post_json("/v1/compare", &CompareRequest { plain, enriched, n }).await
    }
}
