//! Request and response envelopes for the HTTP service. Kept here so the
//! service and the client share one definition of the wire format.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::config::{LdaConfig, PipelineConfig, RenderSpec};
use crate::document::Document;
use crate::enrich::EnrichedEntity;
use crate::error::ErrorKind;
use crate::lda::TopicModel;
use crate::pipeline::RunOptions;
use crate::preprocess::TokenizedDoc;
use crate::spotlight::AnnotationResult;
use crate::tagger::TaggedDocument;

/// Error body returned by every endpoint on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: WireError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeResponse {
    pub normalized: String,
}

/// Run request: server-side input paths plus the full pipeline config.
/// When `config` is omitted the server's default config applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub input_paths: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub enrich: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

impl RunRequest {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            input_paths: self.input_paths.clone(),
            out_dir: self.out_dir.clone(),
            enrich: self.enrich,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotateRequest {
    pub document: Document,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotateResponse {
    pub result: AnnotationResult,
    pub warnings: std::collections::BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichRequest {
    pub annotations: AnnotationResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichResponse {
    pub entities: Vec<EnrichedEntity>,
    pub failed_lookups: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRequest {
    pub document: Document,
    pub entities: Vec<EnrichedEntity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRequest {
    pub document_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRequest {
    pub corpus: Vec<TokenizedDoc>,
    pub config: LdaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopTermsRequest {
    pub model: TopicModel,
    pub topic: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopTermsResponse {
    pub terms: Vec<crate::pipeline::TermWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityRequest {
    pub model: TopicModel,
    pub corpus: Vec<TokenizedDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRequest {
    pub model: TopicModel,
    pub top_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRequest {
    pub model: TopicModel,
    #[serde(default)]
    pub spec: RenderSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub plain: TopicModel,
    pub enriched: TopicModel,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityResponse {
    pub perplexity: f64,
    pub skipped_tokens: usize,
}

/// Type used on the wire for tagged documents; re-exported for symmetry.
pub type TagResponse = TaggedDocument;
