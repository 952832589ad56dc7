//! Client for a DBpedia-Spotlight-compatible `annotate` endpoint.
//!
//! Spotlight responses encode numbers as JSON strings in some versions and
//! as native numbers in others; the parser accepts both. Resources that
//! are malformed or whose surface form does not match the document at the
//! claimed offset are skipped with a warning instead of aborting the run.

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::http::{HttpMethod, HttpRequestSpec, HttpTransport};

/// One recognized entity mention. `offset` indexes Unicode scalar values
/// in the source document's normalized text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityAnnotation {
    pub uri: String,
    pub surface_form: String,
    pub offset: usize,
    pub support: u64,
    /// Raw comma-separated `@types` string, carried for diagnostics; the
    /// authoritative tag list comes from the knowledge-base enrichment.
    pub types_raw: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percentage_of_second_rank: Option<f64>,
}

impl EntityAnnotation {
    pub fn surface_chars(&self) -> usize {
        self.surface_form.chars().count()
    }

    /// One past the last character of the mention.
    pub fn end(&self) -> usize {
        self.offset + self.surface_chars()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationResult {
    pub document_id: String,
    /// Sorted by offset ascending; disjoint after [`resolve_overlaps`].
    pub annotations: Vec<EntityAnnotation>,
}

/// Counters for per-resource problems that were logged but not fatal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationWarnings {
    /// Resources missing @URI/@surfaceForm/@offset in the response.
    pub skipped_resources: u64,
    /// Annotations whose surface form did not match the document text.
    pub dropped_mismatches: u64,
    /// Annotations discarded by overlap resolution.
    pub dropped_overlaps: u64,
}

/// Build the `annotate` request as a pure value. Short texts go as a GET
/// query string; texts above the configured threshold switch to a POST
/// form body; texts above the hard cap are rejected.
pub fn build_annotate_request(doc: &Document, cfg: &PipelineConfig) -> Result<HttpRequestSpec> {
    let text = doc.normalized_text.as_str();
    if text.is_empty() {
        return Err(Error::Input(format!(
            "document {} has no text to annotate",
            doc.id
        )));
    }
    let chars = text.chars().count();
    if chars > cfg.max_text_chars {
        return Err(Error::Input(format!(
            "document {} has {chars} characters, above the annotation cap of {}",
            doc.id, cfg.max_text_chars
        )));
    }
    let method = if chars > cfg.post_threshold_chars {
        HttpMethod::Post
    } else {
        HttpMethod::Get
    };
    Ok(HttpRequestSpec::new(
        method,
        annotate_url(&cfg.annotator_endpoint),
        vec![
            ("text".into(), text.to_string()),
            ("confidence".into(), format_float(cfg.confidence)),
            ("support".into(), cfg.support.to_string()),
        ],
        "application/json",
    ))
}

fn annotate_url(endpoint: &str) -> String {
    format!("{}/annotate", endpoint.trim_end_matches('/'))
}

/// `0.5` not `0.50`; matches how Spotlight documents the parameter.
fn format_float(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Outcome of parsing one annotation response body.
#[derive(Debug, Clone)]
pub struct ParsedAnnotations {
    pub result: AnnotationResult,
    pub skipped_resources: u64,
}

/// Extract the `@resources` array from a Spotlight response. A body with
/// no `@resources` key is a text without entities, not an error.
pub fn parse_annotation_response(document_id: &str, body: &[u8]) -> Result<ParsedAnnotations> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| Error::Parse {
        position: byte_position(body, e.line(), e.column()),
        message: format!("annotation response is not valid JSON: {e}"),
    })?;

    let mut annotations = Vec::new();
    let mut skipped = 0u64;
    if let Some(resources) = value.get("@resources") {
        let resources = resources.as_array().ok_or_else(|| Error::Parse {
            position: 0,
            message: "@resources is not an array".into(),
        })?;
        for resource in resources {
            match parse_resource(resource) {
                Some(ann) => annotations.push(ann),
                None => {
                    skipped += 1;
                    tracing::warn!(document_id, "skipping malformed @resources entry");
                }
            }
        }
    }
    annotations.sort_by_key(|a| a.offset);
    Ok(ParsedAnnotations {
        result: AnnotationResult { document_id: document_id.to_string(), annotations },
        skipped_resources: skipped,
    })
}

fn parse_resource(resource: &serde_json::Value) -> Option<EntityAnnotation> {
    let uri = resource.get("@URI")?.as_str()?.to_string();
    if uri.is_empty() {
        return None;
    }
    let surface_form = resource.get("@surfaceForm")?.as_str()?.to_string();
    let offset = flexible_u64(resource.get("@offset")?)? as usize;
    let support = resource.get("@support").and_then(flexible_u64).unwrap_or(0);
    let types_raw = resource
        .get("@types")
        .and_then(|v| v.as_str())
        .unwrap_or("")
        .to_string();
    Some(EntityAnnotation {
        uri,
        surface_form,
        offset,
        support,
        types_raw,
        similarity_score: resource.get("@similarityScore").and_then(flexible_f64),
        percentage_of_second_rank: resource
            .get("@percentageOfSecondRank")
            .and_then(flexible_f64),
    })
}

/// Accepts `"37"` and `37` alike.
fn flexible_u64(v: &serde_json::Value) -> Option<u64> {
    match v {
        serde_json::Value::Number(n) => n.as_u64(),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn flexible_f64(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn byte_position(body: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut pos = 0;
    for (i, &b) in body.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if b == b'\n' {
            remaining -= 1;
            pos = i + 1;
        }
    }
    (pos + column.saturating_sub(1)).min(body.len())
}

/// Drop annotations whose claimed span does not reproduce the surface form
/// in the document's normalized text.
pub fn validate_against(doc: &Document, parsed: ParsedAnnotations) -> (AnnotationResult, AnnotationWarnings) {
    let chars: Vec<char> = doc.normalized_text.chars().collect();
    let mut warnings = AnnotationWarnings {
        skipped_resources: parsed.skipped_resources,
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(parsed.result.annotations.len());
    for ann in parsed.result.annotations {
        let end = ann.offset + ann.surface_chars();
        let matches = end <= chars.len()
            && chars[ann.offset..end].iter().copied().eq(ann.surface_form.chars());
        if matches {
            kept.push(ann);
        } else {
            warnings.dropped_mismatches += 1;
            tracing::warn!(
                document_id = parsed.result.document_id,
                surface = ann.surface_form,
                offset = ann.offset,
                "annotation does not match document text; dropping"
            );
        }
    }
    (
        AnnotationResult { document_id: parsed.result.document_id, annotations: kept },
        warnings,
    )
}

/// Reduce overlapping spans to a disjoint set. Among overlaps the span
/// with greater support wins, then the longer surface form, then the lower
/// offset. Identical duplicates collapse to one. Input must be sorted by
/// offset; output is sorted and pairwise disjoint.
pub fn resolve_overlaps(annotations: Vec<EntityAnnotation>) -> Vec<EntityAnnotation> {
    let mut kept: Vec<EntityAnnotation> = Vec::with_capacity(annotations.len());
    for ann in annotations {
        match kept.last() {
            Some(last) if ann.offset < last.end() => {
                if prefer_over(&ann, last) {
                    kept.pop();
                    kept.push(ann);
                }
            }
            _ => kept.push(ann),
        }
    }
    kept
}

/// True when `candidate` should replace `incumbent` among overlapping
/// spans. On a full tie the incumbent stays, which also deduplicates
/// identical annotations.
fn prefer_over(candidate: &EntityAnnotation, incumbent: &EntityAnnotation) -> bool {
    let key = |a: &EntityAnnotation| (a.support, a.surface_chars(), std::cmp::Reverse(a.offset));
    key(candidate) > key(incumbent)
}

/// Full annotation step: build the request, run it through the transport,
/// parse, validate against the document, and resolve overlaps.
pub async fn annotate(
    doc: &Document,
    cfg: &PipelineConfig,
    transport: &dyn HttpTransport,
) -> Result<(AnnotationResult, AnnotationWarnings)> {
    let spec = build_annotate_request(doc, cfg)?;
    let response = transport.execute(&spec).await?;
    if response.status != 200 {
        return Err(Error::Network(format!(
            "annotation endpoint returned HTTP {} for document {}",
            response.status, doc.id
        )));
    }
    let parsed = parse_annotation_response(&doc.id, &response.body)?;
    let (validated, mut warnings) = validate_against(doc, parsed);
    let before = validated.annotations.len();
    let resolved = resolve_overlaps(validated.annotations);
    warnings.dropped_overlaps = (before - resolved.len()) as u64;
    Ok((
        AnnotationResult { document_id: validated.document_id, annotations: resolved },
        warnings,
    ))
}
