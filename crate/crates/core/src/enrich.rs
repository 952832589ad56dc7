//! SPARQL enrichment: for every annotated entity, fetch its `rdf:type`
//! objects and hypernym from the knowledge base and derive the ordered tag
//! list spliced into the text by the tagger.

use std::collections::HashMap;
use std::sync::Mutex;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::http::{HttpMethod, HttpRequestSpec, HttpTransport};
use crate::spotlight::AnnotationResult;

const HYPERNYM_PROPERTY: &str = "http://purl.org/linguistics/gold/hypernym";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const SPARQL_RESULTS_JSON: &str = "application/sparql-results+json";

/// Type namespaces whose local names become tags. Everything else
/// (Wikidata Q-ids, YAGO classes, ...) is noise in a human-readable tag
/// list and is dropped.
const KEPT_NAMESPACES: [&str; 4] = [
    "http://dbpedia.org/ontology/",
    "https://dbpedia.org/ontology/",
    "http://schema.org/",
    "https://schema.org/",
];

/// foaf:Person is kept as the tag "Person" even though the rest of the
/// foaf namespace is not.
const FOAF_PERSON: [&str; 2] = [
    "http://xmlns.com/foaf/0.1/Person",
    "https://xmlns.com/foaf/0.1/Person",
];

/// An annotation joined with its knowledge-base tags. One row per mention:
/// a URI mentioned twice yields two rows with identical tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedEntity {
    pub surface_form: String,
    pub uri: String,
    pub offset: usize,
    /// Ordered, possibly empty. When non-empty, `tags[0]` is the local
    /// name of `uri`.
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichWarnings {
    /// URIs whose SPARQL lookup failed after retries; their mentions got
    /// empty tag lists.
    pub failed_lookups: u64,
}

/// A SPARQL SELECT against one endpoint, convertible into a request spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparqlQuerySpec {
    pub endpoint: String,
    pub query: String,
}

impl SparqlQuerySpec {
    pub fn to_request(&self) -> HttpRequestSpec {
        HttpRequestSpec::new(
            HttpMethod::Get,
            self.endpoint.clone(),
            vec![
                ("query".into(), self.query.clone()),
                ("format".into(), SPARQL_RESULTS_JSON.into()),
            ],
            SPARQL_RESULTS_JSON,
        )
    }
}

/// Build the per-entity enrichment query: all `rdf:type` objects plus the
/// optional hypernym, as two bound variables.
pub fn build_enrichment_query(endpoint: &str, uri: &str) -> Result<SparqlQuerySpec> {
    validate_iri(uri)?;
    let query = format!(
        "SELECT ?type ?hypernym WHERE {{ <{uri}> <{RDF_TYPE}> ?type . \
         OPTIONAL {{ <{uri}> <{HYPERNYM_PROPERTY}> ?hypernym }} }}"
    );
    Ok(SparqlQuerySpec { endpoint: endpoint.to_string(), query })
}

fn validate_iri(uri: &str) -> Result<()> {
    let parsed = url::Url::parse(uri)
        .map_err(|e| Error::Input(format!("not an absolute IRI: {uri:?}: {e}")))?;
    if parsed.cannot_be_a_base() {
        return Err(Error::Input(format!("not an absolute IRI: {uri:?}")));
    }
    if uri.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')) {
        return Err(Error::Input(format!(
            "IRI contains characters illegal in SPARQL: {uri:?}"
        )));
    }
    Ok(())
}

/// Types (in response order, duplicates preserved) and the first bound
/// hypernym from a SPARQL JSON result. `row_count` distinguishes "the
/// knowledge base knows nothing" from "it knows types we filtered out".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparqlBindings {
    pub types: Vec<String>,
    pub hypernym: Option<String>,
    pub row_count: usize,
}

pub fn parse_sparql_results(body: &[u8]) -> Result<SparqlBindings> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| Error::Parse {
        position: 0,
        message: format!("SPARQL response is not valid JSON: {e}"),
    })?;
    let rows = value
        .pointer("/results/bindings")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Parse {
            position: 0,
            message: "SPARQL response has no results.bindings array".into(),
        })?;
    let mut out = SparqlBindings { row_count: rows.len(), ..Default::default() };
    for row in rows {
        if let Some(t) = row.pointer("/type/value").and_then(|v| v.as_str()) {
            out.types.push(t.to_string());
        }
        if out.hypernym.is_none() {
            if let Some(h) = row.pointer("/hypernym/value").and_then(|v| v.as_str()) {
                out.hypernym = Some(h.to_string());
            }
        }
    }
    Ok(out)
}

/// Last path or fragment segment of an IRI: `.../Barack_Obama` becomes
/// `Barack_Obama`. An IRI ending in `/` or `#` has an empty local name.
pub fn local_name(iri: &str) -> String {
    match iri.rsplit_once('#') {
        Some((_, frag)) => frag.to_string(),
        None => iri.rsplit('/').next().unwrap_or("").to_string(),
    }
}

fn usable_tag(tag: &str) -> bool {
    !tag.is_empty() && !tag.contains(',') && !tag.contains('[') && !tag.contains(']')
}

/// Derive the ordered tag list for one entity: the URI's local name, then
/// the local names of kept types in response order, then the hypernym's
/// local name. Duplicates are preserved deliberately — repeated tags add
/// term weight downstream.
pub fn derive_tags(uri: &str, type_iris: &[String], hypernym: Option<&str>) -> Vec<String> {
    let own = local_name(uri);
    if !usable_tag(&own) {
        return Vec::new();
    }
    let mut tags = vec![own];
    for t in type_iris {
        let kept = KEPT_NAMESPACES.iter().any(|ns| t.starts_with(ns))
            || FOAF_PERSON.contains(&t.as_str());
        if kept {
            let name = local_name(t);
            if usable_tag(&name) {
                tags.push(name);
            }
        }
    }
    if let Some(h) = hypernym {
        let name = local_name(h);
        if usable_tag(&name) {
            tags.push(name);
        }
    }
    tags
}

/// Enrich every annotation with knowledge-base tags. Queries run once per
/// distinct URI (bounded concurrency) and results are joined back in
/// mention order. A lookup that fails on the network after retries yields
/// an empty tag list and a warning, never an aborted run; fixture misses
/// and malformed responses do abort, because they mean the fixture set or
/// endpoint contract is broken.
pub async fn enrich(
    annotations: &AnnotationResult,
    cfg: &PipelineConfig,
    transport: &dyn HttpTransport,
) -> Result<(Vec<EnrichedEntity>, EnrichWarnings)> {
    let mut unique_uris: Vec<String> = Vec::new();
    for ann in &annotations.annotations {
        if !unique_uris.contains(&ann.uri) {
            unique_uris.push(ann.uri.clone());
        }
    }

    let cache: Mutex<HashMap<String, Vec<String>>> = Mutex::new(HashMap::new());
    let warnings = Mutex::new(EnrichWarnings::default());

    let results: Vec<Result<()>> = stream::iter(unique_uris.iter().cloned())
        .map(|uri| {
            let cache = &cache;
            let warnings = &warnings;
            async move {
                match lookup_tags(&uri, cfg, transport).await {
                    Ok(tags) => {
                        cache.lock().unwrap().entry(uri).or_insert(tags);
                        Ok(())
                    }
                    Err(Error::Network(msg)) => {
                        tracing::warn!(uri, error = msg, "enrichment lookup failed; empty tags");
                        warnings.lock().unwrap().failed_lookups += 1;
                        cache.lock().unwrap().entry(uri).or_default();
                        Ok(())
                    }
                    Err(other) => Err(other),
                }
            }
        })
        .buffer_unordered(cfg.enrich_concurrency.max(1))
        .collect()
        .await;
    for r in results {
        r?;
    }

    let cache = cache.into_inner().unwrap();
    let enriched = annotations
        .annotations
        .iter()
        .map(|ann| EnrichedEntity {
            surface_form: ann.surface_form.clone(),
            uri: ann.uri.clone(),
            offset: ann.offset,
            tags: cache.get(&ann.uri).cloned().unwrap_or_default(),
        })
        .collect();
    Ok((enriched, warnings.into_inner().unwrap()))
}

async fn lookup_tags(
    uri: &str,
    cfg: &PipelineConfig,
    transport: &dyn HttpTransport,
) -> Result<Vec<String>> {
    let query = build_enrichment_query(&cfg.sparql_endpoint, uri)?;
    let response = transport.execute(&query.to_request()).await?;
    if response.status != 200 {
        return Err(Error::Network(format!(
            "SPARQL endpoint returned HTTP {} for {uri}",
            response.status
        )));
    }
    let bindings = parse_sparql_results(&response.body)?;
    // Zero result rows: the knowledge base has nothing for this resource,
    // which the golden table renders as an empty tag cell.
    if bindings.row_count == 0 {
        return Ok(Vec::new());
    }
    Ok(derive_tags(uri, &bindings.types, bindings.hypernym.as_deref()))
}
