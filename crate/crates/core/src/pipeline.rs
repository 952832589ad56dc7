//! End-to-end orchestration: read → annotate → enrich → tag → preprocess →
//! fit → render, with a manifest describing what happened. The annotation,
//! enrichment and tagging stages are skipped entirely for a plain
//! (non-enriched) run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::document::{read_document, Document};
use crate::enrich::{enrich, EnrichedEntity};
use crate::error::{Error, Result};
use crate::http::{make_transport, HttpTransport};
use crate::lda::{self, pooled_term_weights, TopicModel};
use crate::preprocess::{preprocess_document, StopwordList, TokenizedDoc};
use crate::render;
use crate::spotlight::annotate;
use crate::tagger::{tag_text, TaggedDocument};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub input_paths: Vec<PathBuf>,
    pub out_dir: PathBuf,
    /// When false the run is traditional LDA over the plain text.
    pub enrich: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub document_id: String,
    pub sha256: String,
}

/// What a pipeline run read, produced and spent. Timings vary run to run;
/// output comparisons must exclude them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub enriched: bool,
    pub inputs: Vec<InputRecord>,
    /// Sorted unique request hashes served from or written to the store.
    pub fixtures_used: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub timings_ms: BTreeMap<String, u64>,
    pub warnings: BTreeMap<String, u64>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct StageClock {
    start: Instant,
    timings: BTreeMap<String, u64>,
}

impl StageClock {
    fn new() -> Self {
        StageClock { start: Instant::now(), timings: BTreeMap::new() }
    }

    fn lap(&mut self, stage: &str) {
        let elapsed = self.start.elapsed().as_millis() as u64;
        self.timings.insert(stage.to_string(), elapsed);
        self.start = Instant::now();
    }
}

/// Annotate, enrich and tag one document. Exposed for the service layer.
pub async fn enrich_document(
    doc: &Document,
    cfg: &PipelineConfig,
    transport: &dyn HttpTransport,
) -> Result<(TaggedDocument, Vec<EnrichedEntity>, BTreeMap<String, u64>)> {
    let mut warnings = BTreeMap::new();
    let (annotations, ann_warnings) = annotate(doc, cfg, transport).await?;
    *warnings.entry("skipped_resources".to_string()).or_default() += ann_warnings.skipped_resources;
    *warnings.entry("dropped_mismatches".to_string()).or_default() += ann_warnings.dropped_mismatches;
    *warnings.entry("dropped_overlaps".to_string()).or_default() += ann_warnings.dropped_overlaps;
    let (entities, enrich_warnings) = enrich(&annotations, cfg, transport).await?;
    *warnings.entry("enrichment_failures".to_string()).or_default() += enrich_warnings.failed_lookups;
    let tagged = tag_text(doc, &entities)?;
    Ok((tagged, entities, warnings))
}

/// Run the full pipeline over the given inputs and write every artifact
/// into `out_dir`: per-document tagged text (enriched runs only),
/// `model.json`, `topics.tsv`, `cloud.svg` and `manifest.json`.
pub async fn run_pipeline(cfg: &PipelineConfig, opts: &RunOptions) -> Result<RunManifest> {
    cfg.validate()?;
    if opts.input_paths.is_empty() {
        return Err(Error::Input("no input files given".into()));
    }
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    let stopwords = StopwordList::for_config(cfg)?;

    let mut clock = StageClock::new();
    let mut warnings: BTreeMap<String, u64> = BTreeMap::new();
    let mut outputs: Vec<PathBuf> = Vec::new();

    // Read every input up front so input errors surface before network use.
    let mut documents: Vec<Document> = Vec::new();
    let mut inputs = Vec::new();
    for path in &opts.input_paths {
        let mut doc = read_document(path, cfg.allow_empty)?;
        // Two inputs with the same file stem must not share outputs.
        if documents.iter().any(|d| d.id == doc.id) {
            let mut n = 2;
            while documents.iter().any(|d| d.id == format!("{}-{n}", doc.id)) {
                n += 1;
            }
            doc.id = format!("{}-{n}", doc.id);
        }
        inputs.push(InputRecord {
            path: path.clone(),
            document_id: doc.id.clone(),
            sha256: sha256_hex(doc.raw_text.as_bytes()),
        });
        documents.push(doc);
    }
    clock.lap("read");

    let mut corpus: Vec<TokenizedDoc> = Vec::new();
    let mut fixtures_used: Vec<String> = Vec::new();
    if opts.enrich {
        let transport = make_transport(cfg)?;
        let transport_ref: &dyn HttpTransport = transport.as_ref();
        // Documents annotate concurrently under a cap; results assemble in
        // input order so runs are reproducible.
        let tagged_docs: Vec<Result<(TaggedDocument, BTreeMap<String, u64>)>> =
            stream::iter(documents.clone())
                .map(|doc| async move {
                    let (tagged, _, doc_warnings) =
                        enrich_document(&doc, cfg, transport_ref).await?;
                    Ok((tagged, doc_warnings))
                })
                .buffered(cfg.annotate_concurrency.max(1))
                .collect()
                .await;
        clock.lap("annotate_enrich_tag");

        for (doc, tagged) in documents.iter().zip(tagged_docs) {
            let (tagged, doc_warnings) = tagged?;
            for (key, count) in doc_warnings {
                *warnings.entry(key).or_default() += count;
            }
            let tagged_path = opts.out_dir.join(format!("{}.tagged.txt", doc.id));
            write_output(&tagged_path, tagged.tagged_text.as_bytes())?;
            outputs.push(tagged_path);
            corpus.push(preprocess_document(&doc.id, &tagged.tagged_text, &stopwords));
        }
        fixtures_used = transport.fixture_hashes_used();
        fixtures_used.sort();
        fixtures_used.dedup();
    } else {
        for doc in &documents {
            corpus.push(preprocess_document(&doc.id, &doc.normalized_text, &stopwords));
        }
    }
    clock.lap("preprocess");

    let model = lda::fit(&corpus, &cfg.lda)?;
    clock.lap("fit");

    let model_path = opts.out_dir.join("model.json");
    write_output(&model_path, model_json(&model)?.as_bytes())?;
    outputs.push(model_path);

    let table_path = opts.out_dir.join("topics.tsv");
    render::write_table(&model, cfg.render.top_n, &table_path)?;
    outputs.push(table_path);

    let cloud_path = opts.out_dir.join("cloud.svg");
    render::render_tag_cloud(&model, &cfg.render, &cloud_path)?;
    outputs.push(cloud_path);
    clock.lap("render");

    let mut manifest = RunManifest {
        config: cfg.clone(),
        enriched: opts.enrich,
        inputs,
        fixtures_used,
        outputs,
        timings_ms: clock.timings,
        warnings,
    };
    let manifest_path = opts.out_dir.join("manifest.json");
    let manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Contract(format!("manifest serialization: {e}")))?;
    write_output(&manifest_path, manifest_text.as_bytes())?;
    manifest.outputs.push(manifest_path);
    Ok(manifest)
}

/// Canonical model dump: pretty JSON with a trailing newline.
pub fn model_json(model: &TopicModel) -> Result<String> {
    let mut text = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Contract(format!("model serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn load_model(path: &Path) -> Result<TopicModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Input(format!(
        "{} is not a model dump: {e}",
        path.display()
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

/// Side-by-side view of a plain and an enriched model: pooled top terms,
/// the terms only the enriched model surfaced, and which of those cannot
/// have come from the plain corpus at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub top_n: usize,
    pub plain_top: Vec<TermWeight>,
    pub enriched_top: Vec<TermWeight>,
    /// Terms in the enriched top-n but not the plain top-n.
    pub enriched_only: Vec<String>,
    /// Enriched-only terms absent from the plain model's vocabulary —
    /// these necessarily originate from knowledge-base tags.
    pub kb_terms: Vec<String>,
}

impl ComparisonReport {
    pub fn has_kb_terms(&self) -> bool {
        !self.kb_terms.is_empty()
    }
}

fn pooled_top(model: &TopicModel, n: usize) -> Vec<TermWeight> {
    pooled_term_weights(model)
        .into_iter()
        .take(n)
        .map(|(term, weight)| TermWeight { term, weight })
        .collect()
}

pub fn compare_models(plain: &TopicModel, enriched: &TopicModel, n: usize) -> ComparisonReport {
    let plain_top = pooled_top(plain, n);
    let enriched_top = pooled_top(enriched, n);
    let enriched_only: Vec<String> = enriched_top
        .iter()
        .filter(|tw| !plain_top.iter().any(|p| p.term == tw.term))
        .map(|tw| tw.term.clone())
        .collect();
    let kb_terms = enriched_only
        .iter()
        .filter(|term| !plain.vocab.contains(term))
        .cloned()
        .collect();
    ComparisonReport { top_n: n, plain_top, enriched_top, enriched_only, kb_terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LdaConfig;
    use crate::rng::RNG_ALGORITHM;

    fn tiny_model(vocab: &[&str], weights: Vec<Vec<f64>>) -> TopicModel {
        TopicModel {
            config: LdaConfig { topics: weights.len(), ..Default::default() },
            rng_algorithm: RNG_ALGORITHM.into(),
            document_ids: vec!["d".into()],
            vocab: vocab.iter().map(|s| s.to_string()).collect(),
            doc_topic_weights: vec![vec![1.0 / weights.len() as f64; weights.len()]],
            assignments: vec![vec![0]],
            topic_term_weights: weights,
        }
    }

    #[test]
    fn identical_models_have_empty_difference() {
        let m = tiny_model(&["a", "b"], vec![vec![0.7, 0.3]]);
        let report = compare_models(&m, &m, 5);
        assert!(report.enriched_only.is_empty());
        assert!(report.kb_terms.is_empty());
        assert!(!report.has_kb_terms());
    }

    #[test]
    fn disjoint_single_term_models_differ() {
        let plain = tiny_model(&["plain"], vec![vec![1.0]]);
        let enriched = tiny_model(&["politician"], vec![vec![1.0]]);
        let report = compare_models(&plain, &enriched, 3);
        assert_eq!(report.enriched_only, vec!["politician"]);
        assert_eq!(report.kb_terms, vec!["politician"]);
        assert!(report.has_kb_terms());
    }

    #[test]
    fn enriched_only_term_present_in_plain_vocab_is_not_kb() {
        // "shared" exists in the plain vocabulary but misses its top-1.
        let plain = tiny_model(&["alpha", "shared"], vec![vec![0.9, 0.1]]);
        let enriched = tiny_model(&["shared"], vec![vec![1.0]]);
        let report = compare_models(&plain, &enriched, 1);
        assert_eq!(report.enriched_only, vec!["shared"]);
        assert!(report.kb_terms.is_empty());
    }

    #[tokio::test]
    async fn empty_input_list_is_input_error() {
        let cfg = PipelineConfig::default();
        let opts = RunOptions {
            input_paths: vec![],
            out_dir: std::env::temp_dir().join("semtopic-none"),
            enrich: false,
        };
        let err = run_pipeline(&cfg, &opts).await.unwrap_err();
        assert_eq!(err.kind(), crate::error::ErrorKind::Input);
    }

    #[tokio::test]
    async fn colliding_file_stems_get_distinct_ids() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        std::fs::create_dir_all(&a).unwrap();
        std::fs::create_dir_all(&b).unwrap();
        std::fs::write(a.join("doc.txt"), "alpha beta gamma alpha").unwrap();
        std::fs::write(b.join("doc.txt"), "delta epsilon delta").unwrap();
        let cfg = PipelineConfig {
            lda: LdaConfig { topics: 1, iterations: 20, ..Default::default() },
            ..Default::default()
        };
        let opts = RunOptions {
            input_paths: vec![a.join("doc.txt"), b.join("doc.txt")],
            out_dir: dir.path().join("out"),
            enrich: false,
        };
        let manifest = run_pipeline(&cfg, &opts).await.unwrap();
        let ids: Vec<&str> = manifest.inputs.iter().map(|i| i.document_id.as_str()).collect();
        assert_eq!(ids, vec!["doc", "doc-2"]);
    }

    #[tokio::test]
    async fn plain_run_produces_model_table_cloud_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("doc.txt");
        std::fs::write(&input, "Barack Obama is only passing through Germany on his trip to Europe later this week.").unwrap();
        let out = dir.path().join("out");
        let cfg = PipelineConfig {
            lda: LdaConfig { topics: 2, iterations: 50, ..Default::default() },
            ..Default::default()
        };
        let opts = RunOptions { input_paths: vec![input], out_dir: out.clone(), enrich: false };
        let manifest = run_pipeline(&cfg, &opts).await.unwrap();
        assert!(out.join("model.json").exists());
        assert!(out.join("topics.tsv").exists());
        assert!(out.join("cloud.svg").exists());
        assert!(out.join("manifest.json").exists());
        assert!(!out.join("doc.tagged.txt").exists());
        for path in &manifest.outputs {
            assert!(path.exists(), "listed output missing: {}", path.display());
        }
        let model = load_model(&out.join("model.json")).unwrap();
        assert_eq!(model.rng_algorithm, RNG_ALGORITHM);
        assert!(model.vocab.contains(&"germani".to_string()));
    }
}
