//! Knowledge-base-enriched topic modeling.
//!
//! The pipeline reads a text, recognizes entities with a Spotlight-style
//! annotation service, enriches them with types and hypernyms from a
//! SPARQL knowledge base, splices bracketed tag lists into the text, runs
//! a deterministic cleaning chain, and fits an LDA topic model by
//! collapsed Gibbs sampling. Results come out as a weighted-term table and
//! an SVG tag cloud.
//!
//! All HTTP traffic goes through a record/replay fixture store keyed by a
//! canonical request hash, so runs are reproducible offline.
//!
//! The non-network pieces compose directly:
//!
//! ```
//! use semtopic_core::{Document, EnrichedEntity, LdaConfig, StopwordList};
//!
//! let doc = Document::new("note", "Obama  visited Germany.");
//! assert_eq!(doc.normalized_text, "Obama visited Germany.");
//!
//! let entities = vec![EnrichedEntity {
//!     surface_form: "Germany".into(),
//!     uri: "http://dbpedia.org/resource/Germany".into(),
//!     offset: 14,
//!     tags: vec!["Germany".into(), "Country".into()],
//! }];
//! let tagged = semtopic_core::tag_text(&doc, &entities)?;
//! assert_eq!(tagged.tagged_text, "Obama visited Germany [Germany, Country].");
//! assert_eq!(semtopic_core::strip_tags(&tagged)?, doc.normalized_text);
//!
//! let stopwords = StopwordList::english_default();
//! let tokens = semtopic_core::run_chain(&tagged.tagged_text, &stopwords);
//! assert_eq!(tokens, ["obama", "visit", "germani", "germani", "countri"]);
//!
//! let corpus = vec![semtopic_core::TokenizedDoc { document_id: doc.id, tokens }];
//! let model = semtopic_core::fit(&corpus, &LdaConfig { topics: 1, ..Default::default() })?;
//! assert_eq!(semtopic_core::top_terms(&model, 0, 1)?[0].0, "germani");
//! # Ok::<(), semtopic_core::Error>(())
//! ```

pub mod api;
pub mod config;
pub mod document;
pub mod enrich;
pub mod error;
pub mod http;
pub mod lda;
pub mod pipeline;
pub mod preprocess;
pub mod render;
pub mod rng;
pub mod spotlight;
pub mod tagger;

pub use config::{FixtureMode, LdaConfig, PipelineConfig, RenderSpec, StopwordListId};
pub use document::{normalize, read_document, Document};
pub use enrich::{derive_tags, EnrichedEntity};
pub use error::{Error, ErrorKind, Result};
pub use lda::{fit, perplexity, top_terms, TopicModel};
pub use pipeline::{compare_models, run_pipeline, ComparisonReport, RunManifest, RunOptions};
pub use preprocess::{run_chain, StopwordList, TokenizedDoc};
pub use spotlight::{AnnotationResult, EntityAnnotation};
pub use tagger::{strip_tags, tag_text, TaggedDocument};
