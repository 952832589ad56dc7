use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variables that override the configured endpoints.
pub const ENV_ANNOTATOR_ENDPOINT: &str = "SEMTOPIC_ANNOTATOR_ENDPOINT";
pub const ENV_SPARQL_ENDPOINT: &str = "SEMTOPIC_SPARQL_ENDPOINT";

/// How outbound HTTP requests are satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureMode {
    /// Hit the configured endpoints.
    Live,
    /// Hit the endpoints and store every response in the fixture store.
    Record,
    /// Serve every request from the fixture store; a missing fixture is an
    /// error naming the request hash.
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopwordListId {
    EnglishDefault,
    File,
}

/// Hyperparameters for the collapsed Gibbs sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    /// Number of topics K.
    pub topics: usize,
    /// Symmetric document-topic Dirichlet prior.
    pub alpha: f64,
    /// Symmetric topic-word Dirichlet prior.
    pub beta: f64,
    /// Full Gibbs sweeps over the corpus.
    pub iterations: u32,
    /// Sweeps discarded before estimates when sample averaging is used.
    pub burn_in: u32,
    pub seed: u64,
    /// Terms reported per topic in tables and summaries.
    pub top_n: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 2,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            burn_in: 0,
            seed: 42,
            top_n: 15,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::Input("lda.topics must be >= 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::Input("lda.alpha must be > 0".into()));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::Input("lda.beta must be > 0".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Input("lda.iterations must be >= 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Input("lda.burn_in must be < lda.iterations".into()));
        }
        if self.top_n < 1 {
            return Err(Error::Input("lda.top_n must be >= 1".into()));
        }
        Ok(())
    }
}

/// Geometry for the tag-cloud renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub top_n: usize,
    pub min_font: f64,
    pub max_font: f64,
    pub canvas_width: u32,
    pub canvas_height: u32,
    /// Reserved for future layout jitter; the default layout ignores it.
    pub layout_seed: u64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            top_n: 15,
            min_font: 12.0,
            max_font: 48.0,
            canvas_width: 800,
            canvas_height: 600,
            layout_seed: 0,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        let fonts_ok = self.min_font.is_finite()
            && self.max_font.is_finite()
            && self.min_font > 0.0
            && self.max_font > self.min_font;
        if !fonts_ok {
            return Err(Error::Input(
                "render fonts must satisfy max_font > min_font > 0".into(),
            ));
        }
        if self.canvas_width == 0 || self.canvas_height == 0 {
            return Err(Error::Input("render canvas dimensions must be > 0".into()));
        }
        Ok(())
    }
}

/// Everything the pipeline needs to run one corpus end to end. Loaded from
/// a TOML file, then adjusted by env vars and CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Spotlight disambiguation confidence threshold in [0, 1].
    pub confidence: f64,
    /// Spotlight minimum support (inlink count).
    pub support: u64,
    /// Base URL of a Spotlight-compatible service; `/annotate` is appended.
    pub annotator_endpoint: String,
    /// SPARQL protocol endpoint of the knowledge base.
    pub sparql_endpoint: String,
    pub lda: LdaConfig,
    pub stopword_list_id: StopwordListId,
    /// Stop-word file, required when `stopword_list_id = "file"`.
    pub stopword_file: Option<PathBuf>,
    pub fixture_mode: FixtureMode,
    /// Fixture store directory, required in record/replay modes.
    pub fixture_dir: Option<PathBuf>,
    /// Accept inputs that normalize to the empty string.
    pub allow_empty: bool,
    /// Hard cap on annotation text length, in characters.
    pub max_text_chars: usize,
    /// Above this many characters the annotate request switches to POST.
    pub post_threshold_chars: usize,
    /// Concurrent in-flight annotation requests across documents.
    pub annotate_concurrency: usize,
    /// Concurrent in-flight SPARQL requests across distinct URIs.
    pub enrich_concurrency: usize,
    /// Retries per HTTP request before the error policy kicks in.
    pub retries: u32,
    pub render: RenderSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            confidence: 0.5,
            support: 0,
            annotator_endpoint: "https://api.dbpedia-spotlight.org/en".into(),
            sparql_endpoint: "https://dbpedia.org/sparql".into(),
            lda: LdaConfig::default(),
            stopword_list_id: StopwordListId::EnglishDefault,
            stopword_file: None,
            fixture_mode: FixtureMode::Live,
            fixture_dir: None,
            allow_empty: false,
            max_text_chars: 10_000,
            post_threshold_chars: 1_500,
            annotate_concurrency: 4,
            enrich_concurrency: 4,
            retries: 2,
            render: RenderSpec::default(),
        }
    }
}

impl PipelineConfig {
    /// Parse a TOML config file and apply endpoint overrides from the
    /// environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        cfg.apply_env_overrides();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env_overrides(&mut self) {
        if let Ok(v) = std::env::var(ENV_ANNOTATOR_ENDPOINT) {
            if !v.is_empty() {
                self.annotator_endpoint = v;
            }
        }
        if let Ok(v) = std::env::var(ENV_SPARQL_ENDPOINT) {
            if !v.is_empty() {
                self.sparql_endpoint = v;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Input(format!(
                "confidence must be in [0, 1], got {}",
                self.confidence
            )));
        }
        for (name, value) in [
            ("annotator_endpoint", &self.annotator_endpoint),
            ("sparql_endpoint", &self.sparql_endpoint),
        ] {
            let url = url::Url::parse(value)
                .map_err(|e| Error::Input(format!("{name} is not a valid URL: {e}")))?;
            if !matches!(url.scheme(), "http" | "https") {
                return Err(Error::Input(format!("{name} must be http(s): {value}")));
            }
        }
        if self.stopword_list_id == StopwordListId::File && self.stopword_file.is_none() {
            return Err(Error::Input(
                "stopword_list_id = \"file\" requires stopword_file".into(),
            ));
        }
        if matches!(self.fixture_mode, FixtureMode::Record | FixtureMode::Replay)
            && self.fixture_dir.is_none()
        {
            return Err(Error::Input(format!(
                "fixture_mode {:?} requires fixture_dir",
                self.fixture_mode
            )));
        }
        if self.post_threshold_chars > self.max_text_chars {
            return Err(Error::Input(
                "post_threshold_chars must not exceed max_text_chars".into(),
            ));
        }
        if self.annotate_concurrency == 0 || self.enrich_concurrency == 0 {
            return Err(Error::Input("concurrency caps must be >= 1".into()));
        }
        self.lda.validate()?;
        self.render.validate()
    }
}
