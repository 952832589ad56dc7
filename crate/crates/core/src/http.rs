//! Outbound HTTP plumbing shared by the annotation and SPARQL clients.
//!
//! Requests are described by a pure value, [`HttpRequestSpec`], whose
//! canonical form hashes to a stable fixture key. Three transports satisfy
//! a spec: live (reqwest), record (live + store) and replay (store only),
//! which is what makes the whole pipeline runnable offline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{FixtureMode, PipelineConfig};
use crate::error::{Error, Result};

/// RFC 3986 unreserved characters stay literal; everything else is
/// percent-encoded. Space becomes `%20`, `&` becomes `%26`.
const STRICT_ENCODE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'~');

pub fn percent_encode(s: &str) -> String {
    utf8_percent_encode(s, STRICT_ENCODE).to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HttpMethod {
    Get,
    Post,
}

impl HttpMethod {
    fn as_str(self) -> &'static str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Post => "POST",
        }
    }
}

/// A pure description of an outbound request: method, bare URL, parameters
/// and Accept header. GET sends the parameters as the query string, POST
/// as an `application/x-www-form-urlencoded` body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpRequestSpec {
    pub method: HttpMethod,
    /// Absolute URL without any query string.
    pub url: String,
    pub params: Vec<(String, String)>,
    pub accept: String,
}

impl HttpRequestSpec {
    pub fn new(
        method: HttpMethod,
        url: impl Into<String>,
        params: Vec<(String, String)>,
        accept: impl Into<String>,
    ) -> Self {
        HttpRequestSpec { method, url: url.into(), params, accept: accept.into() }
    }

    /// Parameters percent-encoded and joined in declaration order; this is
    /// the exact query string / form body put on the wire.
    pub fn encoded_params(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{}={}", percent_encode(k), percent_encode(v)))
            .collect::<Vec<_>>()
            .join("&")
    }

    /// Full URL as sent, including the query string for GET requests.
    pub fn full_url(&self) -> String {
        match self.method {
            HttpMethod::Get if !self.params.is_empty() => {
                format!("{}?{}", self.url, self.encoded_params())
            }
            _ => self.url.clone(),
        }
    }

    /// Canonical form used for fixture keying. Parameters are sorted so
    /// the hash is stable under reordering.
    pub fn canonical_string(&self) -> String {
        let mut pairs: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{}={}", percent_encode(k), percent_encode(v)))
            .collect();
        pairs.sort();
        format!(
            "{}\n{}\n{}\n{}",
            self.method.as_str(),
            self.url,
            pairs.join("&"),
            self.accept
        )
    }

    pub fn request_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_string().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

#[async_trait::async_trait]
pub trait HttpTransport: Send + Sync {
    async fn execute(&self, spec: &HttpRequestSpec) -> Result<HttpResponse>;

    /// Fixture hashes served or written so far (replay/record transports).
    fn fixture_hashes_used(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Transport that talks to the real endpoints with bounded retries on
/// connect errors and 5xx/429 responses.
pub struct LiveTransport {
    client: reqwest::Client,
    retries: u32,
}

impl LiveTransport {
    pub fn new(retries: u32) -> Result<Self> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("semtopic/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::Network(format!("failed to build HTTP client: {e}")))?;
        Ok(LiveTransport { client, retries })
    }

    async fn execute_once(&self, spec: &HttpRequestSpec) -> Result<HttpResponse> {
        let builder = match spec.method {
            HttpMethod::Get => self.client.get(spec.full_url()),
            HttpMethod::Post => self
                .client
                .post(spec.url.clone())
                .header(reqwest::header::CONTENT_TYPE, "application/x-www-form-urlencoded")
                .body(spec.encoded_params()),
        };
        let response = builder
            .header(reqwest::header::ACCEPT, spec.accept.clone())
            .send()
            .await
            .map_err(|e| Error::Network(format!("{}: {e}", spec.url)))?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("application/octet-stream")
            .to_string();
        let body = response
            .bytes()
            .await
            .map_err(|e| Error::Network(format!("{}: body read failed: {e}", spec.url)))?
            .to_vec();
        Ok(HttpResponse { status, content_type, body })
    }
}

#[async_trait::async_trait]
impl HttpTransport for LiveTransport {
    async fn execute(&self, spec: &HttpRequestSpec) -> Result<HttpResponse> {
        let mut last_err: Option<Error> = None;
        for attempt in 0..=self.retries {
            if attempt > 0 {
                tokio::time::sleep(Duration::from_millis(100 * attempt as u64)).await;
            }
            match self.execute_once(spec).await {
                Ok(resp) if resp.status == 429 || resp.status >= 500 => {
                    last_err = Some(Error::Network(format!(
                        "{}: HTTP {}",
                        spec.url, resp.status
                    )));
                }
                Ok(resp) => return Ok(resp),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Network("request failed".into())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureHeader {
    status: u16,
    content_type: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureIndexEntry {
    pub method: String,
    pub url: String,
    /// Short human-readable hint of what the request was (not hashed).
    pub note: String,
}

/// Directory of hash-named response files plus an `index.json` mapping
/// hashes back to the requests that produced them.
///
/// File layout: one header line of JSON (status, content type), a newline,
/// then the verbatim response bytes.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn response_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.resp"))
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join("index.json")
    }

    pub fn load(&self, hash: &str) -> Result<Option<HttpResponse>> {
        let path = self.response_path(hash);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let split = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Contract(format!("fixture file has no header: {}", path.display())))?;
        let header: FixtureHeader = serde_json::from_slice(&bytes[..split]).map_err(|e| {
            Error::Contract(format!("bad fixture header in {}: {e}", path.display()))
        })?;
        Ok(Some(HttpResponse {
            status: header.status,
            content_type: header.content_type,
            body: bytes[split + 1..].to_vec(),
        }))
    }

    pub fn save(&self, spec: &HttpRequestSpec, response: &HttpResponse, note: &str) -> Result<String> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let hash = spec.request_hash();
        let header = FixtureHeader {
            status: response.status,
            content_type: response.content_type.clone(),
        };
        let mut bytes = serde_json::to_vec(&header)
            .map_err(|e| Error::Contract(format!("fixture header serialization: {e}")))?;
        bytes.push(b'\n');
        bytes.extend_from_slice(&response.body);
        let path = self.response_path(&hash);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;

        let mut index = self.read_index()?;
        index.insert(
            hash.clone(),
            FixtureIndexEntry {
                method: spec.method.as_str().to_string(),
                url: spec.url.clone(),
                note: note.to_string(),
            },
        );
        self.write_index(&index)?;
        Ok(hash)
    }

    pub fn read_index(&self) -> Result<BTreeMap<String, FixtureIndexEntry>> {
        let path = self.index_path();
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| Error::Contract(format!("bad fixture index {}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    fn write_index(&self, index: &BTreeMap<String, FixtureIndexEntry>) -> Result<()> {
        let path = self.index_path();
        let mut text = serde_json::to_string_pretty(index)
            .map_err(|e| Error::Contract(format!("fixture index serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// Serves responses from the fixture store; never touches the network.
pub struct ReplayTransport {
    store: FixtureStore,
    used: Mutex<Vec<String>>,
}

impl ReplayTransport {
    pub fn new(store: FixtureStore) -> Self {
        ReplayTransport { store, used: Mutex::new(Vec::new()) }
    }
}

#[async_trait::async_trait]
impl HttpTransport for ReplayTransport {
    async fn execute(&self, spec: &HttpRequestSpec) -> Result<HttpResponse> {
        let hash = spec.request_hash();
        match self.store.load(&hash)? {
            Some(resp) => {
                self.used.lock().unwrap().push(hash);
                Ok(resp)
            }
            None => Err(Error::FixtureMiss { hash }),
        }
    }

    fn fixture_hashes_used(&self) -> Vec<String> {
        self.used.lock().unwrap().clone()
    }
}

/// Live transport that also writes every response into the store.
pub struct RecordTransport {
    live: LiveTransport,
    store: FixtureStore,
    // Mutex serializes index read-modify-write under concurrent requests.
    write_lock: Mutex<()>,
    used: Mutex<Vec<String>>,
}

impl RecordTransport {
    pub fn new(live: LiveTransport, store: FixtureStore) -> Self {
        RecordTransport {
            live,
            store,
            write_lock: Mutex::new(()),
            used: Mutex::new(Vec::new()),
        }
    }
}

#[async_trait::async_trait]
impl HttpTransport for RecordTransport {
    async fn execute(&self, spec: &HttpRequestSpec) -> Result<HttpResponse> {
        let response = self.live.execute(spec).await?;
        let hash = {
            let _guard = self.write_lock.lock().unwrap();
            self.store.save(spec, &response, "recorded")?
        };
        self.used.lock().unwrap().push(hash);
        Ok(response)
    }

    fn fixture_hashes_used(&self) -> Vec<String> {
        self.used.lock().unwrap().clone()
    }
}

/// Build the transport named by the config's fixture mode.
pub fn make_transport(cfg: &PipelineConfig) -> Result<Box<dyn HttpTransport>> {
    match cfg.fixture_mode {
        FixtureMode::Live => Ok(Box::new(LiveTransport::new(cfg.retries)?)),
        FixtureMode::Replay => {
            let dir = cfg.fixture_dir.as_ref().ok_or_else(|| {
                Error::Input("replay mode requires fixture_dir".into())
            })?;
            Ok(Box::new(ReplayTransport::new(FixtureStore::new(dir))))
        }
        FixtureMode::Record => {
            let dir = cfg.fixture_dir.as_ref().ok_or_else(|| {
                Error::Input("record mode requires fixture_dir".into())
            })?;
            Ok(Box::new(RecordTransport::new(
                LiveTransport::new(cfg.retries)?,
                FixtureStore::new(dir),
            )))
        }
    }
}
