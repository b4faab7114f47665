//! OCR providers and the extraction step built on them.
//!
//! Providers return the raw response body; [`decode_ocr_response`] turns it
//! into pages. Live, recorded and fixture providers therefore share one
//! decoder, and a recorded fixture is byte-for-byte what the live provider sent.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;
use url::Url;

use super::{check_pdf_magic, DEFAULT_MAX_PDF_BYTES};
use crate::model::{content_hash, DocumentError, ExtractedDocument, PageText};
use crate::retry::{retry_after, RetryPolicy, Verdict};
use crate::secret::ApiKey;

/// Default cap on in-flight provider calls per process.
pub const DEFAULT_OCR_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UploadEncoding {
    /// JSON body with the PDF as a base64 data URL.
    #[default]
    Base64Json,
    /// multipart/form-data with the PDF in a `file` part.
    Multipart,
}

#[derive(Debug, Clone)]
pub struct OcrProviderConfig {
    pub endpoint_url: Url,
    pub api_key: ApiKey,
    pub timeout_s: u64,
    pub max_pdf_bytes: u64,
    pub upload: UploadEncoding,
    /// Optional provider model name sent with the request.
    pub model: Option<String>,
    /// At most 3 attempts by default.
    pub retry: RetryPolicy,
}

impl OcrProviderConfig {
    pub fn new(endpoint_url: Url, api_key: ApiKey) -> Self {
        OcrProviderConfig {
            endpoint_url,
            api_key,
            timeout_s: 120,
            max_pdf_bytes: DEFAULT_MAX_PDF_BYTES,
            upload: UploadEncoding::default(),
            model: None,
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), OcrError> {
        if self.timeout_s == 0 {
            return Err(OcrError::Config("timeout_s must be > 0".into()));
        }
        if self.max_pdf_bytes == 0 {
            return Err(OcrError::Config("max_pdf_bytes must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("OCR provider unavailable after {attempts} attempt(s): {message}")]
    ProviderUnavailable { attempts: u32, message: String },
    #[error("OCR provider rejected the request with status {status}: {message}")]
    ProviderRejected { status: u16, message: String },
    #[error("OCR provider returned no text")]
    EmptyExtraction,
    #[error("OCR provider response could not be decoded: {0}")]
    InvalidResponse(String),
    #[error("no recorded OCR fixture for document {0}")]
    FixtureMissing(String),
    #[error("input is not a PDF")]
    NotAPdf,
    #[error("invalid OCR configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Document(#[from] DocumentError),
}

/// Verbatim provider response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcrResponse {
    pub body: Vec<u8>,
    pub content_type: Option<String>,
}

#[async_trait]
pub trait OcrProvider: Send + Sync {
    fn name(&self) -> &str;
    async fn recognize(&self, pdf: &[u8]) -> Result<OcrResponse, OcrError>;
}

#[derive(Deserialize)]
struct PagesResponse {
    pages: Vec<PageResponse>,
}

#[derive(Deserialize)]
struct PageResponse {
    #[serde(default)]
    index: Option<u32>,
    #[serde(default)]
    page_no: Option<u32>,
    #[serde(alias = "text")]
    markdown: String,
}

#[derive(Deserialize)]
struct SingleResponse {
    #[serde(alias = "text")]
    markdown: String,
}

/// Decodes a provider response into pages.
///
/// Accepted shapes: JSON `{"pages": [{"index": 0, "markdown": ".."}]}` with
/// 0-based `index` or 1-based `page_no`; JSON `{"markdown": ".."}`; or a
/// plain Markdown body with pages separated by form feeds.
pub fn decode_ocr_response(resp: &OcrResponse) -> Result<Vec<PageText>, OcrError> {
    let text = std::str::from_utf8(&resp.body)
        .map_err(|e| OcrError::InvalidResponse(format!("body is not UTF-8: {e}")))?;
    let is_json = resp
        .content_type
        .as_deref()
        .is_some_and(|ct| ct.contains("json"))
        || text.trim_start().starts_with('{');

    let pages = if is_json {
        if let Ok(parsed) = serde_json::from_str::<PagesResponse>(text) {
            let mut pages: Vec<PageText> = parsed
                .pages
                .into_iter()
                .enumerate()
                .map(|(pos, p)| PageText {
                    page_no: p
                        .page_no
                        .or(p.index.map(|i| i + 1))
                        .unwrap_or(pos as u32 + 1),
                    markdown: p.markdown,
                })
                .collect();
            pages.sort_by_key(|p| p.page_no);
            pages
        } else if let Ok(single) = serde_json::from_str::<SingleResponse>(text) {
            vec![PageText {
                page_no: 1,
                markdown: single.markdown,
            }]
        } else {
            return Err(OcrError::InvalidResponse(
                "JSON response has neither `pages` nor `markdown`".into(),
            ));
        }
    } else {
        text.split('\u{000C}')
            .enumerate()
            .map(|(i, md)| PageText {
                page_no: i as u32 + 1,
                markdown: md.to_owned(),
            })
            .collect()
    };

    if pages.iter().all(|p| p.markdown.trim().is_empty()) {
        return Err(OcrError::EmptyExtraction);
    }
    Ok(pages)
}

/// Drives an OCR provider under a shared concurrency limit.
#[derive(Clone)]
pub struct Extractor {
    provider: Arc<dyn OcrProvider>,
    limiter: Arc<Semaphore>,
}

impl Extractor {
    pub fn new(provider: Arc<dyn OcrProvider>) -> Self {
        Self::with_concurrency(provider, DEFAULT_OCR_CONCURRENCY)
    }

    pub fn with_concurrency(provider: Arc<dyn OcrProvider>, max_in_flight: usize) -> Self {
        Extractor {
            provider,
            limiter: Arc::new(Semaphore::new(max_in_flight.max(1))),
        }
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    pub async fn extract_text(&self, pdf: &[u8]) -> Result<ExtractedDocument, OcrError> {
        check_pdf_magic(pdf).map_err(|_| OcrError::NotAPdf)?;
        let response = {
            let _permit = self.limiter.acquire().await.expect("limiter never closed");
            self.provider.recognize(pdf).await?
        };
        let pages = decode_ocr_response(&response)?;
        Ok(ExtractedDocument::from_pages(content_hash(pdf), pages)?)
    }
}

enum Attempt {
    Transient { message: String, wait: Option<Duration> },
    Rejected { status: u16, message: String },
}

/// Live HTTP client for an OCR provider.
pub struct HttpOcrProvider {
    cfg: OcrProviderConfig,
    http: reqwest::Client,
}

impl HttpOcrProvider {
    pub fn new(cfg: OcrProviderConfig) -> Result<Self, OcrError> {
        cfg.validate()?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_s))
            .build()
            .map_err(|e| OcrError::Config(e.to_string()))?;
        Ok(HttpOcrProvider { cfg, http })
    }

    fn request(&self, pdf: &[u8]) -> reqwest::RequestBuilder {
        let req = self
            .http
            .post(self.cfg.endpoint_url.clone())
            .bearer_auth(self.cfg.api_key.expose());
        match self.cfg.upload {
            UploadEncoding::Base64Json => {
                let data = base64::engine::general_purpose::STANDARD.encode(pdf);
                let mut body = serde_json::json!({
                    "document": {
                        "type": "document_url",
                        "document_url": format!("data:application/pdf;base64,{data}"),
                    }
                });
                if let Some(model) = &self.cfg.model {
                    body["model"] = serde_json::Value::String(model.clone());
                }
                req.json(&body)
            }
            UploadEncoding::Multipart => {
                let part = reqwest::multipart::Part::bytes(pdf.to_vec())
                    .file_name("document.pdf")
                    .mime_str("application/pdf")
                    .expect("static mime type");
                let mut form = reqwest::multipart::Form::new().part("file", part);
                if let Some(model) = &self.cfg.model {
                    form = form.text("model", model.clone());
                }
                req.multipart(form)
            }
        }
    }

    async fn attempt(&self, pdf: &[u8]) -> Result<OcrResponse, Attempt> {
        let resp = self.request(pdf).send().await.map_err(|e| Attempt::Transient {
            message: e.to_string(),
            wait: None,
        })?;
        let status = resp.status();
        let wait = retry_after(resp.headers());
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned);
        let body = resp.bytes().await.map_err(|e| Attempt::Transient {
            message: e.to_string(),
            wait: None,
        })?;
        if status.is_success() {
            return Ok(OcrResponse {
                body: body.to_vec(),
                content_type,
            });
        }
        let message = String::from_utf8_lossy(&body).chars().take(500).collect();
        if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            Err(Attempt::Transient { message: format!("status {status}: {message}"), wait })
        } else {
            Err(Attempt::Rejected {
                status: status.as_u16(),
                message,
            })
        }
    }
}

#[async_trait]
impl OcrProvider for HttpOcrProvider {
    fn name(&self) -> &str {
        "http"
    }

    async fn recognize(&self, pdf: &[u8]) -> Result<OcrResponse, OcrError> {
        let outcome = self
            .cfg
            .retry
            .run(
                |_| self.attempt(pdf),
                |e| match e {
                    Attempt::Transient { wait: Some(d), .. } => Verdict::RetryAfter(*d),
                    Attempt::Transient { .. } => Verdict::Retry,
                    Attempt::Rejected { .. } => Verdict::Fail,
                },
            )
            .await;
        match outcome.result {
            Ok(resp) => Ok(resp),
            Err(Attempt::Transient { message, .. }) => Err(OcrError::ProviderUnavailable {
                attempts: outcome.attempts,
                message,
            }),
            Err(Attempt::Rejected { status, message }) => {
                Err(OcrError::ProviderRejected { status, message })
            }
        }
    }
}

/// Replays recorded responses stored as `<sha256-of-pdf>.json` (or `.md`).
pub struct FixtureOcrProvider {
    dir: PathBuf,
}

impl FixtureOcrProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureOcrProvider { dir: dir.into() }
    }
}

#[async_trait]
impl OcrProvider for FixtureOcrProvider {
    fn name(&self) -> &str {
        "fixture"
    }

    async fn recognize(&self, pdf: &[u8]) -> Result<OcrResponse, OcrError> {
        let hash = content_hash(pdf);
        for (ext, content_type) in [("json", "application/json"), ("md", "text/markdown")] {
            let path = self.dir.join(format!("{hash}.{ext}"));
            match tokio::fs::read(&path).await {
                Ok(body) => {
                    return Ok(OcrResponse {
                        body,
                        content_type: Some(content_type.to_owned()),
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => {
                    return Err(OcrError::InvalidResponse(format!(
                        "reading {}: {e}",
                        path.display()
                    )))
                }
            }
        }
        Err(OcrError::FixtureMissing(hash))
    }
}

/// Always answers with the same body.
pub struct StaticOcrProvider {
    response: OcrResponse,
}

impl StaticOcrProvider {
    pub fn markdown(text: impl Into<String>) -> Self {
        StaticOcrProvider {
            response: OcrResponse {
                body: text.into().into_bytes(),
                content_type: Some("text/markdown".into()),
            },
        }
    }

    pub fn response(response: OcrResponse) -> Self {
        StaticOcrProvider { response }
    }
}

#[async_trait]
impl OcrProvider for StaticOcrProvider {
    fn name(&self) -> &str {
        "static"
    }

    async fn recognize(&self, _pdf: &[u8]) -> Result<OcrResponse, OcrError> {
        Ok(self.response.clone())
    }
}

/// Wraps another provider and writes each successful response to `dir` in
/// the fixture layout.
pub struct RecordingOcrProvider {
    inner: Arc<dyn OcrProvider>,
    dir: PathBuf,
}

impl RecordingOcrProvider {
    pub fn new(inner: Arc<dyn OcrProvider>, dir: impl Into<PathBuf>) -> Self {
        RecordingOcrProvider {
            inner,
            dir: dir.into(),
        }
    }
}

#[async_trait]
impl OcrProvider for RecordingOcrProvider {
    fn name(&self) -> &str {
        "recording"
    }

    async fn recognize(&self, pdf: &[u8]) -> Result<OcrResponse, OcrError> {
        let resp = self.inner.recognize(pdf).await?;
        let is_json = resp
            .content_type
            .as_deref()
            .is_some_and(|ct| ct.contains("json"));
        let path = self
            .dir
            .join(format!("{}.{}", content_hash(pdf), if is_json { "json" } else { "md" }));
        if let Err(e) = crate::fsutil::write_atomic(&path, &resp.body) {
            tracing::warn!(path = %path.display(), error = %e, "could not record OCR fixture");
        }
        Ok(resp)
    }
}
