//! Source resolution and the OCR stage.

mod examples;
mod ocr;

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::model::{DocumentSource, SourceError};

pub use examples::{ExampleEntry, ExampleError, ExampleInfo, ExampleRegistry, MANIFEST_FILE};
pub use ocr::{
    decode_ocr_response, Extractor, FixtureOcrProvider, HttpOcrProvider, OcrError, OcrProvider,
    OcrProviderConfig, OcrResponse, RecordingOcrProvider, StaticOcrProvider, UploadEncoding,
    DEFAULT_OCR_CONCURRENCY,
};

/// Every accepted payload starts with this prefix.
pub const PDF_MAGIC: &[u8] = b"%PDF-";
pub const DEFAULT_MAX_PDF_BYTES: u64 = 50 * 1024 * 1024;
pub const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid source: {0}")]
    InvalidSource(#[from] SourceError),
    #[error("fetching {url} failed{}: {message}", status.map(|s| format!(" with status {s}")).unwrap_or_default())]
    UrlFetchFailed {
        url: String,
        status: Option<u16>,
        message: String,
    },
    #[error("payload is not a PDF")]
    NotAPdf,
    #[error("document exceeds the {limit} byte limit")]
    TooLarge { limit: u64 },
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("reading example {id:?}: {source}")]
    ExampleIo {
        id: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn check_pdf_magic(bytes: &[u8]) -> Result<(), IngestError> {
    if bytes.starts_with(PDF_MAGIC) {
        Ok(())
    } else {
        Err(IngestError::NotAPdf)
    }
}

/// Turns a [`DocumentSource`] into PDF bytes.
#[derive(Clone)]
pub struct SourceResolver {
    http: reqwest::Client,
    max_pdf_bytes: u64,
    examples: Arc<ExampleRegistry>,
}

impl SourceResolver {
    pub fn new(
        examples: Arc<ExampleRegistry>,
        max_pdf_bytes: u64,
        fetch_timeout: Duration,
    ) -> Result<Self, reqwest::Error> {
        let http = reqwest::Client::builder()
            .redirect(reqwest::redirect::Policy::limited(MAX_REDIRECTS))
            .timeout(fetch_timeout)
            .build()?;
        Ok(SourceResolver {
            http,
            max_pdf_bytes,
            examples,
        })
    }

    pub fn examples(&self) -> &ExampleRegistry {
        &self.examples
    }

    pub fn max_pdf_bytes(&self) -> u64 {
        self.max_pdf_bytes
    }

    pub async fn resolve(&self, src: &DocumentSource) -> Result<Vec<u8>, IngestError> {
        match src {
            // an empty upload is reported as "not a PDF" rather than a bad source
            DocumentSource::UploadBytes(bytes) if bytes.is_empty() => Err(IngestError::NotAPdf),
            _ => {
                src.validate()?;
                let bytes = match src {
                    DocumentSource::UploadBytes(bytes) => {
                        self.check_size(bytes.len() as u64)?;
                        bytes.clone()
                    }
                    DocumentSource::PublicUrl(url) => self.fetch(url).await?,
                    DocumentSource::BundledExample(id) => {
                        let bytes = self.examples.pdf_bytes(id)?;
                        self.check_size(bytes.len() as u64)?;
                        bytes
                    }
                };
                check_pdf_magic(&bytes)?;
                Ok(bytes)
            }
        }
    }

    fn check_size(&self, len: u64) -> Result<(), IngestError> {
        if len > self.max_pdf_bytes {
            Err(IngestError::TooLarge {
                limit: self.max_pdf_bytes,
            })
        } else {
            Ok(())
        }
    }

    async fn fetch(&self, url: &str) -> Result<Vec<u8>, IngestError> {
        let failed = |status: Option<u16>, message: String| IngestError::UrlFetchFailed {
            url: url.to_owned(),
            status,
            message,
        };
        let mut resp = self
            .http
            .get(url)
            .send()
            .await
            .map_err(|e| failed(e.status().map(|s| s.as_u16()), e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(failed(
                Some(status.as_u16()),
                status.canonical_reason().unwrap_or("error").to_owned(),
            ));
        }
        if let Some(len) = resp.content_length() {
            self.check_size(len)?;
        }
        let mut body = Vec::new();
        while let Some(chunk) = resp
            .chunk()
            .await
            .map_err(|e| failed(Some(status.as_u16()), e.to_string()))?
        {
            body.extend_from_slice(&chunk);
            self.check_size(body.len() as u64)?;
        }
        Ok(body)
    }
}
