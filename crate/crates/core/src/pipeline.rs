//! The end-to-end analysis pipeline shared by the HTTP service and the CLI:
//! resolve → hash → cache → OCR → prompt → model → parse → ground → validate.

use std::fmt;
use std::sync::atomic::{AtomicU8, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use tokio::sync::{OwnedSemaphorePermit, Semaphore};

use crate::cache::AnalysisCache;
use crate::gateway::{GatewayError, ModelGateway};
use crate::ingest::{Extractor, IngestError, OcrError, SourceResolver};
use crate::model::{
    content_hash, AnalysisRecord, CacheKey, DocumentSource, ExtractedDocument, Timings,
};
use crate::parser::{ground_report, parse_report_with, validate_report, ParseError, ValidationResult};
use crate::prompt::{ProfileRegistry, PromptBuilder, PromptError, DEFAULT_PROFILE_ID};

/// Requests allowed to wait for a slot before new ones are turned away.
pub const DEFAULT_QUEUE_CAP: usize = 100;
pub const DEFAULT_MAX_CONCURRENT_ANALYSES: usize = 4;
/// Slack added on top of the provider timeouts for one request.
pub const TIMEOUT_SLACK: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Resolve,
    Ocr,
    Llm,
    Parse,
}

impl Stage {
    fn from_u8(v: u8) -> Stage {
        match v {
            0 => Stage::Resolve,
            1 => Stage::Ocr,
            2 => Stage::Llm,
            _ => Stage::Parse,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Stage::Resolve => "resolve",
            Stage::Ocr => "ocr",
            Stage::Llm => "llm",
            Stage::Parse => "parse",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bad source: {0}")]
    BadSource(String),
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
    #[error("document exceeds the {limit} byte limit")]
    TooLarge { limit: u64 },
    #[error("{stage} stage failed: {message}")]
    StageFailed { stage: Stage, message: String },
    #[error("OCR produced no text")]
    EmptyExtraction,
    #[error("model output has no recognized report sections")]
    NoRecognizedSections { raw_model_text: String },
    #[error("{stage} stage timed out after {budget:?}")]
    Timeout { stage: Stage, budget: Duration },
    #[error("analysis queue is full")]
    QueueFull,
}

impl PipelineError {
    /// Stage named in error bodies, when one applies.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::StageFailed { stage, .. } | PipelineError::Timeout { stage, .. } => {
                Some(*stage)
            }
            PipelineError::EmptyExtraction => Some(Stage::Ocr),
            PipelineError::NoRecognizedSections { .. } => Some(Stage::Parse),
            _ => None,
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::BadSource(_) => "bad-source",
            PipelineError::UnknownProfile(_) => "unknown-profile",
            PipelineError::TooLarge { .. } => "too-large",
            PipelineError::StageFailed { .. } => "stage-failed",
            PipelineError::EmptyExtraction => "empty-extraction",
            PipelineError::NoRecognizedSections { .. } => "no-recognized-sections",
            PipelineError::Timeout { .. } => "timeout",
            PipelineError::QueueFull => "queue-full",
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::TooLarge { limit } => PipelineError::TooLarge { limit },
            IngestError::InvalidSource(_) | IngestError::NotAPdf | IngestError::UnknownExample(_) => {
                PipelineError::BadSource(e.to_string())
            }
            IngestError::UrlFetchFailed { .. } | IngestError::ExampleIo { .. } => {
                PipelineError::StageFailed {
                    stage: Stage::Resolve,
                    message: e.to_string(),
                }
            }
        }
    }
}

impl From<OcrError> for PipelineError {
    fn from(e: OcrError) -> Self {
        match e {
            OcrError::EmptyExtraction => PipelineError::EmptyExtraction,
            OcrError::NotAPdf => PipelineError::BadSource(e.to_string()),
            _ => PipelineError::StageFailed {
                stage: Stage::Ocr,
                message: e.to_string(),
            },
        }
    }
}

impl From<GatewayError> for PipelineError {
    fn from(e: GatewayError) -> Self {
        PipelineError::StageFailed {
            stage: Stage::Llm,
            message: e.to_string(),
        }
    }
}

impl From<PromptError> for PipelineError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::EmptyDocument => PipelineError::EmptyExtraction,
            other => PipelineError::StageFailed {
                stage: Stage::Llm,
                message: other.to_string(),
            },
        }
    }
}

/// Bounds concurrent analyses and records the in-flight high watermark.
#[derive(Debug)]
pub struct AnalysisLimiter {
    slots: Arc<Semaphore>,
    queue_cap: usize,
    waiting: AtomicUsize,
    in_flight: Arc<AtomicUsize>,
    high_watermark: Arc<AtomicUsize>,
    max: usize,
}

/// Held for the duration of one analysis.
pub struct AnalysisSlot {
    _permit: OwnedSemaphorePermit,
    in_flight: Arc<AtomicUsize>,
}

impl Drop for AnalysisSlot {
    fn drop(&mut self) {
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

struct Queued<'a> {
    counter: &'a AtomicUsize,
    position: usize,
}

impl<'a> Queued<'a> {
    fn enter(counter: &'a AtomicUsize) -> Self {
        let position = counter.fetch_add(1, Ordering::SeqCst);
        Queued { counter, position }
    }
}

impl Drop for Queued<'_> {
    fn drop(&mut self) {
        self.counter.fetch_sub(1, Ordering::SeqCst);
    }
}

impl AnalysisLimiter {
    pub fn new(max_concurrent: usize, queue_cap: usize) -> Self {
        let max = max_concurrent.max(1);
        AnalysisLimiter {
            slots: Arc::new(Semaphore::new(max)),
            queue_cap,
            waiting: AtomicUsize::new(0),
            in_flight: Arc::new(AtomicUsize::new(0)),
            high_watermark: Arc::new(AtomicUsize::new(0)),
            max,
        }
    }

    pub fn max_concurrent(&self) -> usize {
        self.max
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.load(Ordering::SeqCst)
    }

    /// Highest number of analyses observed running at once.
    pub fn high_watermark(&self) -> usize {
        self.high_watermark.load(Ordering::SeqCst)
    }

    pub async fn acquire(&self) -> Result<AnalysisSlot, PipelineError> {
        let permit = match self.slots.clone().try_acquire_owned() {
            Ok(p) => p,
            Err(_) => {
                // decremented on drop, so a cancelled waiter leaves the queue
                let _queued = Queued::enter(&self.waiting);
                if _queued.position >= self.queue_cap {
                    return Err(PipelineError::QueueFull);
                }
                self.slots
                    .clone()
                    .acquire_owned()
                    .await
                    .expect("limiter never closed")
            }
        };
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.high_watermark.fetch_max(now, Ordering::SeqCst);
        Ok(AnalysisSlot {
            _permit: permit,
            in_flight: self.in_flight.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeRequest {
    pub source: DocumentSource,
    pub profile_id: String,
    pub force_refresh: bool,
}

impl AnalyzeRequest {
    pub fn new(source: DocumentSource) -> Self {
        AnalyzeRequest {
            source,
            profile_id: DEFAULT_PROFILE_ID.to_owned(),
            force_refresh: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub record: AnalysisRecord,
    pub cache_hit: bool,
    /// Time spent on this request; on a cache hit only the lookup.
    pub timings: Timings,
    pub validation: ValidationResult,
    pub grounding_ratio: f64,
}

/// Tracks the stage a request is in, for timeout attribution.
#[derive(Debug, Default)]
struct StageTracker(AtomicU8);

impl StageTracker {
    fn enter(&self, stage: Stage) {
        self.0.store(stage as u8, Ordering::SeqCst);
    }

    fn current(&self) -> Stage {
        Stage::from_u8(self.0.load(Ordering::SeqCst))
    }
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

pub struct Pipeline {
    resolver: SourceResolver,
    extractor: Extractor,
    gateway: Arc<dyn ModelGateway>,
    profiles: Arc<ProfileRegistry>,
    builder: PromptBuilder,
    cache: Option<AnalysisCache>,
    limiter: AnalysisLimiter,
    budget: Duration,
}

impl Pipeline {
    pub fn new(
        resolver: SourceResolver,
        extractor: Extractor,
        gateway: Arc<dyn ModelGateway>,
        profiles: Arc<ProfileRegistry>,
    ) -> Self {
        Pipeline {
            resolver,
            extractor,
            gateway,
            profiles,
            builder: PromptBuilder::default(),
            cache: None,
            limiter: AnalysisLimiter::new(DEFAULT_MAX_CONCURRENT_ANALYSES, DEFAULT_QUEUE_CAP),
            budget: Duration::from_secs(300) + TIMEOUT_SLACK,
        }
    }

    pub fn with_cache(mut self, cache: AnalysisCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_limits(mut self, max_concurrent: usize, queue_cap: usize) -> Self {
        self.limiter = AnalysisLimiter::new(max_concurrent, queue_cap);
        self
    }

    /// Whole-request budget; a request exceeding it fails with the stage it
    /// was in.
    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_builder(mut self, builder: PromptBuilder) -> Self {
        self.builder = builder;
        self
    }

    pub fn profiles(&self) -> &ProfileRegistry {
        &self.profiles
    }

    pub fn resolver(&self) -> &SourceResolver {
        &self.resolver
    }

    pub fn extractor_name(&self) -> &str {
        self.extractor.provider_name()
    }

    pub fn gateway(&self) -> &dyn ModelGateway {
        self.gateway.as_ref()
    }

    pub fn builder(&self) -> &PromptBuilder {
        &self.builder
    }

    pub fn limiter(&self) -> &AnalysisLimiter {
        &self.limiter
    }

    pub fn budget(&self) -> Duration {
        self.budget
    }

    async fn bounded<T, F>(&self, tracker: &StageTracker, fut: F) -> Result<T, PipelineError>
    where
        F: std::future::Future<Output = Result<T, PipelineError>>,
    {
        let _slot = self.limiter.acquire().await?;
        match tokio::time::timeout(self.budget, fut).await {
            Ok(r) => r,
            Err(_) => Err(PipelineError::Timeout {
                stage: tracker.current(),
                budget: self.budget,
            }),
        }
    }

    /// OCR only; no model call.
    pub async fn extract(&self, source: &DocumentSource) -> Result<ExtractedDocument, PipelineError> {
        let tracker = StageTracker::default();
        self.bounded(&tracker, async {
            tracker.enter(Stage::Resolve);
            let pdf = self.resolver.resolve(source).await?;
            tracker.enter(Stage::Ocr);
            Ok(self.extractor.extract_text(&pdf).await?)
        })
        .await
    }

    pub async fn analyze(&self, req: &AnalyzeRequest) -> Result<AnalysisOutcome, PipelineError> {
        let profile = self
            .profiles
            .get(&req.profile_id)
            .ok_or_else(|| PipelineError::UnknownProfile(req.profile_id.clone()))?;
        let tracker = StageTracker::default();
        let outcome = self
            .bounded(&tracker, self.run(req, profile, &tracker))
            .await;
        if let Err(e) = &outcome {
            tracing::warn!(stage = ?e.stage(), error = %e, "analysis failed");
        }
        outcome
    }

    async fn run(
        &self,
        req: &AnalyzeRequest,
        profile: &crate::model::ReadingProfile,
        tracker: &StageTracker,
    ) -> Result<AnalysisOutcome, PipelineError> {
        tracker.enter(Stage::Resolve);
        let pdf = self.resolver.resolve(&req.source).await?;
        let key = CacheKey {
            doc_hash: content_hash(&pdf),
            profile_id: profile.id.clone(),
            model_id: self.gateway.model_id().to_owned(),
        };

        if !req.force_refresh {
            let lookup = Instant::now();
            if let Some(record) = self.cache.as_ref().and_then(|c| c.get(&key)) {
                tracing::info!(doc_hash = %key.doc_hash, "analysis cache hit");
                let validation = validate_report(&record.report, profile);
                let grounding_ratio = record.report.grounding_ratio();
                return Ok(AnalysisOutcome {
                    record,
                    cache_hit: true,
                    timings: Timings {
                        parse_ms: ms(lookup.elapsed()),
                        ..Timings::default()
                    },
                    validation,
                    grounding_ratio,
                });
            }
        }

        tracker.enter(Stage::Ocr);
        let started = Instant::now();
        let doc = self.extractor.extract_text(&pdf).await?;
        let ocr_ms = ms(started.elapsed());

        tracker.enter(Stage::Llm);
        let payload = self.builder.guided(&doc, profile)?;
        let started = Instant::now();
        let completion = self.gateway.complete(&payload).await?;
        let llm_ms = ms(started.elapsed());

        tracker.enter(Stage::Parse);
        let started = Instant::now();
        let parsed = match parse_report_with(&completion.text, self.profiles.aliases()) {
            Ok(r) => r,
            Err(ParseError::EmptyInput) | Err(ParseError::NoRecognizedSections) => {
                return Err(PipelineError::NoRecognizedSections {
                    raw_model_text: completion.text,
                })
            }
        };
        let report = ground_report(&parsed, &doc);
        let validation = validate_report(&report, profile);
        let grounding_ratio = report.grounding_ratio();
        let timings = Timings {
            ocr_ms,
            llm_ms,
            parse_ms: ms(started.elapsed()),
        };
        tracing::info!(
            doc_hash = %key.doc_hash,
            grounding_ratio,
            passed = validation.passed,
            retries = completion.retries(),
            "analysis complete"
        );

        let record = AnalysisRecord {
            doc_hash: key.doc_hash,
            profile_id: key.profile_id,
            model_id: key.model_id,
            report,
            created_at: chrono::Utc::now(),
            timings,
        };
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put(&record) {
                tracing::warn!(error = %e, "could not write analysis cache entry");
            }
        }
        Ok(AnalysisOutcome {
            record,
            cache_hit: false,
            timings,
            validation,
            grounding_ratio,
        })
    }
}
