//! Guided-reading analysis: turns a scientific PDF into a structured,
//! validated insight map through an OCR stage and a prompted LLM stage.
//!
//! - [`model`]: domain types, report schema, canonical Markdown rendering
//! - [`parser`]: tolerant report parsing, grounding and validation
//! - [`prompt`]: reading-profile registry and prompt assembly
//! - [`ingest`]: source resolution and OCR providers
//! - [`gateway`]: chat-completion clients (live and mock)
//! - [`eval`]: output scoring and guided-vs-baseline comparison
//! - [`pipeline`]: the end-to-end analysis flow and its concurrency bound
//! - [`service`]: HTTP API over the pipeline
//! - [`cache`]: on-disk analysis records
//! - [`retry`]: shared backoff policy

pub mod assets;
pub mod cache;
mod fsutil;
pub mod eval;
pub mod gateway;
pub mod ingest;
pub mod model;
pub mod parser;
pub mod pipeline;
pub mod prompt;
pub mod retry;
pub mod secret;
pub mod service;
