//! Locations of the files shipped under `crates/core/assets`.
//!
//! Paths are fixed at build time, which suits running from a checkout. An
//! installed binary should point the `INSIGHT_*` variables at copies instead.

use std::path::PathBuf;

pub fn assets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets")
}

pub fn prompts_path() -> PathBuf {
    assets_dir().join("prompts.yaml")
}

pub fn examples_dir() -> PathBuf {
    assets_dir().join("examples")
}

/// Recorded OCR responses, one per bundled example, named by PDF hash.
pub fn ocr_fixtures_dir() -> PathBuf {
    assets_dir().join("fixtures").join("ocr")
}

/// Route table for the mock gateway.
pub fn model_routes_path() -> PathBuf {
    assets_dir().join("fixtures").join("model").join("routes.json")
}
