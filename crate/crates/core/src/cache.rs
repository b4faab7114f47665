//! File-per-record store of analysis results keyed by document, profile and
//! model.

use std::path::{Path, PathBuf};

use crate::fsutil::write_atomic;
use crate::model::{AnalysisRecord, CacheKey};

#[derive(Debug, Clone)]
pub struct AnalysisCache {
    dir: PathBuf,
}

/// Keeps path components to a safe character set.
fn component(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    match cleaned.trim_matches('.') {
        "" => "_".to_owned(),
        _ => cleaned,
    }
}

impl AnalysisCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        AnalysisCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir
            .join(component(&key.doc_hash))
            .join(component(&key.profile_id))
            .join(format!("{}.json", component(&key.model_id)))
    }

    /// A missing or unreadable entry is a miss; corrupt files are logged.
    pub fn get(&self, key: &CacheKey) -> Option<AnalysisRecord> {
        let path = self.path_for(key);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice::<AnalysisRecord>(&bytes) {
            Ok(record) if record.cache_key() == *key => Some(record),
            Ok(_) => {
                tracing::warn!(path = %path.display(), "cache entry key mismatch; ignoring");
                None
            }
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "corrupt cache entry; ignoring");
                None
            }
        }
    }

    pub fn put(&self, record: &AnalysisRecord) -> std::io::Result<()> {
        let bytes = serde_json::to_vec_pretty(record).map_err(std::io::Error::other)?;
        write_atomic(&self.path_for(&record.cache_key()), &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InsightReport, Timings};

    fn record(model: &str) -> AnalysisRecord {
        AnalysisRecord {
            doc_hash: "abc".into(),
            profile_id: "empirical-study".into(),
            model_id: model.into(),
            report: InsightReport::default(),
            created_at: chrono::Utc::now(),
            timings: Timings::default(),
        }
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = AnalysisCache::new(dir.path());
        let r = record("org/model:7b");
        assert!(cache.get(&r.cache_key()).is_none());
        cache.put(&r).unwrap();
        assert_eq!(cache.get(&r.cache_key()).unwrap(), r);
        let path = cache.path_for(&r.cache_key());
        assert!(path.ends_with("abc/empirical-study/org_model_7b.json"));
    }

    #[test]
    fn hostile_components_stay_inside_dir() {
        let cache = AnalysisCache::new("/c");
        let key = CacheKey {
            doc_hash: "..".into(),
            profile_id: "../../etc".into(),
            model_id: "x".into(),
        };
        let p = cache.path_for(&key);
        assert!(p.starts_with("/c"));
        assert!(!p.components().any(|c| c.as_os_str() == ".."));
    }

    #[test]
    fn corrupt_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = AnalysisCache::new(dir.path());
        let r = record("m");
        let path = cache.path_for(&r.cache_key());
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, b"{not json").unwrap();
        assert!(cache.get(&r.cache_key()).is_none());
    }
}
