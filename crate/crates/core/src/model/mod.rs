//! Shared domain types, the insight report schema and its canonical Markdown
//! rendering. Everything here is immutable after construction and pure.

pub mod labels;
mod render;
pub mod section;
pub mod signal;

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use render::render_report;
pub use section::{classify_header, HeaderClass, ReportSection, SectionKind};
pub use signal::{canonical_signal, lift_signals, PrioritySignal, SignalAliases};

/// Hex SHA-256 of the given bytes. Used for document and request hashes.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where a PDF comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocumentSource {
    UploadBytes(Vec<u8>),
    PublicUrl(String),
    BundledExample(String),
}

impl DocumentSource {
    /// Checks the invariants that do not need I/O. Example ids are checked
    /// against the registry at resolution time.
    pub fn validate(&self) -> Result<(), SourceError> {
        match self {
            DocumentSource::UploadBytes(b) if b.is_empty() => Err(SourceError::EmptyUpload),
            DocumentSource::UploadBytes(_) => Ok(()),
            DocumentSource::PublicUrl(raw) => {
                let parsed = url::Url::parse(raw)
                    .map_err(|e| SourceError::InvalidUrl(format!("{raw}: {e}")))?;
                match parsed.scheme() {
                    "http" | "https" if parsed.host().is_some() => Ok(()),
                    _ => Err(SourceError::InvalidUrl(format!(
                        "{raw}: only absolute http(s) URLs are accepted"
                    ))),
                }
            }
            DocumentSource::BundledExample(id) if id.trim().is_empty() => {
                Err(SourceError::EmptyExampleId)
            }
            DocumentSource::BundledExample(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SourceError {
    #[error("uploaded document is empty")]
    EmptyUpload,
    #[error("invalid URL {0}")]
    InvalidUrl(String),
    #[error("example id is empty")]
    EmptyExampleId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageText {
    pub page_no: u32,
    pub markdown: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLabel {
    pub label: String,
    pub page_no: u32,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DocumentError {
    #[error("document has no pages")]
    NoPages,
    #[error("page numbers must start at 1 and strictly increase (saw {prev} then {next})")]
    PageOrder { prev: u32, next: u32 },
    #[error("structure label {0:?} does not occur in the document text")]
    LabelNotFound(String),
    #[error("char_count {stored} does not match the page text ({actual})")]
    CharCount { stored: usize, actual: usize },
}

const PAGE_JOIN: &str = "\n\n";

/// OCR output: page-anchored Markdown plus an index of in-paper labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedDocument {
    pub doc_hash: String,
    pub pages: Vec<PageText>,
    pub structure_index: Vec<SourceLabel>,
    pub char_count: usize,
}

impl ExtractedDocument {
    /// Builds a document from its pages, scanning the text for labels.
    pub fn from_pages(doc_hash: String, pages: Vec<PageText>) -> Result<Self, DocumentError> {
        check_pages(&pages)?;
        let structure_index = index_labels(&pages);
        let char_count = pages.iter().map(|p| p.markdown.chars().count()).sum();
        Ok(ExtractedDocument {
            doc_hash,
            pages,
            structure_index,
            char_count,
        })
    }

    /// Re-checks invariants, e.g. after deserializing from an untrusted file.
    pub fn validate(&self) -> Result<(), DocumentError> {
        check_pages(&self.pages)?;
        let haystack = self.concatenated_text().to_lowercase();
        for label in &self.structure_index {
            if !haystack.contains(&label.label.to_lowercase()) {
                return Err(DocumentError::LabelNotFound(label.label.clone()));
            }
        }
        let actual = self.pages.iter().map(|p| p.markdown.chars().count()).sum();
        if actual != self.char_count {
            return Err(DocumentError::CharCount {
                stored: self.char_count,
                actual,
            });
        }
        Ok(())
    }

    pub fn concatenated_text(&self) -> String {
        self.pages
            .iter()
            .map(|p| p.markdown.as_str())
            .collect::<Vec<_>>()
            .join(PAGE_JOIN)
    }

    /// Page holding the first occurrence of `label`, via the structure index.
    pub fn locate(&self, label: &str) -> Option<u32> {
        let key = labels::label_key(label);
        self.structure_index
            .iter()
            .find(|l| labels::label_key(&l.label) == key)
            .map(|l| l.page_no)
    }
}

fn check_pages(pages: &[PageText]) -> Result<(), DocumentError> {
    let first = pages.first().ok_or(DocumentError::NoPages)?;
    if first.page_no == 0 {
        return Err(DocumentError::PageOrder { prev: 0, next: 0 });
    }
    for pair in pages.windows(2) {
        if pair[1].page_no <= pair[0].page_no {
            return Err(DocumentError::PageOrder {
                prev: pair[0].page_no,
                next: pair[1].page_no,
            });
        }
    }
    Ok(())
}

/// Unique labels in order of first occurrence, each with its first page.
/// Labels never span lines, so scanning page by page yields the same set as
/// scanning the concatenated text.
fn index_labels(pages: &[PageText]) -> Vec<SourceLabel> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for page in pages {
        for m in labels::find_labels(&page.markdown) {
            if seen.insert(labels::label_key(m.text)) {
                out.push(SourceLabel {
                    label: m.text.to_owned(),
                    page_no: page.page_no,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalledBullet {
    pub text: String,
    #[serde(default)]
    pub signals: Vec<PrioritySignal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionInsight {
    pub section_kind: SectionKind,
    pub bullets: Vec<SignalledBullet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub title: String,
    pub detail: String,
    #[serde(default)]
    pub signals: Vec<PrioritySignal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalQA {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRef {
    pub label: String,
    pub rationale: String,
    #[serde(default)]
    pub grounded: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavTip {
    pub goal: String,
    pub path: Vec<String>,
}

/// The structured analytical output that replaces a prose summary.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InsightReport {
    pub sectional: Vec<SectionInsight>,
    #[serde(default)]
    pub key_contributions: Vec<Contribution>,
    #[serde(default)]
    pub limitations: Vec<SignalledBullet>,
    #[serde(default)]
    pub critical_questions: Vec<CriticalQA>,
    #[serde(default)]
    pub evidence_refs: Vec<EvidenceRef>,
    #[serde(default)]
    pub navigation_tips: Vec<NavTip>,
    #[serde(default)]
    pub raw_model_text: String,
    /// Headers in the model output that matched no known section.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unrecognized_headers: Vec<String>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("report has no sectional analysis")]
    NoSections,
    #[error("section {0} appears more than once")]
    DuplicateSection(SectionKind),
    #[error("empty bullet text in {0}")]
    EmptyBullet(&'static str),
    #[error("navigation tip {0:?} has an empty path")]
    EmptyNavPath(String),
    #[error("empty {0}")]
    EmptyField(&'static str),
}

impl InsightReport {
    pub fn check_invariants(&self) -> Result<(), ReportError> {
        if self.sectional.is_empty() {
            return Err(ReportError::NoSections);
        }
        let mut kinds = HashSet::new();
        for s in &self.sectional {
            if !kinds.insert(s.section_kind) {
                return Err(ReportError::DuplicateSection(s.section_kind));
            }
            if s.bullets.iter().any(|b| b.text.trim().is_empty()) {
                return Err(ReportError::EmptyBullet("sectional analysis"));
            }
        }
        if self.limitations.iter().any(|b| b.text.trim().is_empty()) {
            return Err(ReportError::EmptyBullet("limitations"));
        }
        if self.key_contributions.iter().any(|c| c.title.trim().is_empty()) {
            return Err(ReportError::EmptyField("contribution title"));
        }
        if self.critical_questions.iter().any(|q| q.question.trim().is_empty()) {
            return Err(ReportError::EmptyField("critical question"));
        }
        if self.evidence_refs.iter().any(|e| e.label.trim().is_empty()) {
            return Err(ReportError::EmptyField("evidence label"));
        }
        for tip in &self.navigation_tips {
            if tip.path.is_empty() || tip.path.iter().any(|s| s.trim().is_empty()) {
                return Err(ReportError::EmptyNavPath(tip.goal.clone()));
            }
        }
        Ok(())
    }

    pub fn section(&self, kind: SectionKind) -> Option<&SectionInsight> {
        self.sectional.iter().find(|s| s.section_kind == kind)
    }

    /// Equality of everything the Markdown rendering carries. Ignores the raw
    /// model text, unrecognized headers and grounding annotations, none of
    /// which are part of the rendered structure.
    pub fn structurally_eq(&self, other: &InsightReport) -> bool {
        fn strip(r: &InsightReport) -> InsightReport {
            let mut r = r.clone();
            r.raw_model_text.clear();
            r.unrecognized_headers.clear();
            for e in &mut r.evidence_refs {
                e.grounded = None;
            }
            r
        }
        strip(self) == strip(other)
    }

    /// Fraction of evidence refs marked grounded. Vacuously 1.0 with none.
    pub fn grounding_ratio(&self) -> f64 {
        if self.evidence_refs.is_empty() {
            return 1.0;
        }
        let grounded = self
            .evidence_refs
            .iter()
            .filter(|e| e.grounded == Some(true))
            .count();
        grounded as f64 / self.evidence_refs.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub ocr_ms: u64,
    pub llm_ms: u64,
    pub parse_ms: u64,
}

/// Cached result of one (document, profile, model) analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub doc_hash: String,
    pub profile_id: String,
    pub model_id: String,
    pub report: InsightReport,
    pub created_at: DateTime<Utc>,
    pub timings: Timings,
}

impl AnalysisRecord {
    pub fn cache_key(&self) -> CacheKey {
        CacheKey {
            doc_hash: self.doc_hash.clone(),
            profile_id: self.profile_id.clone(),
            model_id: self.model_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub doc_hash: String,
    pub profile_id: String,
    pub model_id: String,
}

/// A named prompt configuration encoding a reading methodology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingProfile {
    pub id: String,
    pub display_name: String,
    pub system_prompt: String,
    pub required_sections: Vec<SectionKind>,
    pub critical_question_set: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(no: u32, md: &str) -> PageText {
        PageText {
            page_no: no,
            markdown: md.to_owned(),
        }
    }

    #[test]
    fn source_validation() {
        assert_eq!(
            DocumentSource::UploadBytes(vec![]).validate(),
            Err(SourceError::EmptyUpload)
        );
        assert!(DocumentSource::PublicUrl("https://example.org/a.pdf".into())
            .validate()
            .is_ok());
        assert!(DocumentSource::PublicUrl("ftp://example.org/a.pdf".into())
            .validate()
            .is_err());
        assert!(DocumentSource::PublicUrl("/relative/a.pdf".into())
            .validate()
            .is_err());
        assert!(DocumentSource::BundledExample(" ".into()).validate().is_err());
    }

    #[test]
    fn document_indexes_labels_with_first_page() {
        let doc = ExtractedDocument::from_pages(
            "h".into(),
            vec![
                page(1, "See Table 2 and Section 3."),
                page(2, "table 2 again, Figure 1"),
            ],
        )
        .unwrap();
        let labels: Vec<_> = doc
            .structure_index
            .iter()
            .map(|l| (l.label.as_str(), l.page_no))
            .collect();
        assert_eq!(labels, vec![("Table 2", 1), ("Section 3", 1), ("Figure 1", 2)]);
        assert_eq!(doc.locate("TABLE 2"), Some(1));
        assert_eq!(doc.locate("Figure 9"), None);
        doc.validate().unwrap();
    }

    #[test]
    fn document_rejects_bad_pages() {
        assert_eq!(
            ExtractedDocument::from_pages("h".into(), vec![]),
            Err(DocumentError::NoPages)
        );
        assert!(matches!(
            ExtractedDocument::from_pages("h".into(), vec![page(2, "a"), page(2, "b")]),
            Err(DocumentError::PageOrder { .. })
        ));
        assert!(ExtractedDocument::from_pages("h".into(), vec![page(0, "a")]).is_err());
    }

    #[test]
    fn validate_catches_tampered_index() {
        let mut doc =
            ExtractedDocument::from_pages("h".into(), vec![page(1, "Table 1")]).unwrap();
        doc.structure_index.push(SourceLabel {
            label: "Table 9".into(),
            page_no: 1,
        });
        assert_eq!(
            doc.validate(),
            Err(DocumentError::LabelNotFound("Table 9".into()))
        );
    }

    #[test]
    fn content_hash_is_stable() {
        assert_eq!(
            content_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn grounding_ratio_conventions() {
        let mut report = InsightReport::default();
        assert_eq!(report.grounding_ratio(), 1.0);
        report.evidence_refs = vec![
            EvidenceRef {
                label: "Table 1".into(),
                rationale: String::new(),
                grounded: Some(true),
            },
            EvidenceRef {
                label: "Table 9".into(),
                rationale: String::new(),
                grounded: Some(false),
            },
        ];
        assert_eq!(report.grounding_ratio(), 0.5);
    }

    #[test]
    fn invariants() {
        let mut report = InsightReport::default();
        assert_eq!(report.check_invariants(), Err(ReportError::NoSections));
        report.sectional = vec![
            SectionInsight {
                section_kind: SectionKind::Methods,
                bullets: vec![],
            },
            SectionInsight {
                section_kind: SectionKind::Methods,
                bullets: vec![],
            },
        ];
        assert_eq!(
            report.check_invariants(),
            Err(ReportError::DuplicateSection(SectionKind::Methods))
        );
        report.sectional.pop();
        report.navigation_tips.push(NavTip {
            goal: "g".into(),
            path: vec![],
        });
        assert!(matches!(
            report.check_invariants(),
            Err(ReportError::EmptyNavPath(_))
        ));
    }

    #[test]
    fn wire_encoding_is_snake_case() {
        let report = InsightReport {
            sectional: vec![SectionInsight {
                section_kind: SectionKind::AbstractIntro,
                bullets: vec![SignalledBullet {
                    text: "x".into(),
                    signals: vec![PrioritySignal::Innovation],
                }],
            }],
            ..Default::default()
        };
        let v = serde_json::to_value(&report).unwrap();
        assert_eq!(v["sectional"][0]["section_kind"], "abstract_intro");
        assert!(v.get("key_contributions").is_some());
        assert!(v.get("raw_model_text").is_some());
        assert!(v.get("unrecognized_headers").is_none());
        let back: InsightReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, report);
    }
}
