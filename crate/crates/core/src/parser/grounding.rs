use serde::Serialize;

use crate::model::{ExtractedDocument, InsightReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundingSummary {
    pub total: usize,
    pub grounded: usize,
    pub ratio: f64,
}

impl GroundingSummary {
    pub fn of(report: &InsightReport) -> Self {
        let grounded = report
            .evidence_refs
            .iter()
            .filter(|e| e.grounded == Some(true))
            .count();
        GroundingSummary {
            total: report.evidence_refs.len(),
            grounded,
            ratio: report.grounding_ratio(),
        }
    }
}

/// Marks each evidence ref grounded iff its label occurs, case-insensitively,
/// in the document's concatenated text. This is plain substring occurrence:
/// it proves the anchor exists, not that the cited claim is true.
pub fn ground_report(report: &InsightReport, doc: &ExtractedDocument) -> InsightReport {
    let haystack = doc.concatenated_text().to_lowercase();
    let mut out = report.clone();
    for evidence in &mut out.evidence_refs {
        let needle = evidence.label.to_lowercase();
        evidence.grounded = Some(!needle.is_empty() && haystack.contains(&needle));
    }
    let summary = GroundingSummary::of(&out);
    tracing::debug!(
        doc_hash = %doc.doc_hash,
        total = summary.total,
        grounded = summary.grounded,
        ratio = summary.ratio,
        "grounding check"
    );
    out
}
