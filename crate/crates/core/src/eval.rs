//! Scores model outputs along seven analysis dimensions and compares the
//! guided prompt against a plain summarization prompt on the same document.
//!
//! The dimensions are qualitative, so every threshold is a named constant:
//!
//! - [`MIN_SECTIONAL_HEADERS`]: the paper-body sections a structured reading
//!   should separate. Three out of four means the output is deconstructed
//!   rather than a single summary with one stray header.
//! - [`CONTRIBUTION_CUES`]: verbs that mark a contribution statement in prose
//!   ("this paper introduces ..."). This gives a credit to summaries that state the
//!   contribution without a dedicated section.
//! - [`MIN_STRUCTURED_RATIO`]: share of non-blank lines that are headers or
//!   bullets. Prose scores 0; a bulleted report is far above 0.3, and a
//!   report with long multi-line paragraphs under each header still clears it.

use std::sync::LazyLock;

use futures::future::join_all;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::gateway::{GatewayError, ModelGateway};
use crate::model::{ExtractedDocument, InsightReport, ReadingProfile, SignalAliases};
use crate::parser::{ground_report, is_structured_line, parse_report_with};
use crate::prompt::{PromptBuilder, PromptError};

pub const MIN_SECTIONAL_HEADERS: usize = 3;
pub const CONTRIBUTION_CUES: [&str; 3] = ["introduces", "proposes", "presents"];
pub const MIN_STRUCTURED_RATIO: f64 = 0.3;

static CUE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b(?:{})\b", CONTRIBUTION_CUES.join("|"))).expect("cue regex")
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    StructuralDeconstruction,
    KeyContribution,
    Limitations,
    CriticalQuestions,
    EvidenceRefs,
    ActionableGuidance,
    OutputFormat,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::StructuralDeconstruction,
        Dimension::KeyContribution,
        Dimension::Limitations,
        Dimension::CriticalQuestions,
        Dimension::EvidenceRefs,
        Dimension::ActionableGuidance,
        Dimension::OutputFormat,
    ];

    /// Row label used in comparison tables.
    pub const fn label(self) -> &'static str {
        match self {
            Dimension::StructuralDeconstruction => "Structural Deconstruction",
            Dimension::KeyContribution => "Identification of Key Contribution",
            Dimension::Limitations => "Highlighting of Methodological Limitations",
            Dimension::CriticalQuestions => "Preemptive Critical Questions",
            Dimension::EvidenceRefs => "Reference to In-Paper Evidence",
            Dimension::ActionableGuidance => "Actionable Guidance for the Reader",
            Dimension::OutputFormat => "Output Format",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension: Dimension,
    pub satisfied: bool,
    pub evidence: String,
}

pub fn satisfied_count(scores: &[DimensionScore]) -> usize {
    scores.iter().filter(|s| s.satisfied).count()
}

/// Share of non-blank lines that are headers or bullets.
pub fn structured_line_ratio(raw: &str) -> f64 {
    let (mut structured, mut total) = (0usize, 0usize);
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        total += 1;
        if is_structured_line(line) {
            structured += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        structured as f64 / total as f64
    }
}

fn cue_sentence(raw: &str) -> Option<String> {
    raw.split_inclusive(['.', '!', '?', '\n'])
        .map(str::trim)
        .find(|s| CUE.is_match(s))
        .map(|s| s.chars().take(80).collect())
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().collect::<Vec<_>>().join(", ")
}

pub fn score_output(raw: &str, doc: &ExtractedDocument) -> Vec<DimensionScore> {
    score_output_with(raw, doc, &SignalAliases::default())
}

/// Scores one raw output. Unparseable output (prose, empty text) scores as
/// an empty report, so only the prose-level checks can succeed.
pub fn score_output_with(
    raw: &str,
    doc: &ExtractedDocument,
    aliases: &SignalAliases,
) -> Vec<DimensionScore> {
    let report = match parse_report_with(raw, aliases) {
        Ok(r) => ground_report(&r, doc),
        Err(_) => InsightReport::default(),
    };
    let score = |dimension, satisfied, evidence: String| DimensionScore {
        dimension,
        satisfied,
        evidence,
    };

    let headers = list(report.sectional.iter().map(|s| s.section_kind.to_string()));
    let structural = score(
        Dimension::StructuralDeconstruction,
        report.sectional.len() >= MIN_SECTIONAL_HEADERS,
        format!("{} sectional header(s){}", report.sectional.len(), sep(&headers)),
    );

    let contribution = if let Some(c) = report.key_contributions.first() {
        score(
            Dimension::KeyContribution,
            true,
            format!("{} contribution(s); first: {}", report.key_contributions.len(), c.title),
        )
    } else if let Some(sentence) = cue_sentence(raw) {
        score(Dimension::KeyContribution, true, format!("contribution statement: {sentence}"))
    } else {
        score(Dimension::KeyContribution, false, "no contribution statement".into())
    };

    let limitations = score(
        Dimension::Limitations,
        !report.limitations.is_empty(),
        format!("{} limitation(s)", report.limitations.len()),
    );

    let answered: Vec<_> = report
        .critical_questions
        .iter()
        .filter(|q| !q.answer.trim().is_empty())
        .collect();
    let questions = score(
        Dimension::CriticalQuestions,
        !answered.is_empty(),
        format!("{} answered question(s)", answered.len()),
    );

    let grounded: Vec<String> = report
        .evidence_refs
        .iter()
        .filter(|e| e.grounded == Some(true))
        .map(|e| e.label.clone())
        .collect();
    let evidence = score(
        Dimension::EvidenceRefs,
        !grounded.is_empty(),
        format!(
            "{}/{} reference(s) grounded{}",
            grounded.len(),
            report.evidence_refs.len(),
            sep(&list(grounded.iter().cloned()))
        ),
    );

    let guidance = score(
        Dimension::ActionableGuidance,
        !report.navigation_tips.is_empty(),
        format!(
            "{} navigation tip(s){}",
            report.navigation_tips.len(),
            sep(&list(report.navigation_tips.iter().map(|t| t.goal.clone())))
        ),
    );

    let ratio = structured_line_ratio(raw);
    let format = score(
        Dimension::OutputFormat,
        ratio >= MIN_STRUCTURED_RATIO,
        format!("structured-line ratio {ratio:.2}"),
    );

    vec![structural, contribution, limitations, questions, evidence, guidance, format]
}

fn sep(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(": {s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dimension: Dimension,
    pub guided: bool,
    pub baseline: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub doc_hash: String,
    pub guided: Vec<DimensionScore>,
    pub baseline: Vec<DimensionScore>,
}

impl Comparison {
    pub fn from_outputs(guided_raw: &str, baseline_raw: &str, doc: &ExtractedDocument) -> Self {
        Comparison {
            doc_hash: doc.doc_hash.clone(),
            guided: score_output(guided_raw, doc),
            baseline: score_output(baseline_raw, doc),
        }
    }

    pub fn guided_count(&self) -> usize {
        satisfied_count(&self.guided)
    }

    pub fn baseline_count(&self) -> usize {
        satisfied_count(&self.baseline)
    }

    pub fn rows(&self) -> Vec<ComparisonRow> {
        self.guided
            .iter()
            .zip(&self.baseline)
            .map(|(g, b)| ComparisonRow {
                dimension: g.dimension,
                guided: g.satisfied,
                baseline: b.satisfied,
                evidence: format!("guided: {}; baseline: {}", g.evidence, b.evidence),
            })
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let mark = |s: &DimensionScore| {
            format!("{} {}", if s.satisfied { "✓" } else { "✗" }, s.evidence.replace('|', "\\|"))
        };
        let mut out = String::from("| Dimension of Analysis | Guided | Baseline |\n|---|---|---|\n");
        for (g, b) in self.guided.iter().zip(&self.baseline) {
            out.push_str(&format!("| {} | {} | {} |\n", g.dimension.label(), mark(g), mark(b)));
        }
        out.push_str(&format!(
            "| **Satisfied** | {}/{} | {}/{} |\n",
            self.guided_count(),
            self.guided.len(),
            self.baseline_count(),
            self.baseline.len()
        ));
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error("building prompt: {0}")]
    Prompt(#[from] PromptError),
    #[error("{mode} completion failed: {source}")]
    Model {
        mode: &'static str,
        #[source]
        source: GatewayError,
    },
}

/// Runs the guided and the baseline prompt on `doc` with the same model.
pub async fn compare(
    doc: &ExtractedDocument,
    profile: &ReadingProfile,
    gateway: &dyn ModelGateway,
    builder: &PromptBuilder,
) -> Result<Comparison, CompareError> {
    let guided = builder.guided(doc, profile)?;
    let baseline = builder.baseline(doc)?;
    let (g, b) = futures::join!(gateway.complete(&guided), gateway.complete(&baseline));
    let g = g.map_err(|source| CompareError::Model { mode: "guided", source })?;
    let b = b.map_err(|source| CompareError::Model { mode: "baseline", source })?;
    Ok(Comparison::from_outputs(&g.text, &b.text, doc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionTally {
    pub dimension: Dimension,
    pub guided: usize,
    pub baseline: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
    pub tallies: Vec<DimensionTally>,
    pub guided_total: usize,
    pub baseline_total: usize,
}

impl CorpusReport {
    pub fn from_entries(entries: Vec<CorpusEntry>) -> Self {
        let tallies = Dimension::ALL
            .iter()
            .enumerate()
            .map(|(i, &dimension)| DimensionTally {
                dimension,
                guided: entries.iter().filter(|e| e.comparison.guided[i].satisfied).count(),
                baseline: entries.iter().filter(|e| e.comparison.baseline[i].satisfied).count(),
            })
            .collect();
        CorpusReport {
            guided_total: entries.iter().map(|e| e.comparison.guided_count()).sum(),
            baseline_total: entries.iter().map(|e| e.comparison.baseline_count()).sum(),
            entries,
            tallies,
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("### {}\n\n{}\n", e.id, e.comparison.to_markdown()));
        }
        out.push_str("### Aggregate\n\n| Dimension of Analysis | Guided | Baseline |\n|---|---|---|\n");
        let n = self.entries.len();
        for t in &self.tallies {
            out.push_str(&format!("| {} | {}/{n} | {}/{n} |\n", t.dimension.label(), t.guided, t.baseline));
        }
        out.push_str(&format!(
            "| **Satisfied** | {}/{} | {}/{} |\n",
            self.guided_total,
            n * Dimension::ALL.len(),
            self.baseline_total,
            n * Dimension::ALL.len()
        ));
        out
    }
}

/// Compares every document concurrently; ordering follows `docs`.
pub async fn compare_corpus(
    docs: &[(String, ExtractedDocument)],
    profile: &ReadingProfile,
    gateway: &dyn ModelGateway,
    builder: &PromptBuilder,
) -> Result<CorpusReport, (String, CompareError)> {
    let results = join_all(docs.iter().map(|(id, doc)| async move {
        compare(doc, profile, gateway, builder)
            .await
            .map(|comparison| CorpusEntry { id: id.clone(), comparison })
            .map_err(|e| (id.clone(), e))
    }))
    .await;
    Ok(CorpusReport::from_entries(results.into_iter().collect::<Result<_, _>>()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PageText;

    fn doc(text: &str) -> ExtractedDocument {
        ExtractedDocument::from_pages(
            "h".into(),
            vec![PageText { page_no: 1, markdown: text.into() }],
        )
        .unwrap()
    }

    #[test]
    fn seven_rows_always() {
        let d = doc("Table 1");
        for raw in ["", "ok.", "## Methods\n- x", "prose only"] {
            let s = score_output(raw, &d);
            assert_eq!(s.len(), 7);
            let dims: Vec<_> = s.iter().map(|x| x.dimension).collect();
            assert_eq!(dims, Dimension::ALL);
        }
    }

    #[test]
    fn degenerate_text_scores_zero() {
        assert_eq!(satisfied_count(&score_output("ok.", &doc("Table 1"))), 0);
    }

    #[test]
    fn cue_words_credit_prose_contributions() {
        let s = score_output("The authors propose nothing. This work presents a cache.", &doc("x"));
        assert!(s[1].satisfied, "{:?}", s[1]);
        assert_eq!(satisfied_count(&s), 1);
        // "represents" must not count as "presents"
        assert!(!score_output("It represents a shift.", &doc("x"))[1].satisfied);
    }

    #[test]
    fn structured_ratio_counts_headers_and_bullets() {
        assert_eq!(structured_line_ratio("## A\n- b\n\ntext\ntext"), 0.5);
        assert_eq!(structured_line_ratio("**Methods**\n1. one\n2) two"), 1.0);
        assert_eq!(structured_line_ratio(""), 0.0);
    }

    #[test]
    fn ungrounded_evidence_does_not_count() {
        let raw = "## Evidence\n- Table 9: missing\n";
        let s = score_output(raw, &doc("Table 1 only"));
        assert!(!s[4].satisfied);
        let s = score_output("## Evidence\n- Table 1: here\n", &doc("Table 1 only"));
        assert!(s[4].satisfied);
    }

    #[test]
    fn identical_outputs_give_identical_rows() {
        let d = doc("Table 1");
        let c = Comparison::from_outputs("## Methods\n- a", "## Methods\n- a", &d);
        assert_eq!(c.guided, c.baseline);
        assert!(c.rows().iter().all(|r| r.guided == r.baseline));
        assert!(c.to_markdown().contains("| Output Format |"));
    }
}
