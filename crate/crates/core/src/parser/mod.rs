//! Tolerant parsing of model Markdown into an [`InsightReport`], plus the
//! grounding check and profile validation that run on the parsed report.
//!
//! Parsing is line oriented. Headers (ATX `#` headers, or a line that is
//! nothing but a bold known section name) select the current section via the
//! synonym table in [`crate::model::section`]. Bullets and paragraph lines are
//! collected per section and then interpreted according to the section:
//!
//! | section            | item shape                                   |
//! |--------------------|----------------------------------------------|
//! | sectional, limits  | free text, signal tokens lifted out          |
//! | key contributions  | `**Title**: detail` or `Title: detail`       |
//! | critical questions | `**Question**: answer` or `Question? answer` |
//! | evidence           | `Table 2: rationale` (lead label required)   |
//! | navigation tips    | `goal: step → step → step`                   |
//!
//! Blank lines never matter. A non-bullet line that starts with whitespace
//! continues the previous item; anything else is a new item.

mod grounding;
mod validate;

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::model::labels;
use crate::model::section::{classify_header, HeaderClass, ReportSection};
use crate::model::signal::collapse_whitespace;
use crate::model::{
    lift_signals, Contribution, CriticalQA, EvidenceRef, InsightReport, NavTip, SectionInsight,
    SignalAliases, SignalledBullet,
};

pub use grounding::{ground_report, GroundingSummary};
pub use validate::{validate_report, Deficiency, ValidationResult};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("model output is empty")]
    EmptyInput,
    #[error("model output contains no recognized report headers")]
    NoRecognizedSections,
}

static ATX_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s{0,3}(#{1,6})\s+(.*?)\s*#*\s*$").expect("header regex"));
static BULLET: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\s*)(?:[-*+•]|\d{1,3}[.)])\s+(.*)$").expect("bullet regex"));
static BOLD_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\*\*([^*]+?)\*\*\s*:?\s*$").expect("bold line regex"));
static RULE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:(?:-\s*){3,}|(?:\*\s*){3,}|(?:_\s*){3,})$").expect("rule regex"));
static BOLD_SPAN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\*\*(.+?)\*\*").expect("bold span regex"));
static NAV_SPLIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\s*(?:→|->|⇒|=>|⟶)\s*").expect("nav split regex"));

/// Level assigned to bold-line headers, deeper than any ATX header.
const BOLD_HEADER_LEVEL: usize = 7;

#[derive(Debug)]
struct Item {
    text: String,
    paragraph: bool,
}

/// Whether a line is a header (ATX or bold-only) or a bullet, using the same
/// grammar as the parser.
pub(crate) fn is_structured_line(line: &str) -> bool {
    ATX_HEADER.is_match(line) || BULLET.is_match(line) || BOLD_LINE.is_match(line.trim())
}

/// Parses with the default glyph aliases.
pub fn parse_report(raw: &str) -> Result<InsightReport, ParseError> {
    parse_report_with(raw, &SignalAliases::default())
}

pub fn parse_report_with(raw: &str, aliases: &SignalAliases) -> Result<InsightReport, ParseError> {
    if raw.trim().is_empty() {
        return Err(ParseError::EmptyInput);
    }

    let mut blocks: BTreeMap<ReportSection, Vec<Item>> = BTreeMap::new();
    let mut unrecognized = Vec::new();
    // (section, header level) currently collecting items
    let mut current: Option<(ReportSection, usize)> = None;
    let mut in_fence = false;

    for line in raw.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with("```") || trimmed.starts_with("~~~") {
            in_fence = !in_fence;
            continue;
        }
        if in_fence || trimmed.is_empty() || RULE.is_match(line) {
            continue;
        }

        if let Some(caps) = ATX_HEADER.captures(line) {
            let level = caps[1].len();
            let text = caps[2].trim();
            match classify_header(text) {
                HeaderClass::Section(section) => {
                    blocks.entry(section).or_default();
                    current = Some((section, level));
                }
                HeaderClass::Group => current = None,
                HeaderClass::Unrecognized => {
                    unrecognized.push(text.to_owned());
                    // a deeper sub-heading stays inside the current section
                    if !matches!(current, Some((_, l)) if level > l) {
                        current = None;
                    }
                }
            }
            continue;
        }

        if let Some(caps) = BULLET.captures(line) {
            let text = caps[2].trim();
            if let (Some((section, _)), false) = (current, text.is_empty()) {
                push_item(&mut blocks, section, text, false);
            }
            continue;
        }

        if let Some(caps) = BOLD_LINE.captures(trimmed) {
            if let HeaderClass::Section(section) = classify_header(&caps[1]) {
                blocks.entry(section).or_default();
                current = Some((section, BOLD_HEADER_LEVEL));
                continue;
            }
        }

        let Some((section, _)) = current else { continue };
        let items = blocks.entry(section).or_default();
        let indented = line.starts_with([' ', '\t']);
        match items.last_mut() {
            Some(last) if indented => {
                last.text.push(' ');
                last.text.push_str(trimmed);
            }
            _ => items.push(Item {
                text: trimmed.to_owned(),
                paragraph: true,
            }),
        }
    }

    if blocks.is_empty() {
        return Err(ParseError::NoRecognizedSections);
    }

    let mut report = InsightReport {
        raw_model_text: raw.to_owned(),
        unrecognized_headers: unrecognized,
        ..Default::default()
    };

    for (section, items) in blocks {
        match section {
            ReportSection::Sectional(kind) => report.sectional.push(SectionInsight {
                section_kind: kind,
                bullets: signalled_bullets(&items, aliases),
            }),
            ReportSection::Limitations => report.limitations = signalled_bullets(&items, aliases),
            ReportSection::KeyContributions => {
                report.key_contributions = items
                    .iter()
                    .filter(|i| !i.paragraph || i.text.starts_with("**"))
                    .filter_map(|i| parse_contribution(&i.text, aliases))
                    .collect()
            }
            ReportSection::CriticalQuestions => {
                report.critical_questions = parse_questions(&items, aliases)
            }
            ReportSection::Evidence => {
                report.evidence_refs = items
                    .iter()
                    .filter_map(|i| parse_evidence(&i.text, aliases))
                    .collect()
            }
            ReportSection::NavigationTips => {
                report.navigation_tips = items
                    .iter()
                    .filter_map(|i| parse_nav_tip(&i.text, aliases))
                    .collect()
            }
        }
    }

    Ok(report)
}

fn push_item(
    blocks: &mut BTreeMap<ReportSection, Vec<Item>>,
    section: ReportSection,
    text: &str,
    paragraph: bool,
) {
    blocks.entry(section).or_default().push(Item {
        text: text.to_owned(),
        paragraph,
    });
}

fn signalled_bullets(items: &[Item], aliases: &SignalAliases) -> Vec<SignalledBullet> {
    items
        .iter()
        .filter_map(|item| {
            let (text, signals) = lift_signals(&item.text, aliases);
            (!text.is_empty()).then_some(SignalledBullet { text, signals })
        })
        .collect()
}

const SEPARATORS: &[char] = &[':', '-', '–', '—', ' ', '\t'];

fn trim_separators(s: &str) -> &str {
    s.trim_start_matches(SEPARATORS)
}

/// Splits a leading `**bold**` span off `text`.
fn leading_bold(text: &str) -> Option<(&str, &str)> {
    let inner = text.strip_prefix("**")?;
    let end = inner.find("**")?;
    Some((&inner[..end], &inner[end + 2..]))
}

fn parse_contribution(text: &str, aliases: &SignalAliases) -> Option<Contribution> {
    let (text, signals) = lift_signals(text, aliases);
    if text.is_empty() {
        return None;
    }
    let (title, detail) = if let Some((title, rest)) = leading_bold(&text) {
        (title.trim().trim_end_matches(':').trim().to_owned(), trim_separators(rest).to_owned())
    } else if let Some((title, rest)) = text.split_once(':') {
        (title.trim().to_owned(), rest.trim().to_owned())
    } else {
        (text.clone(), String::new())
    };
    if title.is_empty() {
        return None;
    }
    Some(Contribution {
        title: collapse_whitespace(&title),
        detail: collapse_whitespace(&detail),
        signals,
    })
}

fn parse_questions(items: &[Item], aliases: &SignalAliases) -> Vec<CriticalQA> {
    let mut out: Vec<CriticalQA> = Vec::new();
    for item in items {
        let (text, _) = lift_signals(&item.text, aliases);
        if text.is_empty() {
            continue;
        }
        let text = strip_prefix_ci(&text, "q:").unwrap_or(&text).trim().to_owned();
        if let Some((question, rest)) = leading_bold(&text) {
            let question = collapse_whitespace(question);
            if !question.is_empty() {
                out.push(CriticalQA {
                    question,
                    answer: collapse_whitespace(trim_separators(rest)),
                });
                continue;
            }
        }
        if let Some(pos) = text.find('?') {
            out.push(CriticalQA {
                question: collapse_whitespace(&text[..=pos]),
                answer: collapse_whitespace(trim_separators(&text[pos + 1..])),
            });
            continue;
        }
        // an answer written on its own line below the question
        if let Some(last) = out.last_mut().filter(|qa| qa.answer.is_empty()) {
            let answer = strip_prefix_ci(&text, "a:").unwrap_or(&text);
            last.answer = collapse_whitespace(answer);
        }
    }
    out
}

fn strip_prefix_ci<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    let head = text.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &text[prefix.len()..])
}

fn parse_evidence(text: &str, aliases: &SignalAliases) -> Option<EvidenceRef> {
    let (text, _) = lift_signals(text, aliases);
    let (label, end) = labels::leading_label(&text)?;
    let rationale = text[end..].trim_start_matches(|c: char| "*_:-–— \t".contains(c));
    Some(EvidenceRef {
        label: collapse_whitespace(label),
        rationale: collapse_whitespace(rationale),
        grounded: None,
    })
}

const STEP_LEADS: &[&str] = &["start with ", "begin with ", "then "];

fn parse_nav_tip(text: &str, aliases: &SignalAliases) -> Option<NavTip> {
    let (text, _) = lift_signals(text, aliases);
    let (goal, path) = text.split_once(':')?;
    let goal = collapse_whitespace(goal.trim_matches(|c: char| c == '*' || c == '_' || c.is_whitespace()));
    let path = path.trim_start_matches(|c: char| c == '*' || c == '_' || c.is_whitespace());
    let steps: Vec<String> = NAV_SPLIT
        .split(path)
        .filter_map(|raw| {
            let step = match BOLD_SPAN.captures(raw) {
                Some(caps) => caps[1].to_owned(),
                None => raw.replace(['*', '_'], ""),
            };
            let mut step = step.trim().trim_end_matches(['.', '…']).trim();
            for lead in STEP_LEADS {
                if let Some(rest) = strip_prefix_ci(step, lead) {
                    step = rest.trim();
                }
            }
            let step = collapse_whitespace(step);
            (!step.is_empty()).then_some(step)
        })
        .collect();
    if goal.is_empty() || steps.is_empty() {
        return None;
    }
    Some(NavTip { goal, path: steps })
}
