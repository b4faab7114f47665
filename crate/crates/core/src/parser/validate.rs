use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{InsightReport, ReadingProfile, SectionKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deficiency {
    MissingSection(SectionKind),
    NoKeyContributions,
    NoAnsweredCriticalQuestions,
}

impl fmt::Display for Deficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deficiency::MissingSection(kind) => write!(f, "missing-section:{}", kind.name()),
            Deficiency::NoKeyContributions => f.write_str("no-key-contributions"),
            Deficiency::NoAnsweredCriticalQuestions => {
                f.write_str("no-answered-critical-questions")
            }
        }
    }
}

impl Serialize for Deficiency {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationResult {
    pub passed: bool,
    pub deficiencies: Vec<Deficiency>,
}

impl ValidationResult {
    pub fn codes(&self) -> Vec<String> {
        self.deficiencies.iter().map(ToString::to_string).collect()
    }
}

/// Checks a parsed report against what the profile requires. Never fails;
/// problems are reported as named deficiencies.
pub fn validate_report(report: &InsightReport, profile: &ReadingProfile) -> ValidationResult {
    let mut deficiencies: Vec<Deficiency> = profile
        .required_sections
        .iter()
        .filter(|kind| report.section(**kind).is_none())
        .map(|kind| Deficiency::MissingSection(*kind))
        .collect();
    if report.key_contributions.is_empty() {
        deficiencies.push(Deficiency::NoKeyContributions);
    }
    if !report
        .critical_questions
        .iter()
        .any(|qa| !qa.answer.trim().is_empty())
    {
        deficiencies.push(Deficiency::NoAnsweredCriticalQuestions);
    }
    ValidationResult {
        passed: deficiencies.is_empty(),
        deficiencies,
    }
}
