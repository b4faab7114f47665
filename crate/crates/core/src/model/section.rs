//! Report section taxonomy and tolerant header classification. Shared by the
//! renderer, the parser and the prompt template audit so that all three agree
//! on which headers exist.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    AbstractIntro,
    Methods,
    Results,
    Discussion,
}

impl SectionKind {
    pub const ALL: [SectionKind; 4] = [
        SectionKind::AbstractIntro,
        SectionKind::Methods,
        SectionKind::Results,
        SectionKind::Discussion,
    ];

    /// Name used in deficiency codes, e.g. `missing-section:Methods`.
    pub const fn name(self) -> &'static str {
        match self {
            SectionKind::AbstractIntro => "AbstractIntro",
            SectionKind::Methods => "Methods",
            SectionKind::Results => "Results",
            SectionKind::Discussion => "Discussion",
        }
    }

    pub const fn header(self) -> &'static str {
        match self {
            SectionKind::AbstractIntro => "Abstract & Introduction",
            SectionKind::Methods => "Methods",
            SectionKind::Results => "Results",
            SectionKind::Discussion => "Discussion",
        }
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SectionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match norm.as_str() {
            "abstract_intro" | "abstractintro" => Ok(SectionKind::AbstractIntro),
            "methods" => Ok(SectionKind::Methods),
            "results" => Ok(SectionKind::Results),
            "discussion" => Ok(SectionKind::Discussion),
            _ => Err(format!("unknown section kind {s:?}")),
        }
    }
}

/// Top-level sections of a rendered report, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportSection {
    Sectional(SectionKind),
    KeyContributions,
    Limitations,
    CriticalQuestions,
    Evidence,
    NavigationTips,
}

impl ReportSection {
    pub const ALL: [ReportSection; 9] = [
        ReportSection::Sectional(SectionKind::AbstractIntro),
        ReportSection::Sectional(SectionKind::Methods),
        ReportSection::Sectional(SectionKind::Results),
        ReportSection::Sectional(SectionKind::Discussion),
        ReportSection::KeyContributions,
        ReportSection::Limitations,
        ReportSection::CriticalQuestions,
        ReportSection::Evidence,
        ReportSection::NavigationTips,
    ];

    pub const fn header(self) -> &'static str {
        match self {
            ReportSection::Sectional(kind) => kind.header(),
            ReportSection::KeyContributions => "Key Contributions",
            ReportSection::Limitations => "Limitations",
            ReportSection::CriticalQuestions => "Critical Questions",
            ReportSection::Evidence => "Evidence",
            ReportSection::NavigationTips => "Non-Linear Navigation Tips",
        }
    }
}

/// Outcome of matching a header line against the synonym table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderClass {
    Section(ReportSection),
    /// A grouping header such as "Sectional Analysis" that only wraps
    /// recognized sub-headers.
    Group,
    Unrecognized,
}

const SYNONYMS: &[(&str, ReportSection)] = {
    use ReportSection::*;
    use SectionKind::*;
    &[
        ("abstract introduction", Sectional(AbstractIntro)),
        ("abstract intro", Sectional(AbstractIntro)),
        ("abstract", Sectional(AbstractIntro)),
        ("introduction", Sectional(AbstractIntro)),
        ("intro", Sectional(AbstractIntro)),
        ("abstract introduction background", Sectional(AbstractIntro)),
        ("methods", Sectional(Methods)),
        ("method", Sectional(Methods)),
        ("methodology", Sectional(Methods)),
        ("methods methodology", Sectional(Methods)),
        ("approach", Sectional(Methods)),
        ("proposed approach", Sectional(Methods)),
        ("results", Sectional(Results)),
        ("result", Sectional(Results)),
        ("findings", Sectional(Results)),
        ("key findings", Sectional(Results)),
        ("results findings", Sectional(Results)),
        ("experiments", Sectional(Results)),
        ("experimental results", Sectional(Results)),
        ("evaluation", Sectional(Results)),
        ("results evaluation", Sectional(Results)),
        ("discussion", Sectional(Discussion)),
        ("discussion conclusion", Sectional(Discussion)),
        ("discussion conclusions", Sectional(Discussion)),
        ("conclusion", Sectional(Discussion)),
        ("conclusions", Sectional(Discussion)),
        ("key contributions", KeyContributions),
        ("key contribution", KeyContributions),
        ("contributions", KeyContributions),
        ("main contributions", KeyContributions),
        ("limitations", Limitations),
        ("limitation", Limitations),
        ("methodological limitations", Limitations),
        ("limitations weaknesses", Limitations),
        ("weaknesses", Limitations),
        ("critical questions", CriticalQuestions),
        ("preemptive critical questions", CriticalQuestions),
        ("critical questions answers", CriticalQuestions),
        ("key questions", CriticalQuestions),
        ("evidence", Evidence),
        ("key evidence", Evidence),
        ("in paper evidence", Evidence),
        ("evidence references", Evidence),
        ("references to in paper evidence", Evidence),
        ("high impact evidence", Evidence),
        ("key figures tables", Evidence),
        ("figures tables", Evidence),
        ("non linear navigation tips", NavigationTips),
        ("nonlinear navigation tips", NavigationTips),
        ("navigation tips", NavigationTips),
        ("reading paths", NavigationTips),
        ("reading guide", NavigationTips),
        ("navigation", NavigationTips),
    ]
};

const GROUPS: &[&str] = &[
    "sectional analysis",
    "sectional analysis synthesis",
    "section by section analysis",
    "critical evaluation",
    "critical evaluation attention signals",
    "reader guidance",
];

/// Lowercases, drops punctuation, emoji, leading numbering and the word
/// "and", then collapses whitespace.
pub fn normalize_header(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                ' '
            }
        })
        .collect();
    let words: Vec<&str> = mapped
        .split_whitespace()
        .skip_while(|w| w.chars().all(|c| c.is_ascii_digit()) || is_roman_numeral(w))
        .filter(|w| *w != "and")
        .collect();
    words.join(" ")
}

fn is_roman_numeral(word: &str) -> bool {
    matches!(word, "i" | "ii" | "iii" | "iv" | "v" | "vi" | "vii" | "viii" | "ix" | "x")
}

pub fn classify_header(text: &str) -> HeaderClass {
    let norm = normalize_header(text);
    if let Some((_, section)) = SYNONYMS.iter().find(|(syn, _)| *syn == norm) {
        return HeaderClass::Section(*section);
    }
    if GROUPS.contains(&norm.as_str()) {
        return HeaderClass::Group;
    }
    HeaderClass::Unrecognized
}
