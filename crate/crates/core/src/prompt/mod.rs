//! Reading-profile registry and prompt assembly.
//!
//! Profiles come from a YAML document:
//!
//! ```yaml
//! signal_aliases:
//!   "💡": "[INNOVATION]"
//! profiles:
//!   - id: empirical-study
//!     display_name: Empirical Study
//!     required_sections: [abstract_intro, methods, results]
//!     critical_questions: ["Are the conclusions supported by data?"]
//!     system_prompt: |
//!       ...
//! ```
//!
//! Every profile's prompt is audited at load time for the four components a
//! guided prompt needs (see [`PromptComponent`]); a profile that fails the
//! audit is rejected rather than served.

mod builder;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::model::section::{classify_header, HeaderClass, ReportSection};
use crate::model::{PrioritySignal, ReadingProfile, SectionKind, SignalAliases};

pub use builder::{
    build_baseline_prompt, build_guided_prompt, PromptBuilder, PromptError, PromptMode,
    PromptPayload, ModelParams, BASELINE_INSTRUCTION, DEFAULT_MAX_INPUT_CHARS, TRUNCATION_NOTICE,
};

pub const DEFAULT_PROFILE_ID: &str = "empirical-study";

/// The configuration shipped with the crate.
pub const SHIPPED_CONFIG: &str = include_str!("../../assets/prompts.yaml");

pub const SECTIONAL_TARGETS: [&str; 3] = ["core research problem", "innovative approaches", "key findings"];
pub const CONTRIBUTIONS_PHRASE: &str = "Key Contributions";
pub const NAVIGATION_PHRASE: &str = "Non-Linear Navigation Tips";
pub const NAVIGATION_GOALS_PHRASE: &str = "tailored to different user goals";

/// The four structural components every guided prompt must contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptComponent {
    /// Per-section extraction targets.
    SectionalTargets,
    /// Contributions, critical questions and the priority signal tokens.
    CriticalEvaluation,
    /// Goal-tailored non-linear reading paths.
    NavigationTips,
    /// An output template whose headers the parser recognizes.
    OutputTemplate,
}

impl PromptComponent {
    pub const fn letter(self) -> char {
        match self {
            PromptComponent::SectionalTargets => 'a',
            PromptComponent::CriticalEvaluation => 'b',
            PromptComponent::NavigationTips => 'c',
            PromptComponent::OutputTemplate => 'd',
        }
    }
}

impl fmt::Display for PromptComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PromptComponent::SectionalTargets => "sectional targets",
            PromptComponent::CriticalEvaluation => "critical evaluation",
            PromptComponent::NavigationTips => "navigation tips",
            PromptComponent::OutputTemplate => "output template",
        };
        write!(f, "({}) {}", self.letter(), name)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("prompt config is malformed: {0}")]
    Malformed(String),
    #[error("prompt config does not define the default profile {DEFAULT_PROFILE_ID:?}")]
    MissingDefaultProfile,
    #[error("profile {profile:?} is missing prompt component {component}: {detail}")]
    PromptMissingRequiredComponent {
        profile: String,
        component: PromptComponent,
        detail: String,
    },
    #[error("cannot read prompt config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    signal_aliases: BTreeMap<String, String>,
    profiles: Vec<ProfileDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    id: String,
    display_name: String,
    system_prompt: String,
    #[serde(default)]
    required_sections: Vec<String>,
    #[serde(default)]
    critical_questions: Vec<String>,
}

/// Read-only set of reading profiles plus the glyph alias table.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    profiles: Vec<ReadingProfile>,
    aliases: SignalAliases,
}

impl ProfileRegistry {
    pub fn shipped() -> Self {
        load_profiles(SHIPPED_CONFIG).expect("shipped prompt config is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        load_profiles(&text)
    }

    pub fn get(&self, id: &str) -> Option<&ReadingProfile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    pub fn default_profile(&self) -> &ReadingProfile {
        self.get(DEFAULT_PROFILE_ID)
            .expect("registry always holds the default profile")
    }

    pub fn profiles(&self) -> &[ReadingProfile] {
        &self.profiles
    }

    pub fn aliases(&self) -> &SignalAliases {
        &self.aliases
    }
}

pub fn load_profiles(config_doc: &str) -> Result<ProfileRegistry, ConfigError> {
    let doc: ConfigDoc =
        serde_yaml::from_str(config_doc).map_err(|e| ConfigError::Malformed(e.to_string()))?;

    let mut aliases = SignalAliases::empty();
    for (glyph, token) in &doc.signal_aliases {
        let signal = PrioritySignal::from_token(token).ok_or_else(|| {
            ConfigError::Malformed(format!("alias {glyph:?} maps to unknown token {token:?}"))
        })?;
        if glyph.trim().is_empty() {
            return Err(ConfigError::Malformed("empty alias glyph".into()));
        }
        aliases.insert(glyph, signal);
    }

    let mut seen = HashSet::new();
    let mut profiles = Vec::with_capacity(doc.profiles.len());
    for p in doc.profiles {
        if p.id.trim().is_empty() {
            return Err(ConfigError::Malformed("profile with empty id".into()));
        }
        if !seen.insert(p.id.clone()) {
            return Err(ConfigError::Malformed(format!("duplicate profile id {:?}", p.id)));
        }
        let required_sections = p
            .required_sections
            .iter()
            .map(|s| s.parse::<SectionKind>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Malformed(format!("profile {:?}: {e}", p.id)))?;
        let profile = ReadingProfile {
            id: p.id,
            display_name: p.display_name,
            system_prompt: p.system_prompt,
            required_sections,
            critical_question_set: p.critical_questions,
        };
        audit_prompt(&profile)?;
        profiles.push(profile);
    }

    let registry = ProfileRegistry { profiles, aliases };
    match registry.get(DEFAULT_PROFILE_ID) {
        None => Err(ConfigError::MissingDefaultProfile),
        Some(p) if p.critical_question_set.is_empty() => Err(ConfigError::Malformed(
            "default profile must define critical_questions".into(),
        )),
        Some(_) => Ok(registry),
    }
}

/// Checks the four structural components of a profile's system prompt.
pub fn audit_prompt(profile: &ReadingProfile) -> Result<(), ConfigError> {
    let missing = |component, detail: String| ConfigError::PromptMissingRequiredComponent {
        profile: profile.id.clone(),
        component,
        detail,
    };
    let prompt = profile.system_prompt.as_str();
    let lower = prompt.to_lowercase();

    if prompt.trim().is_empty() {
        return Err(missing(PromptComponent::SectionalTargets, "system prompt is empty".into()));
    }
    for target in SECTIONAL_TARGETS {
        if !lower.contains(target) {
            return Err(missing(PromptComponent::SectionalTargets, format!("no {target:?}")));
        }
    }

    if !prompt.contains(CONTRIBUTIONS_PHRASE) {
        return Err(missing(
            PromptComponent::CriticalEvaluation,
            format!("no {CONTRIBUTIONS_PHRASE:?} instruction"),
        ));
    }
    if profile.critical_question_set.is_empty() && !lower.contains("critical question") {
        return Err(missing(
            PromptComponent::CriticalEvaluation,
            "no critical questions".into(),
        ));
    }
    for question in &profile.critical_question_set {
        if !prompt.contains(question.as_str()) {
            return Err(missing(
                PromptComponent::CriticalEvaluation,
                format!("critical question {question:?} not in prompt"),
            ));
        }
    }
    for signal in PrioritySignal::ALL {
        if !prompt.contains(signal.token()) {
            return Err(missing(
                PromptComponent::CriticalEvaluation,
                format!("signal token {} not in prompt", signal.token()),
            ));
        }
    }

    if !prompt.contains(NAVIGATION_PHRASE) || !lower.contains(NAVIGATION_GOALS_PHRASE) {
        return Err(missing(
            PromptComponent::NavigationTips,
            format!("needs {NAVIGATION_PHRASE:?} {NAVIGATION_GOALS_PHRASE:?}"),
        ));
    }

    let templated = template_sections(prompt);
    let absent: Vec<&str> = ReportSection::ALL
        .iter()
        .filter(|s| !templated.contains(s))
        .map(|s| s.header())
        .collect();
    if !absent.is_empty() {
        return Err(missing(
            PromptComponent::OutputTemplate,
            format!("template lacks headers: {}", absent.join(", ")),
        ));
    }
    Ok(())
}

/// Report sections named by Markdown header lines in a prompt, classified
/// with the parser's own header table.
pub fn template_sections(prompt: &str) -> Vec<ReportSection> {
    prompt
        .lines()
        .filter_map(|line| {
            let t = line.trim_start();
            let text = t.strip_prefix('#')?.trim_start_matches('#');
            if !text.starts_with(' ') {
                return None;
            }
            match classify_header(text.trim()) {
                HeaderClass::Section(s) => Some(s),
                _ => None,
            }
        })
        .collect()
}
