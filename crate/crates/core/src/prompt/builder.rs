use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ExtractedDocument, ReadingProfile};

pub const DEFAULT_MAX_INPUT_CHARS: usize = 300_000;
pub const DEFAULT_TEMPERATURE: f32 = 0.2;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 4096;

/// Generic instruction used for the comparison condition.
pub const BASELINE_INSTRUCTION: &str = "Summarize the provided paper";

/// Appended after the kept head of an oversized document.
pub const TRUNCATION_NOTICE: &str = "\n[Document truncated: the remaining text exceeded the input limit.]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Guided,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub temperature: f32,
    pub max_output_tokens: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            temperature: DEFAULT_TEMPERATURE,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPayload {
    pub mode: PromptMode,
    pub system_text: String,
    pub user_text: String,
    pub model_params: ModelParams,
}

impl PromptPayload {
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.mode == PromptMode::Guided && self.system_text.trim().is_empty() {
            return Err(PromptError::EmptySystemPrompt);
        }
        if !(0.0..=2.0).contains(&self.model_params.temperature) {
            return Err(PromptError::Temperature(self.model_params.temperature));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PromptError {
    #[error("document has no text to analyze")]
    EmptyDocument,
    #[error("guided prompt needs a non-empty system prompt")]
    EmptySystemPrompt,
    #[error("temperature {0} outside 0..=2")]
    Temperature(f32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBuilder {
    pub max_input_chars: usize,
    pub params: ModelParams,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        PromptBuilder {
            max_input_chars: DEFAULT_MAX_INPUT_CHARS,
            params: ModelParams::default(),
        }
    }
}

impl PromptBuilder {
    /// Page-separated document text, truncated at the tail if it exceeds
    /// `max_input_chars` characters.
    pub fn document_text(&self, doc: &ExtractedDocument) -> Result<String, PromptError> {
        if doc.pages.iter().all(|p| p.markdown.trim().is_empty()) {
            return Err(PromptError::EmptyDocument);
        }
        let mut text = String::new();
        for page in &doc.pages {
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&format!("--- page {} ---\n", page.page_no));
            text.push_str(page.markdown.trim_end());
            text.push('\n');
        }
        if text.chars().count() > self.max_input_chars {
            let cut = text
                .char_indices()
                .nth(self.max_input_chars)
                .map(|(i, _)| i)
                .unwrap_or(text.len());
            text.truncate(cut);
            text.push_str(TRUNCATION_NOTICE);
        }
        Ok(text)
    }

    pub fn guided(
        &self,
        doc: &ExtractedDocument,
        profile: &ReadingProfile,
    ) -> Result<PromptPayload, PromptError> {
        let payload = PromptPayload {
            mode: PromptMode::Guided,
            system_text: profile.system_prompt.clone(),
            user_text: self.document_text(doc)?,
            model_params: self.params,
        };
        payload.validate()?;
        Ok(payload)
    }

    pub fn baseline(&self, doc: &ExtractedDocument) -> Result<PromptPayload, PromptError> {
        let payload = PromptPayload {
            mode: PromptMode::Baseline,
            system_text: String::new(),
            user_text: format!("{BASELINE_INSTRUCTION}\n\n{}", self.document_text(doc)?),
            model_params: self.params,
        };
        payload.validate()?;
        Ok(payload)
    }
}

pub fn build_guided_prompt(
    doc: &ExtractedDocument,
    profile: &ReadingProfile,
) -> Result<PromptPayload, PromptError> {
    PromptBuilder::default().guided(doc, profile)
}

pub fn build_baseline_prompt(doc: &ExtractedDocument) -> Result<PromptPayload, PromptError> {
    PromptBuilder::default().baseline(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PageText;
    use crate::prompt::ProfileRegistry;

    fn doc(pages: &[&str]) -> ExtractedDocument {
        ExtractedDocument::from_pages(
            "h".into(),
            pages
                .iter()
                .enumerate()
                .map(|(i, md)| PageText {
                    page_no: i as u32 + 1,
                    markdown: md.to_string(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn guided_uses_profile_and_page_separators() {
        let reg = ProfileRegistry::shipped();
        let p = build_guided_prompt(&doc(&["first", "second"]), reg.default_profile()).unwrap();
        assert_eq!(p.system_text, reg.default_profile().system_prompt);
        assert!(p.user_text.contains("--- page 1 ---"));
        assert!(p.user_text.contains("--- page 2 ---"));
        assert!(p.user_text.contains("first") && p.user_text.contains("second"));
        assert!(p.system_text.contains("Are the conclusions supported by data?"));
        assert_eq!(p.model_params.temperature, 0.2);
        assert_eq!(p.model_params.max_output_tokens, 4096);
    }

    #[test]
    fn baseline_starts_with_instruction() {
        let p = build_baseline_prompt(&doc(&["body"])).unwrap();
        assert!(p.system_text.is_empty());
        assert!(p.user_text.starts_with("Summarize the provided paper"));
        assert_eq!(p.mode, PromptMode::Baseline);
    }

    #[test]
    fn empty_document_is_a_contract_error() {
        assert_eq!(
            build_baseline_prompt(&doc(&["  ", ""])),
            Err(PromptError::EmptyDocument)
        );
    }

    #[test]
    fn truncation_length_bound_and_shared_rule() {
        let builder = PromptBuilder {
            max_input_chars: 1000,
            ..Default::default()
        };
        let big = "é".repeat(3000);
        let d = doc(&[&big, "tail marker"]);
        let reg = ProfileRegistry::shipped();
        let guided = builder.guided(&d, reg.default_profile()).unwrap();
        let n = guided.user_text.chars().count();
        assert!(n <= 1000 + TRUNCATION_NOTICE.chars().count(), "{n}");
        assert!(guided.user_text.ends_with(TRUNCATION_NOTICE));
        assert!(!guided.user_text.contains("tail marker"));
        assert!(guided.user_text.starts_with("--- page 1 ---"));

        let baseline = builder.baseline(&d).unwrap();
        let rest = baseline
            .user_text
            .strip_prefix(&format!("{BASELINE_INSTRUCTION}\n\n"))
            .unwrap();
        assert_eq!(rest, guided.user_text);
    }

    #[test]
    fn short_documents_are_not_truncated() {
        let p = build_baseline_prompt(&doc(&["short"])).unwrap();
        assert!(!p.user_text.contains(TRUNCATION_NOTICE));
    }

    #[test]
    fn payload_validation() {
        let mut p = build_baseline_prompt(&doc(&["x"])).unwrap();
        p.model_params.temperature = 2.5;
        assert_eq!(p.validate(), Err(PromptError::Temperature(2.5)));
        p.model_params.temperature = 0.0;
        p.mode = PromptMode::Guided;
        assert_eq!(p.validate(), Err(PromptError::EmptySystemPrompt));
    }
}
