//! Grammar for in-paper anchors: "Table N", "Figure N", "Section N(.N)*" and
//! "Appendix L", matched case-insensitively.

use std::sync::LazyLock;

use regex::Regex;

static LABEL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:table[ \t]+\d+|figure[ \t]+\d+|section[ \t]+\d+(?:\.\d+)*|appendix[ \t]+[a-z])\b")
        .expect("label regex")
});

static LEADING_LABEL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^[\s*_]*(table[ \t]+\d+|figure[ \t]+\d+|section[ \t]+\d+(?:\.\d+)*|appendix[ \t]+[a-z])\b",
    )
    .expect("leading label regex")
});

/// A label occurrence as a byte range into the scanned text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelMatch<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

pub fn find_labels(text: &str) -> impl Iterator<Item = LabelMatch<'_>> {
    LABEL.find_iter(text).map(|m| LabelMatch {
        text: m.as_str(),
        start: m.start(),
        end: m.end(),
    })
}

/// Returns the label at the start of `text` (after optional emphasis markers)
/// and the byte offset just past it.
pub fn leading_label(text: &str) -> Option<(&str, usize)> {
    let caps = LEADING_LABEL.captures(text)?;
    let m = caps.get(1)?;
    Some((m.as_str(), m.end()))
}

/// True if the whole of `text` is exactly one label.
pub fn is_label(text: &str) -> bool {
    matches!(leading_label(text), Some((l, end)) if l.len() == text.len() && end == text.len())
}

/// Key used to treat "Table 2" and "table  2" as the same anchor.
pub fn label_key(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(text: &str) -> Vec<&str> {
        find_labels(text).map(|m| m.text).collect()
    }

    #[test]
    fn matches_each_label_kind() {
        assert_eq!(
            labels("see Table 2, figure 10 and Section 3.2.1 or Appendix A."),
            vec!["Table 2", "figure 10", "Section 3.2.1", "Appendix A"]
        );
    }

    #[test]
    fn rejects_embedded_or_partial_forms() {
        assert!(labels("Subsection 3 and Tables 2 and Table2").is_empty());
        assert!(labels("Appendix AB").is_empty());
        assert!(labels("Table 2a").is_empty());
        assert_eq!(labels("Section 3."), vec!["Section 3"]);
    }

    #[test]
    fn does_not_span_lines() {
        assert!(labels("Table\n2").is_empty());
    }

    #[test]
    fn leading_label_skips_emphasis() {
        assert_eq!(leading_label("*Table 2*: costs"), Some(("Table 2", 8)));
        assert_eq!(leading_label("**Figure 1** - x").map(|l| l.0), Some("Figure 1"));
        assert_eq!(leading_label("See Table 2"), None);
        assert!(is_label("Appendix B"));
        assert!(!is_label("Appendix B extra"));
    }
}
