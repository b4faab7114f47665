use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Categorical marker flagging a bullet as innovative, limiting or evidential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "SignalWire", try_from = "SignalWire")]
pub enum PrioritySignal {
    Innovation,
    Limitation,
    HighImpactEvidence,
}

impl PrioritySignal {
    pub const ALL: [PrioritySignal; 3] = [
        PrioritySignal::Innovation,
        PrioritySignal::Limitation,
        PrioritySignal::HighImpactEvidence,
    ];

    pub const fn token(self) -> &'static str {
        match self {
            PrioritySignal::Innovation => "[INNOVATION]",
            PrioritySignal::Limitation => "[LIMITATION]",
            PrioritySignal::HighImpactEvidence => "[EVIDENCE]",
        }
    }

    pub const fn kind_name(self) -> &'static str {
        match self {
            PrioritySignal::Innovation => "innovation",
            PrioritySignal::Limitation => "limitation",
            PrioritySignal::HighImpactEvidence => "high_impact_evidence",
        }
    }

    /// Exact canonical token lookup, case-insensitive inside the brackets.
    pub fn from_token(token: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.token().eq_ignore_ascii_case(token.trim()))
    }
}

impl fmt::Display for PrioritySignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Serialize, Deserialize)]
struct SignalWire {
    kind: String,
    token: String,
}

impl From<PrioritySignal> for SignalWire {
    fn from(s: PrioritySignal) -> Self {
        SignalWire {
            kind: s.kind_name().to_owned(),
            token: s.token().to_owned(),
        }
    }
}

impl TryFrom<SignalWire> for PrioritySignal {
    type Error = String;

    fn try_from(w: SignalWire) -> Result<Self, Self::Error> {
        let by_token = PrioritySignal::from_token(&w.token)
            .ok_or_else(|| format!("unknown signal token {:?}", w.token))?;
        if by_token.kind_name() != w.kind {
            return Err(format!(
                "signal kind {:?} does not match token {:?}",
                w.kind, w.token
            ));
        }
        Ok(by_token)
    }
}

/// Glyph aliases that stand in for the canonical ASCII tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalAliases {
    aliases: BTreeMap<String, PrioritySignal>,
}

/// Variation selector that often trails emoji glyphs (e.g. "⚠️").
const VARIATION_SELECTOR: char = '\u{FE0F}';

impl Default for SignalAliases {
    fn default() -> Self {
        let mut aliases = SignalAliases::empty();
        aliases.insert("💡", PrioritySignal::Innovation);
        aliases.insert("⚠️", PrioritySignal::Limitation);
        aliases.insert("📊", PrioritySignal::HighImpactEvidence);
        aliases
    }
}

impl SignalAliases {
    pub fn empty() -> Self {
        SignalAliases {
            aliases: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, glyph: &str, signal: PrioritySignal) {
        self.aliases.insert(normalize_glyph(glyph), signal);
    }

    pub fn get(&self, glyph: &str) -> Option<PrioritySignal> {
        self.aliases.get(&normalize_glyph(glyph)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, PrioritySignal)> {
        self.aliases.iter().map(|(g, s)| (g.as_str(), *s))
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }
}

fn normalize_glyph(glyph: &str) -> String {
    glyph
        .trim()
        .chars()
        .filter(|c| *c != VARIATION_SELECTOR)
        .collect()
}

/// Resolves a canonical token or a registered glyph alias. Unknown input is a
/// no-match, never an error.
pub fn canonical_signal(token: &str, aliases: &SignalAliases) -> Option<PrioritySignal> {
    PrioritySignal::from_token(token).or_else(|| aliases.get(token))
}

/// Removes every canonical token and alias glyph from `text`, returning the
/// remaining text (whitespace collapsed) and the signals in first-seen order.
pub fn lift_signals(text: &str, aliases: &SignalAliases) -> (String, Vec<PrioritySignal>) {
    let mut signals: Vec<PrioritySignal> = Vec::new();
    let push = |s: PrioritySignal, signals: &mut Vec<PrioritySignal>| {
        if !signals.contains(&s) {
            signals.push(s);
        }
    };

    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    'outer: while let Some(c) = rest.chars().next() {
        if c == '[' {
            if let Some(end) = rest.find(']') {
                if let Some(sig) = PrioritySignal::from_token(&rest[..=end]) {
                    push(sig, &mut signals);
                    out.push(' ');
                    rest = &rest[end + 1..];
                    continue;
                }
            }
        }
        for (glyph, sig) in aliases.iter() {
            if let Some(after) = rest.strip_prefix(glyph) {
                push(sig, &mut signals);
                out.push(' ');
                rest = after.trim_start_matches(VARIATION_SELECTOR);
                continue 'outer;
            }
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    (collapse_whitespace(&out), signals)
}

pub(crate) fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_tokens_map_to_kinds() {
        let aliases = SignalAliases::default();
        assert_eq!(
            canonical_signal("[LIMITATION]", &aliases),
            Some(PrioritySignal::Limitation)
        );
        assert_eq!(canonical_signal("[UNKNOWN]", &aliases), None);
        assert_eq!(canonical_signal("", &aliases), None);
    }

    #[test]
    fn bijection_over_all_kinds() {
        let aliases = SignalAliases::empty();
        for kind in PrioritySignal::ALL {
            assert_eq!(canonical_signal(kind.token(), &aliases), Some(kind));
        }
        let mut tokens: Vec<_> = PrioritySignal::ALL.iter().map(|s| s.token()).collect();
        tokens.dedup();
        assert_eq!(tokens.len(), 3);
    }

    #[test]
    fn glyph_aliases_resolve_with_or_without_variation_selector() {
        let aliases = SignalAliases::default();
        assert_eq!(canonical_signal("💡", &aliases), Some(PrioritySignal::Innovation));
        assert_eq!(canonical_signal("⚠️", &aliases), Some(PrioritySignal::Limitation));
        assert_eq!(canonical_signal("⚠", &aliases), Some(PrioritySignal::Limitation));
        assert_eq!(canonical_signal("🚀", &aliases), None);
    }

    #[test]
    fn lifting_removes_tokens_anywhere_and_dedups() {
        let aliases = SignalAliases::default();
        let (text, signals) =
            lift_signals("[INNOVATION]  New idea 💡 with [evidence] and [INNOVATION]", &aliases);
        assert_eq!(text, "New idea with and");
        assert_eq!(
            signals,
            vec![PrioritySignal::Innovation, PrioritySignal::HighImpactEvidence]
        );
    }

    #[test]
    fn lifting_leaves_unknown_brackets() {
        let aliases = SignalAliases::default();
        let (text, signals) = lift_signals("see [1] and [UNKNOWN]", &aliases);
        assert_eq!(text, "see [1] and [UNKNOWN]");
        assert!(signals.is_empty());
    }

    #[test]
    fn wire_encoding_carries_kind_and_token() {
        let json = serde_json::to_string(&PrioritySignal::HighImpactEvidence).unwrap();
        assert_eq!(json, r#"{"kind":"high_impact_evidence","token":"[EVIDENCE]"}"#);
        let back: PrioritySignal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, PrioritySignal::HighImpactEvidence);
        let bad = r#"{"kind":"innovation","token":"[EVIDENCE]"}"#;
        assert!(serde_json::from_str::<PrioritySignal>(bad).is_err());
    }
}
