use std::collections::BTreeMap;

use thiserror::Error;

use super::ValueMatcher;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("unknown lexicon: {0}")]
    Unknown(String),
    #[error("lexicon {name}: invalid entry '{entry}' (entries must be non-empty lowercase words)")]
    InvalidEntry { name: String, entry: String },
    #[error("lexicon {0} has no entries")]
    Empty(String),
}

/// Named word lists referenced from patterns as `$NAME`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconSet {
    lists: BTreeMap<String, Vec<String>>,
}

impl LexiconSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Causal verbs, causal nouns and the prepositions that follow "result".
    pub fn builtin() -> Self {
        let mut set = Self::new();
        let lists: [(&str, &[&str]); 3] = [
            (
                "CLAUSAL_VERB",
                &[
                    "cause",
                    "stimulate",
                    "make",
                    "derive",
                    "trigger",
                    "result",
                    "lead",
                ],
            ),
            ("CLAUSAL_NOUN", &["cause", "result", "reason"]),
            ("RESULT_PREP", &["in", "to", "from"]),
        ];
        for (name, words) in lists {
            set.insert(name, words.iter().map(|w| w.to_string()).collect())
                .expect("built-in lexicons are valid");
        }
        set
    }

    /// Adds or replaces a list.
    pub fn insert(&mut self, name: &str, entries: Vec<String>) -> Result<(), LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty(name.to_string()));
        }
        for entry in &entries {
            let ok = !entry.is_empty()
                && !entry.chars().any(|c| c.is_whitespace() || c == '$')
                && entry.to_lowercase() == *entry;
            if !ok {
                return Err(LexiconError::InvalidEntry {
                    name: name.to_string(),
                    entry: entry.clone(),
                });
            }
        }
        self.lists.insert(name.to_string(), entries);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.lists.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    fn alternation(&self, name: &str) -> Result<String, LexiconError> {
        let entries = self
            .lists
            .get(name)
            .ok_or_else(|| LexiconError::Unknown(name.to_string()))?;
        let escaped: Vec<String> = entries.iter().map(|e| regex::escape(e)).collect();
        Ok(format!("({})", escaped.join("|")))
    }

    pub(crate) fn expand_value(&self, value: &ValueMatcher) -> Result<ValueMatcher, LexiconError> {
        let text = match value {
            ValueMatcher::Literal(s) | ValueMatcher::Regex(s) => s,
        };
        let refs = macro_refs(text);
        if refs.is_empty() {
            return Ok(value.clone());
        }
        let mut out = String::new();
        let mut last = 0;
        for m in refs {
            let between = &text[last..m.start];
            match value {
                ValueMatcher::Literal(_) => out.push_str(&regex::escape(between)),
                ValueMatcher::Regex(_) => out.push_str(between),
            }
            out.push_str(&self.alternation(&m.name)?);
            last = m.end;
        }
        match value {
            ValueMatcher::Literal(_) => out.push_str(&regex::escape(&text[last..])),
            ValueMatcher::Regex(_) => out.push_str(&text[last..]),
        }
        Ok(ValueMatcher::Regex(out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MacroRef {
    pub start: usize,
    pub end: usize,
    pub name: String,
}

/// Finds `$NAME` references, ignoring backslash-escaped dollars.
pub(crate) fn macro_refs(text: &str) -> Vec<MacroRef> {
    let bytes = text.as_bytes();
    let mut refs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'$' if bytes
                .get(i + 1)
                .is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_') =>
            {
                let start = i;
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                refs.push(MacroRef {
                    start,
                    end: i,
                    name: text[start + 1..i].to_string(),
                });
            }
            _ => i += 1,
        }
    }
    refs
}
