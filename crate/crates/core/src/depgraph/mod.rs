//! Dependency graph model.
//!
//! A [`DependencyGraph`] holds one sentence: its tokens, the basic dependency
//! tree and the enhanced dependency graph. Pattern matching always runs over
//! the enhanced edges; the basic tree is kept for validation and for
//! projecting phrase spans.

mod conllu;

pub use conllu::{parse_conllu, parse_conllu_with_warnings, write_conllu, ConlluWarning};

use std::collections::BTreeSet;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: expected 10 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("sentence {sent_id}: {message}")]
    Invalid { sent_id: String, message: String },
    #[error("sentence {sent_id}: token index {index} out of range 1..={len}")]
    IndexOutOfRange {
        sent_id: String,
        index: usize,
        len: usize,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A single word or punctuation token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub misc: String,
}

impl Token {
    pub fn new(index: usize, form: &str, lemma: &str, upos: &str, xpos: &str) -> Self {
        let lemma = if lemma.is_empty() || lemma == "_" {
            form.to_lowercase()
        } else {
            lemma.to_string()
        };
        Token {
            index,
            form: form.to_string(),
            lemma,
            upos: upos.to_string(),
            xpos: xpos.to_string(),
            misc: String::new(),
        }
    }
}

/// A labeled edge from a governor to a dependent. Governor `0` is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub governor: usize,
    pub dependent: usize,
    pub label: String,
}

impl DependencyEdge {
    pub fn new(governor: usize, dependent: usize, label: &str) -> Self {
        DependencyEdge {
            governor,
            dependent,
            label: label.to_string(),
        }
    }

    pub fn is_root(&self) -> bool {
        self.governor == 0
    }
}

/// The governor side of an edge: either the artificial root or a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Governor<'a> {
    Root,
    Token(&'a Token),
}

impl<'a> Governor<'a> {
    pub fn token(self) -> Option<&'a Token> {
        match self {
            Governor::Root => None,
            Governor::Token(t) => Some(t),
        }
    }
}

/// Regex that must match an edge label in its entirety.
///
/// `nsubj` does not match `nsubjpass`.
#[derive(Debug, Clone)]
pub struct LabelPattern {
    source: String,
    regex: Regex,
}

impl LabelPattern {
    pub fn new(source: &str) -> Result<Self, regex::Error> {
        let regex = Regex::new(&format!("^(?:{source})$"))?;
        Ok(LabelPattern {
            source: source.to_string(),
            regex,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn is_match(&self, label: &str) -> bool {
        self.regex.is_match(label)
    }
}

impl PartialEq for LabelPattern {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for LabelPattern {}

impl fmt::Display for LabelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/{}/", self.source)
    }
}

/// One parsed sentence. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    sent_id: String,
    text: String,
    tokens: Vec<Token>,
    basic: Vec<DependencyEdge>,
    enhanced: Vec<DependencyEdge>,
    // Indices into `enhanced`, sorted by (dependent, label) and (governor, label).
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl PartialEq for DependencyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.sent_id == other.sent_id
            && self.text == other.text
            && self.tokens == other.tokens
            && self.basic == other.basic
            && self.enhanced == other.enhanced
    }
}

impl Eq for DependencyGraph {}

impl DependencyGraph {
    /// Builds and validates a graph.
    ///
    /// `basic` must be a tree over the tokens (one governor per token, a
    /// single root, no cycles). When `enhanced` is `None` the basic edges are
    /// used as the enhanced graph. Duplicate enhanced edges are collapsed.
    pub fn new(
        sent_id: impl Into<String>,
        text: impl Into<String>,
        tokens: Vec<Token>,
        basic: Vec<DependencyEdge>,
        enhanced: Option<Vec<DependencyEdge>>,
    ) -> Result<Self, GraphError> {
        let sent_id = sent_id.into();
        let invalid = |message: String| GraphError::Invalid {
            sent_id: sent_id.clone(),
            message,
        };
        let n = tokens.len();
        for (i, tok) in tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(invalid(format!(
                    "token indices must be contiguous from 1, found {} at position {}",
                    tok.index,
                    i + 1
                )));
            }
            if !tok.form.is_empty() && tok.lemma.is_empty() {
                return Err(invalid(format!("token {} has an empty lemma", tok.index)));
            }
        }

        let check_edge = |e: &DependencyEdge| -> Result<(), GraphError> {
            let bad = if e.dependent == 0 || e.dependent > n {
                Some(e.dependent)
            } else if e.governor > n {
                Some(e.governor)
            } else {
                None
            };
            if let Some(index) = bad {
                return Err(GraphError::IndexOutOfRange {
                    sent_id: sent_id.clone(),
                    index,
                    len: n,
                });
            }
            if e.governor == e.dependent {
                return Err(invalid(format!("token {} governs itself", e.dependent)));
            }
            if e.label.is_empty() {
                return Err(invalid(format!(
                    "edge {} -> {} has an empty label",
                    e.governor, e.dependent
                )));
            }
            Ok(())
        };

        let mut basic = basic;
        for e in &basic {
            check_edge(e)?;
        }
        basic.sort_by_key(|e| e.dependent);
        if basic.len() != n || basic.iter().enumerate().any(|(i, e)| e.dependent != i + 1) {
            return Err(invalid(
                "basic edges must give every token exactly one governor".to_string(),
            ));
        }
        let roots = basic.iter().filter(|e| e.is_root()).count();
        if n > 0 && roots != 1 {
            return Err(invalid(format!(
                "basic tree must have exactly one root, found {roots}"
            )));
        }
        // Every walk towards the root must terminate within n steps.
        for start in 1..=n {
            let mut current = start;
            let mut steps = 0;
            while current != 0 {
                current = basic[current - 1].governor;
                steps += 1;
                if steps > n {
                    return Err(invalid(format!(
                        "cycle in basic tree through token {start}"
                    )));
                }
            }
        }

        let enhanced = match enhanced {
            None => basic.clone(),
            Some(edges) => {
                for e in &edges {
                    check_edge(e)?;
                }
                let set: BTreeSet<DependencyEdge> = edges.into_iter().collect();
                let mut edges: Vec<DependencyEdge> = set.into_iter().collect();
                edges.sort_by(|a, b| {
                    (a.dependent, a.governor, &a.label).cmp(&(b.dependent, b.governor, &b.label))
                });
                edges
            }
        };
        let mut covered = vec![false; n + 1];
        for e in &enhanced {
            covered[e.dependent] = true;
        }
        if let Some(missing) = (1..=n).find(|&i| !covered[i]) {
            return Err(invalid(format!(
                "token {missing} has no governor in the enhanced graph"
            )));
        }

        let mut outgoing = vec![Vec::new(); n + 1];
        let mut incoming = vec![Vec::new(); n + 1];
        for (i, e) in enhanced.iter().enumerate() {
            outgoing[e.governor].push(i);
            incoming[e.dependent].push(i);
        }
        for list in &mut outgoing {
            list.sort_by(|&a, &b| {
                (enhanced[a].dependent, &enhanced[a].label)
                    .cmp(&(enhanced[b].dependent, &enhanced[b].label))
            });
        }
        for list in &mut incoming {
            list.sort_by(|&a, &b| {
                (enhanced[a].governor, &enhanced[a].label)
                    .cmp(&(enhanced[b].governor, &enhanced[b].label))
            });
        }

        let text = text.into();
        let text = if text.is_empty() {
            tokens
                .iter()
                .map(|t| t.form.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            text
        };

        Ok(DependencyGraph {
            sent_id,
            text,
            tokens,
            basic,
            enhanced,
            outgoing,
            incoming,
        })
    }

    pub fn sent_id(&self) -> &str {
        &self.sent_id
    }

    /// Document part of a `<docId>:<ordinal>` sentence id.
    pub fn doc_id(&self) -> &str {
        match self.sent_id.rsplit_once(':') {
            Some((doc, ord)) if ord.parse::<usize>().is_ok() => doc,
            _ => &self.sent_id,
        }
    }

    /// Sentence ordinal from a `<docId>:<ordinal>` sentence id, 0 when absent.
    pub fn ordinal(&self) -> usize {
        self.sent_id
            .rsplit_once(':')
            .and_then(|(_, ord)| ord.parse().ok())
            .unwrap_or(0)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn basic_edges(&self) -> &[DependencyEdge] {
        &self.basic
    }

    pub fn enhanced_edges(&self) -> &[DependencyEdge] {
        &self.enhanced
    }

    /// Governor of `dependent` in the basic tree.
    pub fn basic_head(&self, dependent: usize) -> Option<&DependencyEdge> {
        dependent.checked_sub(1).and_then(|i| self.basic.get(i))
    }

    fn check_index(&self, index: usize) -> Result<(), GraphError> {
        if index == 0 || index > self.tokens.len() {
            return Err(GraphError::IndexOutOfRange {
                sent_id: self.sent_id.clone(),
                index,
                len: self.tokens.len(),
            });
        }
        Ok(())
    }

    /// Enhanced edges leaving `governor`, ordered by dependent index then label.
    pub fn dependents(
        &self,
        governor: usize,
        label: Option<&LabelPattern>,
    ) -> Result<Vec<(&DependencyEdge, &Token)>, GraphError> {
        self.check_index(governor)?;
        Ok(self.outgoing[governor]
            .iter()
            .map(|&i| &self.enhanced[i])
            .filter(|e| label.is_none_or(|p| p.is_match(&e.label)))
            .map(|e| (e, &self.tokens[e.dependent - 1]))
            .collect())
    }

    /// Enhanced edges entering `dependent`, ordered by governor index then label.
    pub fn governors(
        &self,
        dependent: usize,
        label: Option<&LabelPattern>,
    ) -> Result<Vec<(&DependencyEdge, Governor<'_>)>, GraphError> {
        self.check_index(dependent)?;
        Ok(self.incoming[dependent]
            .iter()
            .map(|&i| &self.enhanced[i])
            .filter(|e| label.is_none_or(|p| p.is_match(&e.label)))
            .map(|e| {
                let gov = match e.governor {
                    0 => Governor::Root,
                    g => Governor::Token(&self.tokens[g - 1]),
                };
                (e, gov)
            })
            .collect())
    }

    /// Basic-tree children of `governor` in token order.
    pub fn basic_children(&self, governor: usize) -> impl Iterator<Item = &DependencyEdge> {
        self.basic.iter().filter(move |e| e.governor == governor)
    }
}
