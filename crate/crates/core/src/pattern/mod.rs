//! The pattern language used to write dependency rules.
//!
//! ```text
//! Pattern  := Node Rel*
//! Node     := '{' AttrList? '}' ('=' Ident)?  |  '(' Pattern ')'
//! AttrList := Attr (';' Attr)*
//! Attr     := ('form'|'lemma'|'pos') ':' ( '/' regex '/' | Literal )
//! Rel      := ('>' | '<') LabelSpec? Node
//! LabelSpec:= '/' regex '/' | BareLabel
//! ```
//!
//! `A >r B` means A governs B through an edge labeled `r`; `A <r B` means A
//! is a dependent of B. Every relation in a chain constrains the chain's head
//! node, so `A >r B >s C` requires A to govern both B and C. Parentheses
//! attach relations to an inner node: `A >r (B >s C)`.
//!
//! `$NAME` inside a regex, literal or bare label refers to a lexicon and is
//! replaced by [`expand_lexicons`].

mod lexicon;
mod parser;

pub use lexicon::{LexiconError, LexiconSet};
pub use parser::{parse_pattern, PatternError};

use std::collections::BTreeMap;
use std::fmt;

/// Token attribute a node may constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attr {
    Form,
    Lemma,
    Pos,
}

impl Attr {
    pub fn name(self) -> &'static str {
        match self {
            Attr::Form => "form",
            Attr::Lemma => "lemma",
            Attr::Pos => "pos",
        }
    }

    pub fn from_name(name: &str) -> Option<Attr> {
        match name {
            "form" => Some(Attr::Form),
            "lemma" => Some(Attr::Lemma),
            "pos" => Some(Attr::Pos),
            _ => None,
        }
    }

    /// Form and lemma compare case-insensitively; POS tags do not.
    pub fn case_insensitive(self) -> bool {
        !matches!(self, Attr::Pos)
    }
}

/// An attribute value or edge label matcher. Both variants match the whole
/// string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueMatcher {
    Literal(String),
    Regex(String),
}

impl ValueMatcher {
    /// Regex source equivalent to this matcher, before anchoring.
    pub fn regex_source(&self) -> String {
        match self {
            ValueMatcher::Literal(s) => regex::escape(s),
            ValueMatcher::Regex(s) => s.clone(),
        }
    }

    fn text(&self) -> &str {
        match self {
            ValueMatcher::Literal(s) | ValueMatcher::Regex(s) => s,
        }
    }
}

impl fmt::Display for ValueMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueMatcher::Literal(s) => f.write_str(s),
            ValueMatcher::Regex(s) => write!(f, "/{}/", s.replace('/', "\\/")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodePattern {
    pub constraints: BTreeMap<Attr, ValueMatcher>,
    pub capture: Option<String>,
}

impl NodePattern {
    pub fn any() -> Self {
        NodePattern::default()
    }

    pub fn captured(mut self, name: &str) -> Self {
        self.capture = Some(name.to_string());
        self
    }

    pub fn with(mut self, attr: Attr, value: ValueMatcher) -> Self {
        self.constraints.insert(attr, value);
        self
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (attr, value)) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}:{}", attr.name(), value)?;
        }
        f.write_str("}")?;
        if let Some(name) = &self.capture {
            write!(f, "={name}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `>`: the pattern head governs the child.
    Governs,
    /// `<`: the pattern head is a dependent of the child.
    GovernedBy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationConstraint {
    pub direction: Direction,
    /// `None` accepts any label.
    pub label: Option<ValueMatcher>,
    pub child: PatternAst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAst {
    pub head: NodePattern,
    pub relations: Vec<RelationConstraint>,
}

impl PatternAst {
    pub fn node(head: NodePattern) -> Self {
        PatternAst {
            head,
            relations: Vec::new(),
        }
    }

    pub fn relate(
        mut self,
        direction: Direction,
        label: Option<ValueMatcher>,
        child: PatternAst,
    ) -> Self {
        self.relations.push(RelationConstraint {
            direction,
            label,
            child,
        });
        self
    }

    /// Capture names in pre-order.
    pub fn captures(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_nodes(&mut |node| {
            if let Some(c) = &node.capture {
                out.push(c.as_str());
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit_nodes(&mut |_| n += 1);
        n
    }

    fn visit_nodes<'a>(&'a self, f: &mut impl FnMut(&'a NodePattern)) {
        f(&self.head);
        for rel in &self.relations {
            rel.child.visit_nodes(f);
        }
    }

    /// Names of every `$NAME` reference still present.
    pub fn macro_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.collect_macros(&mut names);
        names
    }

    fn collect_macros(&self, names: &mut Vec<String>) {
        for value in self.head.constraints.values() {
            names.extend(
                lexicon::macro_refs(value.text())
                    .into_iter()
                    .map(|m| m.name),
            );
        }
        for rel in &self.relations {
            if let Some(label) = &rel.label {
                names.extend(
                    lexicon::macro_refs(label.text())
                        .into_iter()
                        .map(|m| m.name),
                );
            }
            rel.child.collect_macros(names);
        }
    }

    pub fn has_macros(&self) -> bool {
        !self.macro_names().is_empty()
    }

    /// Canonical single-line rendering; parses back to an equal AST.
    pub fn pretty_print(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PatternAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for rel in &self.relations {
            let op = match rel.direction {
                Direction::Governs => '>',
                Direction::GovernedBy => '<',
            };
            write!(f, " {op}")?;
            if let Some(label) = &rel.label {
                write!(f, "{label}")?;
            }
            if rel.child.relations.is_empty() {
                write!(f, " {}", rel.child)?;
            } else {
                write!(f, " ({})", rel.child)?;
            }
        }
        Ok(())
    }
}

pub fn pretty_print(ast: &PatternAst) -> String {
    ast.pretty_print()
}

/// Replaces every `$NAME` with an alternation of the lexicon's entries.
pub fn expand_lexicons(ast: &PatternAst, lex: &LexiconSet) -> Result<PatternAst, LexiconError> {
    let mut head = ast.head.clone();
    for value in head.constraints.values_mut() {
        *value = lex.expand_value(value)?;
    }
    let relations = ast
        .relations
        .iter()
        .map(|rel| {
            Ok(RelationConstraint {
                direction: rel.direction,
                label: rel
                    .label
                    .as_ref()
                    .map(|l| lex.expand_value(l))
                    .transpose()?,
                child: expand_lexicons(&rel.child, lex)?,
            })
        })
        .collect::<Result<Vec<_>, LexiconError>>()?;
    Ok(PatternAst { head, relations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_pattern_prints_itself() {
        let ast = parse_pattern("{}=x").unwrap();
        assert_eq!(ast, PatternAst::node(NodePattern::any().captured("x")));
        assert_eq!(ast.pretty_print(), "{}=x");
    }

    #[test]
    fn whitespace_is_normalised() {
        let ast = parse_pattern("{ lemma : cause }").unwrap();
        assert_eq!(ast.pretty_print(), "{lemma:cause}");
    }

    #[test]
    fn rule_one_shape() {
        let ast = parse_pattern(
            "{lemma:/$CLAUSAL_VERB/;pos:/VB.*/}=trigger >/nsubj/ {}=cause >/dobj|obj/ {}=effect",
        )
        .unwrap();
        assert_eq!(ast.head.constraints.len(), 2);
        assert_eq!(ast.head.capture.as_deref(), Some("trigger"));
        assert_eq!(ast.relations.len(), 2);
        assert!(ast
            .relations
            .iter()
            .all(|r| r.direction == Direction::Governs));
        assert_eq!(ast.captures(), ["trigger", "cause", "effect"]);
        assert_eq!(ast.macro_names(), ["CLAUSAL_VERB"]);
    }

    #[test]
    fn expands_clausal_noun() {
        let ast = parse_pattern("{lemma:/$CLAUSAL_NOUN/}").unwrap();
        let out = expand_lexicons(&ast, &LexiconSet::builtin()).unwrap();
        assert_eq!(
            out.head.constraints[&Attr::Lemma],
            ValueMatcher::Regex("(cause|result|reason)".into())
        );
        assert!(!out.has_macros());
    }

    #[test]
    fn expansion_without_macros_is_identity() {
        let ast = parse_pattern("{lemma:cause;pos:/VB.*/}=t >nsubj {}=c").unwrap();
        assert_eq!(expand_lexicons(&ast, &LexiconSet::builtin()).unwrap(), ast);
    }

    #[test]
    fn unknown_lexicon_is_reported() {
        let ast = parse_pattern("{lemma:/$UNKNOWN/}").unwrap();
        let err = expand_lexicons(&ast, &LexiconSet::builtin()).unwrap_err();
        assert_eq!(err.to_string(), "unknown lexicon: UNKNOWN");
    }

    #[test]
    fn passive_rule_canonical_form() {
        let ast = parse_pattern(
            "{lemma:/$CLAUSAL_VERB/;pos:VBN}=trigger >/nsubjpass/ {}=effect >/nmod:agent/ {}=cause",
        )
        .unwrap();
        let out = expand_lexicons(&ast, &LexiconSet::builtin()).unwrap();
        assert_eq!(
            out.pretty_print(),
            "{lemma:/(cause|stimulate|make|derive|trigger|result|lead)/;pos:VBN}=trigger \
             >/nsubjpass/ {}=effect >/nmod:agent/ {}=cause"
        );
    }

    #[test]
    fn literal_macro_becomes_regex() {
        let ast = parse_pattern("{}=t >nmod:$RESULT_PREP {}=e").unwrap();
        let out = expand_lexicons(&ast, &LexiconSet::builtin()).unwrap();
        assert_eq!(
            out.relations[0].label,
            Some(ValueMatcher::Regex("nmod:(in|to|from)".into()))
        );
    }

    #[test]
    fn nested_children_print_with_parentheses() {
        let src = "{}=a >x ({}=b <y {}=c) >z {}=d";
        let ast = parse_pattern(src).unwrap();
        assert_eq!(ast.pretty_print(), src);
        assert_eq!(ast.node_count(), 4);
    }

    #[test]
    fn slashes_in_regex_survive_printing() {
        let ast = parse_pattern(r"{form:/a\/b/}").unwrap();
        assert_eq!(
            ast.head.constraints[&Attr::Form],
            ValueMatcher::Regex("a/b".into())
        );
        assert_eq!(parse_pattern(&ast.pretty_print()).unwrap(), ast);
    }
}
