//! Causal rules: the built-in rule set, the rule file format, and triple
//! extraction.
//!
//! Rule files are line oriented:
//!
//! ```text
//! # comment
//! lexicon CLAUSAL_VERB = cause, trigger
//! rule 7 "my rule"
//! pattern {lemma:/$CLAUSAL_VERB/}=trigger >/nsubj/ {}=cause >/dobj|obj/ {}=effect
//! invert_on /nmod:from/
//! end
//! ```
//!
//! Lexicon lines override built-in lists of the same name and apply to every
//! rule in the file.

mod extract;

pub use extract::{apply_rules, dedup_triples, CausalTriple, DedupedTriple, TripleRecord};

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use thiserror::Error;

use crate::depgraph::LabelPattern;
use crate::matcher::{MatchError, Matcher};
use crate::pattern::{expand_lexicons, parse_pattern, LexiconSet, PatternAst};

const BUILTIN_RULES: &str = include_str!("builtin.rules");

pub const REQUIRED_CAPTURES: [&str; 3] = ["trigger", "cause", "effect"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {rule}: {message}")]
    Rule {
        rule: u32,
        line: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone)]
pub struct CausalRule {
    pub id: u32,
    pub name: String,
    /// Lexicon-expanded pattern.
    pub pattern: PatternAst,
    /// When the trigger-to-effect edge label matches, cause and effect swap.
    pub invert_on: Option<LabelPattern>,
    matcher: Matcher,
}

impl CausalRule {
    pub fn new(
        id: u32,
        name: &str,
        pattern: PatternAst,
        invert_on: Option<LabelPattern>,
    ) -> Result<Self, RuleError> {
        let rule_err = |message: String| RuleError::Rule {
            rule: id,
            line: 0,
            message,
        };
        let captures = pattern.captures();
        if let Some(missing) = REQUIRED_CAPTURES.iter().find(|c| !captures.contains(c)) {
            return Err(rule_err(format!("missing capture '{missing}'")));
        }
        let matcher = Matcher::new(&pattern).map_err(|e: MatchError| rule_err(e.to_string()))?;
        Ok(CausalRule {
            id,
            name: name.to_string(),
            pattern,
            invert_on,
            matcher,
        })
    }

    pub fn matcher(&self) -> &Matcher {
        &self.matcher
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<CausalRule>,
    lexicons: LexiconSet,
}

impl RuleSet {
    pub fn new(rules: Vec<CausalRule>, lexicons: LexiconSet) -> Result<Self, RuleError> {
        let mut seen = HashSet::new();
        for rule in &rules {
            if !seen.insert(rule.id) {
                return Err(RuleError::Rule {
                    rule: rule.id,
                    line: 0,
                    message: "duplicate rule id".to_string(),
                });
            }
        }
        Ok(RuleSet { rules, lexicons })
    }

    pub fn rules(&self) -> &[CausalRule] {
        &self.rules
    }

    pub fn get(&self, id: u32) -> Option<&CausalRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.rules.iter().map(|r| r.id).collect()
    }

    pub fn lexicons(&self) -> &LexiconSet {
        &self.lexicons
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// The six built-in rules.
pub fn builtin_ruleset() -> RuleSet {
    load_rules(BUILTIN_RULES.as_bytes()).expect("built-in rule file is valid")
}

/// Source text of the built-in rule file.
pub fn builtin_rules_source() -> &'static str {
    BUILTIN_RULES
}

struct PendingRule {
    id: u32,
    name: String,
    line: usize,
    pattern: Option<(usize, PatternAst)>,
    invert_on: Option<LabelPattern>,
}

fn parse_rule_header(rest: &str, line: usize) -> Result<(u32, String), RuleError> {
    let syntax = |message: String| RuleError::Syntax { line, message };
    let rest = rest.trim();
    let (id, name) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    let id: u32 = id
        .parse()
        .map_err(|_| syntax(format!("invalid rule id '{id}'")))?;
    let name = name.trim();
    let name = match name.strip_prefix('"').and_then(|n| n.strip_suffix('"')) {
        Some(n) => n.to_string(),
        None if name.is_empty() => String::new(),
        None => return Err(syntax(format!("rule name must be quoted: {name}"))),
    };
    Ok((id, name))
}

/// Reads a rule file. Patterns are expanded against the built-in lexicons
/// overlaid with any `lexicon` lines from the file.
pub fn load_rules<R: BufRead>(input: R) -> Result<RuleSet, RuleError> {
    let mut lexicons = LexiconSet::builtin();
    let mut pending: Vec<PendingRule> = Vec::new();
    let mut current: Option<PendingRule> = None;
    let mut overrides: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| RuleError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (keyword, rest) = trimmed
            .split_once(char::is_whitespace)
            .unwrap_or((trimmed, ""));
        let syntax = |message: String| RuleError::Syntax {
            line: line_no,
            message,
        };

        match (&mut current, keyword) {
            (None, "lexicon") => {
                let (name, words) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax("expected `lexicon NAME = w1, w2, ...`".into()))?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(syntax(format!("invalid lexicon name '{name}'")));
                }
                let entries: Vec<String> = words
                    .split(',')
                    .map(|w| w.trim().to_string())
                    .filter(|w| !w.is_empty())
                    .collect();
                let mut probe = LexiconSet::new();
                probe
                    .insert(name, entries.clone())
                    .map_err(|e| syntax(e.to_string()))?;
                overrides.insert(name.to_string(), entries);
            }
            (None, "rule") => {
                let (id, name) = parse_rule_header(rest, line_no)?;
                current = Some(PendingRule {
                    id,
                    name,
                    line: line_no,
                    pattern: None,
                    invert_on: None,
                });
            }
            (None, other) => {
                return Err(syntax(format!("unexpected '{other}' outside a rule block")))
            }
            (Some(rule), "pattern") => {
                let ast = parse_pattern(rest).map_err(|e| RuleError::Rule {
                    rule: rule.id,
                    line: line_no,
                    message: e.to_string(),
                })?;
                rule.pattern = Some((line_no, ast));
            }
            (Some(rule), "invert_on") => {
                let src = rest.trim();
                let src = src
                    .strip_prefix('/')
                    .and_then(|s| s.strip_suffix('/'))
                    .unwrap_or(src);
                let label = LabelPattern::new(src).map_err(|e| RuleError::Rule {
                    rule: rule.id,
                    line: line_no,
                    message: format!("invalid invert_on regex: {e}"),
                })?;
                rule.invert_on = Some(label);
            }
            (Some(_), "end") => pending.push(current.take().expect("inside a block")),
            (Some(rule), other) => {
                return Err(RuleError::Rule {
                    rule: rule.id,
                    line: line_no,
                    message: format!("unexpected '{other}' inside rule block"),
                })
            }
        }
    }
    if let Some(rule) = current {
        return Err(RuleError::Rule {
            rule: rule.id,
            line: rule.line,
            message: "missing 'end'".to_string(),
        });
    }

    for (name, entries) in overrides {
        lexicons
            .insert(&name, entries)
            .expect("entries validated when read");
    }

    let mut seen = HashSet::new();
    let mut rules = Vec::with_capacity(pending.len());
    for p in pending {
        let rule_err = |line: usize, message: String| RuleError::Rule {
            rule: p.id,
            line,
            message,
        };
        if !seen.insert(p.id) {
            return Err(rule_err(p.line, "duplicate rule id".to_string()));
        }
        let (pattern_line, ast) = p
            .pattern
            .ok_or_else(|| rule_err(p.line, "missing pattern".to_string()))?;
        let captures = ast.captures();
        if let Some(missing) = REQUIRED_CAPTURES.iter().find(|c| !captures.contains(c)) {
            return Err(rule_err(
                pattern_line,
                format!("missing capture '{missing}'"),
            ));
        }
        let expanded =
            expand_lexicons(&ast, &lexicons).map_err(|e| rule_err(pattern_line, e.to_string()))?;
        let rule = CausalRule::new(p.id, &p.name, expanded, p.invert_on).map_err(|e| match e {
            RuleError::Rule { rule, message, .. } => RuleError::Rule {
                rule,
                line: pattern_line,
                message,
            },
            other => other,
        })?;
        rules.push(rule);
    }
    RuleSet::new(rules, lexicons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{Attr, ValueMatcher};

    #[test]
    fn builtin_has_six_rules() {
        let rules = builtin_ruleset();
        assert_eq!(rules.len(), 6);
        assert_eq!(rules.ids(), [1, 2, 3, 4, 5, 6]);
        assert!(rules.rules().iter().all(|r| !r.pattern.has_macros()));
        assert!(rules.get(6).unwrap().invert_on.is_some());
        assert!(rules
            .rules()
            .iter()
            .filter(|r| r.id != 6)
            .all(|r| r.invert_on.is_none()));
    }

    #[test]
    fn builtin_patterns_are_normalised() {
        let rules = builtin_ruleset();
        assert_eq!(
            rules.get(3).unwrap().pattern.pretty_print(),
            "{lemma:/(cause|stimulate|make|derive|trigger|result|lead)/;pos:VBN}=trigger \
             >/nsubjpass/ {}=effect >/nmod:agent/ {}=cause"
        );
        assert_eq!(
            rules.get(6).unwrap().pattern.relations[1].label,
            Some(ValueMatcher::Regex("nmod:(in|to|from)".into()))
        );
    }

    #[test]
    fn lexicon_override_applies() {
        let src = "lexicon CLAUSAL_VERB = cause\n\
                   rule 1 \"narrow\"\n\
                   pattern {lemma:/$CLAUSAL_VERB/;pos:/VB.*/}=trigger >/nsubj/ {}=cause >/dobj|obj/ {}=effect\n\
                   end\n";
        let rules = load_rules(src.as_bytes()).unwrap();
        let r1 = rules.get(1).unwrap();
        assert_eq!(
            r1.pattern.head.constraints[&Attr::Lemma],
            ValueMatcher::Regex("(cause)".into())
        );
        assert_eq!(rules.lexicons().get("CLAUSAL_NOUN").unwrap().len(), 3);
    }

    #[test]
    fn empty_file_is_empty_ruleset() {
        let rules = load_rules("".as_bytes()).unwrap();
        assert!(rules.is_empty());
    }

    #[test]
    fn missing_effect_capture() {
        let src =
            "rule 7 \"broken\"\npattern {lemma:cause}=trigger >/nsubj/ {}=cause >/dobj/ {}\nend\n";
        let err = load_rules(src.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "rule 7: missing capture 'effect'");
    }

    #[test]
    fn duplicate_ids_and_dsl_errors_carry_rule_context() {
        let pat = "pattern {}=trigger > {}=cause > {}=effect";
        let dup = format!("rule 1 \"a\"\n{pat}\nend\nrule 1 \"b\"\n{pat}\nend\n");
        assert_eq!(
            load_rules(dup.as_bytes()).unwrap_err().to_string(),
            "rule 1: duplicate rule id"
        );
        let bad = "rule 2 \"x\"\npattern {lemma:cause\nend\n";
        assert_eq!(
            load_rules(bad.as_bytes()).unwrap_err().to_string(),
            "rule 2: unbalanced '{' at offset 0"
        );
        let unknown = "rule 3 \"x\"\npattern {lemma:/$NOPE/}=trigger > {}=cause > {}=effect\nend\n";
        assert_eq!(
            load_rules(unknown.as_bytes()).unwrap_err().to_string(),
            "rule 3: unknown lexicon: NOPE"
        );
    }

    #[test]
    fn unterminated_block() {
        let src = "rule 4 \"x\"\npattern {}=trigger > {}=cause > {}=effect\n";
        assert_eq!(
            load_rules(src.as_bytes()).unwrap_err().to_string(),
            "rule 4: missing 'end'"
        );
    }
}
