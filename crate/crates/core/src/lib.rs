//! Extraction of explicit cause-effect relations from dependency-parsed
//! short texts.
//!
//! The crate is organised bottom-up:
//!
//! * [`depgraph`]: sentence graphs and the CoNLL-U reader/writer.
//! * [`pattern`]: the rule pattern language (parser, printer, lexicons).
//! * [`matcher`]: pattern matching over graphs, plus an exhaustive oracle.
//! * [`rules`]: built-in causal rules, rule files and triple extraction.
//! * [`pipeline`]: corpus filtering, batch extraction and frequency tables.
//! * [`eval`]: strict and relaxed accuracy against human annotations.

pub mod depgraph;
pub mod eval;
pub mod matcher;
pub mod pattern;
pub mod pipeline;
pub mod rules;

pub use depgraph::{parse_conllu, DependencyEdge, DependencyGraph, Token};
pub use matcher::{find_matches, Match, Matcher};
pub use pattern::{expand_lexicons, parse_pattern, LexiconSet, PatternAst};
pub use rules::{apply_rules, builtin_ruleset, load_rules, CausalTriple, RuleSet};
