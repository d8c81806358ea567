//! Enumeration of pattern matches over the enhanced dependency graph.
//!
//! The search anchors on the pattern head: every token satisfying the head's
//! constraints is tried, and the remaining nodes are reached through the
//! graph's adjacency lists, backtracking on failure. Distinct pattern nodes
//! may bind the same token. Matches are deduplicated by their binding map.

mod oracle;

pub use oracle::{brute_force_matches, brute_force_matches_bounded, DEFAULT_ORACLE_BOUND};

use std::collections::{BTreeMap, BTreeSet};

use regex::{Regex, RegexBuilder};
use serde::Serialize;
use thiserror::Error;

use crate::depgraph::{DependencyGraph, LabelPattern, Token};
use crate::pattern::{Attr, Direction, PatternAst, ValueMatcher};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("pattern contains unexpanded lexicon references: {}", .0.join(", "))]
    UnexpandedMacros(Vec<String>),
    #[error("invalid regex '{pattern}': {message}")]
    Regex { pattern: String, message: String },
    #[error("graph {sent_id} has {len} tokens, above the brute-force bound of {bound}")]
    OracleBound {
        sent_id: String,
        len: usize,
        bound: usize,
    },
}

/// One satisfying assignment, reduced to its named captures.
#[derive(Debug, Clone, Eq, Serialize)]
pub struct Match {
    pub bindings: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<u32>,
    pub sent_id: String,
}

impl PartialEq for Match {
    fn eq(&self, other: &Self) -> bool {
        self.sent_id == other.sent_id && self.bindings == other.bindings
    }
}

impl Match {
    pub fn get(&self, capture: &str) -> Option<usize> {
        self.bindings.get(capture).copied()
    }
}

#[derive(Debug, Clone)]
enum ValueTest {
    Literal(String),
    Regex(Regex),
}

impl ValueTest {
    fn compile(attr: Attr, value: &ValueMatcher) -> Result<Self, MatchError> {
        Ok(match value {
            ValueMatcher::Literal(s) if attr.case_insensitive() => {
                ValueTest::Literal(s.to_lowercase())
            }
            ValueMatcher::Literal(s) => ValueTest::Literal(s.clone()),
            ValueMatcher::Regex(s) => {
                let re = RegexBuilder::new(&format!("^(?:{s})$"))
                    .case_insensitive(attr.case_insensitive())
                    .build()
                    .map_err(|e| MatchError::Regex {
                        pattern: s.clone(),
                        message: e.to_string(),
                    })?;
                ValueTest::Regex(re)
            }
        })
    }

    fn test(&self, value: &str, case_insensitive: bool) -> bool {
        match self {
            ValueTest::Literal(lit) if case_insensitive => value.to_lowercase() == *lit,
            ValueTest::Literal(lit) => value == lit,
            ValueTest::Regex(re) => re.is_match(value),
        }
    }
}

/// Compiled attribute constraints of a single pattern node.
#[derive(Debug, Clone)]
pub struct NodeTest {
    tests: Vec<(Attr, ValueTest)>,
}

fn present(value: &str) -> Option<&str> {
    (!value.is_empty() && value != "_").then_some(value)
}

impl NodeTest {
    pub fn new(constraints: &BTreeMap<Attr, ValueMatcher>) -> Result<Self, MatchError> {
        let tests = constraints
            .iter()
            .map(|(&attr, value)| Ok((attr, ValueTest::compile(attr, value)?)))
            .collect::<Result<Vec<_>, MatchError>>()?;
        Ok(NodeTest { tests })
    }

    /// POS constraints accept a token when either its fine (xpos) or coarse
    /// (upos) tag matches, fine tag first.
    pub fn matches(&self, token: &Token) -> bool {
        self.tests.iter().all(|(attr, test)| match attr {
            Attr::Form => test.test(&token.form, true),
            Attr::Lemma => test.test(&token.lemma, true),
            Attr::Pos => [&token.xpos, &token.upos]
                .into_iter()
                .filter_map(|tag| present(tag))
                .any(|tag| test.test(tag, false)),
        })
    }
}

pub(crate) fn compile_label(label: &ValueMatcher) -> Result<LabelPattern, MatchError> {
    let source = label.regex_source();
    LabelPattern::new(&source).map_err(|e| MatchError::Regex {
        pattern: source,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone)]
pub(crate) struct FlatNode {
    pub test: NodeTest,
    pub capture: Option<String>,
    /// Parent node index, direction as written on the parent, edge label.
    pub link: Option<(usize, Direction, Option<LabelPattern>)>,
}

/// Pattern tree flattened in pre-order so every parent precedes its children.
pub(crate) fn flatten(ast: &PatternAst) -> Result<Vec<FlatNode>, MatchError> {
    let macros = ast.macro_names();
    if !macros.is_empty() {
        return Err(MatchError::UnexpandedMacros(macros));
    }
    let mut nodes = Vec::with_capacity(ast.node_count());
    push_flat(ast, None, &mut nodes)?;
    Ok(nodes)
}

fn push_flat(
    ast: &PatternAst,
    link: Option<(usize, Direction, Option<LabelPattern>)>,
    nodes: &mut Vec<FlatNode>,
) -> Result<(), MatchError> {
    let me = nodes.len();
    nodes.push(FlatNode {
        test: NodeTest::new(&ast.head.constraints)?,
        capture: ast.head.capture.clone(),
        link,
    });
    for rel in &ast.relations {
        let label = rel.label.as_ref().map(compile_label).transpose()?;
        push_flat(&rel.child, Some((me, rel.direction, label)), nodes)?;
    }
    Ok(())
}

/// A pattern compiled for repeated matching.
#[derive(Debug, Clone)]
pub struct Matcher {
    nodes: Vec<FlatNode>,
}

impl Matcher {
    pub fn new(pattern: &PatternAst) -> Result<Self, MatchError> {
        Ok(Matcher {
            nodes: flatten(pattern)?,
        })
    }

    pub fn find(&self, graph: &DependencyGraph) -> Vec<Match> {
        let mut assignment = vec![0usize; self.nodes.len()];
        let mut found = BTreeSet::new();
        for token in graph.tokens() {
            if self.nodes[0].test.matches(token) {
                assignment[0] = token.index;
                self.extend(graph, 1, &mut assignment, &mut found);
            }
        }
        found
            .into_iter()
            .map(|bindings| Match {
                bindings,
                rule: None,
                sent_id: graph.sent_id().to_string(),
            })
            .collect()
    }

    fn extend(
        &self,
        graph: &DependencyGraph,
        next: usize,
        assignment: &mut [usize],
        found: &mut BTreeSet<BTreeMap<String, usize>>,
    ) {
        if next == self.nodes.len() {
            let bindings = self
                .nodes
                .iter()
                .zip(assignment.iter())
                .filter_map(|(node, &tok)| node.capture.clone().map(|c| (c, tok)))
                .collect();
            found.insert(bindings);
            return;
        }
        let node = &self.nodes[next];
        let (parent, direction, label) = node.link.as_ref().expect("non-head nodes are linked");
        let anchor = assignment[*parent];
        // Anchors are valid token indices, so adjacency queries cannot fail.
        let candidates: Vec<&Token> = match direction {
            Direction::Governs => graph
                .dependents(anchor, label.as_ref())
                .map(|v| v.into_iter().map(|(_, t)| t).collect())
                .unwrap_or_default(),
            Direction::GovernedBy => graph
                .governors(anchor, label.as_ref())
                .map(|v| v.into_iter().filter_map(|(_, g)| g.token()).collect())
                .unwrap_or_default(),
        };
        let mut last = None;
        for token in candidates {
            // Parallel edges with different labels lead to the same token.
            if last == Some(token.index) {
                continue;
            }
            last = Some(token.index);
            if node.test.matches(token) {
                assignment[next] = token.index;
                self.extend(graph, next + 1, assignment, found);
            }
        }
    }
}

/// All matches of a macro-free pattern, ordered by binding map.
pub fn find_matches(
    graph: &DependencyGraph,
    pattern: &PatternAst,
) -> Result<Vec<Match>, MatchError> {
    Ok(Matcher::new(pattern)?.find(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::{parse_conllu, DependencyEdge};
    use crate::pattern::{expand_lexicons, parse_pattern, LexiconSet};

    fn graph(src: &str) -> DependencyGraph {
        parse_conllu(src.as_bytes()).unwrap().remove(0)
    }

    const STRESS: &str = "# sent_id = t1:0
1\tStress\tstress\tNOUN\tNN\t_\t2\tnsubj\t_\t_
2\tcauses\tcause\tVERB\tVBZ\t_\t0\troot\t_\t_
3\tinsomnia\tinsomnia\tNOUN\tNN\t_\t2\tdobj\t_\t_
4\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_
";

    const PASSIVE: &str = "# sent_id = t3:0
1\tMy\tmy\tPRON\tPRP$\t_\t2\tnmod:poss\t_\t_
2\tinsomnia\tinsomnia\tNOUN\tNN\t_\t4\tnsubjpass\t_\t_
3\twas\tbe\tAUX\tVBD\t_\t4\tauxpass\t_\t_
4\tcaused\tcause\tVERB\tVBN\t_\t0\troot\t_\t_
5\tby\tby\tADP\tIN\t_\t6\tcase\t_\t_
6\tstress\tstress\tNOUN\tNN\t_\t4\tnmod\t4:nmod:agent\t_
7\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\t_
";

    fn expanded(src: &str) -> PatternAst {
        expand_lexicons(&parse_pattern(src).unwrap(), &LexiconSet::builtin()).unwrap()
    }

    fn rule1() -> PatternAst {
        expanded("{lemma:/$CLAUSAL_VERB/;pos:/VB.*/}=trigger >nsubj {}=cause >/dobj|obj/ {}=effect")
    }

    fn rule3() -> PatternAst {
        expanded(
            "{lemma:/$CLAUSAL_VERB/;pos:VBN}=trigger >/nsubjpass/ {}=effect >/nmod:agent/ {}=cause",
        )
    }

    fn bindings(m: &Match) -> Vec<(&str, usize)> {
        m.bindings.iter().map(|(k, v)| (k.as_str(), *v)).collect()
    }

    #[test]
    fn active_rule_on_active_sentence() {
        let matches = find_matches(&graph(STRESS), &rule1()).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(
            bindings(&matches[0]),
            [("cause", 1), ("effect", 3), ("trigger", 2)]
        );
        assert_eq!(matches[0].sent_id, "t1:0");
    }

    #[test]
    fn passive_rule_uses_enhanced_agent_edge() {
        let matches = find_matches(&graph(PASSIVE), &rule3()).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(
            bindings(&matches[0]),
            [("cause", 6), ("effect", 2), ("trigger", 4)]
        );
        assert!(find_matches(&graph(STRESS), &rule3()).unwrap().is_empty());
    }

    #[test]
    fn unconstrained_node_matches_every_token() {
        let g = graph(PASSIVE);
        let matches = find_matches(&g, &parse_pattern("{}=x").unwrap()).unwrap();
        assert_eq!(matches.len(), g.len());
    }

    #[test]
    fn unexpanded_macros_are_refused() {
        let ast = parse_pattern("{lemma:/$CLAUSAL_VERB/}=t").unwrap();
        assert!(matches!(
            find_matches(&graph(STRESS), &ast),
            Err(MatchError::UnexpandedMacros(_))
        ));
    }

    #[test]
    fn governed_by_walks_up() {
        let ast = parse_pattern("{lemma:insomnia}=e </dobj/ {pos:/VB.*/}=v").unwrap();
        let matches = find_matches(&graph(STRESS), &ast).unwrap();
        assert_eq!(bindings(&matches[0]), [("e", 3), ("v", 2)]);
    }

    #[test]
    fn lemma_is_case_insensitive_pos_is_not() {
        let g = graph(STRESS);
        let lemma = parse_pattern("{lemma:CAUSE}=x").unwrap();
        assert_eq!(find_matches(&g, &lemma).unwrap().len(), 1);
        let pos = parse_pattern("{pos:vbz}=x").unwrap();
        assert!(find_matches(&g, &pos).unwrap().is_empty());
        let upos = parse_pattern("{pos:VERB}=x").unwrap();
        assert_eq!(find_matches(&g, &upos).unwrap().len(), 1);
    }

    #[test]
    fn parallel_edges_do_not_duplicate() {
        let g0 = graph(STRESS);
        let mut enhanced = g0.enhanced_edges().to_vec();
        enhanced.push(DependencyEdge::new(2, 3, "obj"));
        let g = DependencyGraph::new(
            "t1:0",
            "",
            g0.tokens().to_vec(),
            g0.basic_edges().to_vec(),
            Some(enhanced),
        )
        .unwrap();
        assert_eq!(find_matches(&g, &rule1()).unwrap().len(), 1);
    }

    #[test]
    fn output_is_sorted_and_repeatable() {
        let g = graph(PASSIVE);
        let ast = parse_pattern("{}=a > {}=b").unwrap();
        let first = find_matches(&g, &ast).unwrap();
        let mut sorted = first.clone();
        sorted.sort_by(|x, y| x.bindings.cmp(&y.bindings));
        assert_eq!(first, sorted);
        assert_eq!(first, find_matches(&g, &ast).unwrap());
        assert_eq!(first.len(), g.len() - 1);
    }
}
