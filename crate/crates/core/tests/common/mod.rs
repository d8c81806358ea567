#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use causegraph::pattern::{Attr, Direction, NodePattern, PatternAst, ValueMatcher};
use causegraph::{DependencyEdge, DependencyGraph, Token};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

const LEMMAS: [&str; 4] = ["cause", "stress", "lead", "sleep"];
const XPOS: [&str; 5] = ["NN", "NNS", "VBZ", "VBG", "JJ"];
const LABELS: [&str; 6] = ["nsubj", "dobj", "nmod:to", "nmod:of", "conj:and", "amod"];

/// Random tree of `1..=max_tokens` tokens plus extra enhanced edges.
pub fn random_graph<R: Rng>(rng: &mut R, max_tokens: usize, id: usize) -> DependencyGraph {
    let n = rng.gen_range(1..=max_tokens);
    let tokens: Vec<Token> = (1..=n)
        .map(|i| {
            let lemma = *LEMMAS.choose(rng).unwrap();
            let xpos = *XPOS.choose(rng).unwrap();
            let upos = if xpos.starts_with('V') {
                "VERB"
            } else {
                "NOUN"
            };
            let form = if rng.gen_bool(0.3) {
                lemma.to_uppercase()
            } else {
                lemma.to_string()
            };
            Token::new(i, &form, lemma, upos, xpos)
        })
        .collect();

    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut basic = vec![DependencyEdge::new(0, order[0], "root")];
    for k in 1..n {
        let gov = order[rng.gen_range(0..k)];
        basic.push(DependencyEdge::new(
            gov,
            order[k],
            LABELS.choose(rng).unwrap(),
        ));
    }

    let mut enhanced: Vec<DependencyEdge> = basic.clone();
    if n > 1 {
        for _ in 0..rng.gen_range(0..=n) {
            let gov = rng.gen_range(1..=n);
            let dep = rng.gen_range(1..=n);
            if gov != dep {
                enhanced.push(DependencyEdge::new(gov, dep, LABELS.choose(rng).unwrap()));
            }
        }
    }
    // Parallel edges with a different label between the same pair.
    if n > 1 && rng.gen_bool(0.3) {
        let e = basic[rng.gen_range(1..n)].clone();
        enhanced.push(DependencyEdge::new(e.governor, e.dependent, "dep"));
    }
    DependencyGraph::new(format!("g{id}:0"), "", tokens, basic, Some(enhanced))
        .expect("generated graph is valid")
}

fn random_value<R: Rng>(rng: &mut R, literals: &[&str], regexes: &[&str]) -> ValueMatcher {
    if rng.gen_bool(0.5) {
        ValueMatcher::Literal(literals.choose(rng).unwrap().to_string())
    } else {
        ValueMatcher::Regex(regexes.choose(rng).unwrap().to_string())
    }
}

fn random_node<R: Rng>(rng: &mut R, capture: Option<String>) -> NodePattern {
    let mut node = NodePattern {
        capture,
        ..NodePattern::default()
    };
    if rng.gen_bool(0.4) {
        let v = random_value(
            rng,
            &["cause", "Stress", "lead"],
            &["cause|lead", "s.*", "[a-c].*"],
        );
        node.constraints.insert(Attr::Lemma, v);
    }
    if rng.gen_bool(0.3) {
        let v = random_value(rng, &["STRESS", "lead"], &["[A-Z]+", "c.*e"]);
        node.constraints.insert(Attr::Form, v);
    }
    if rng.gen_bool(0.3) {
        let v = random_value(rng, &["NN", "VBG", "NOUN"], &["VB.*", "NNS?"]);
        node.constraints.insert(Attr::Pos, v);
    }
    node
}

fn random_label<R: Rng>(rng: &mut R) -> Option<ValueMatcher> {
    if rng.gen_bool(0.2) {
        None
    } else {
        Some(random_value(
            rng,
            &["nsubj", "nmod:to", "conj:and", "dep"],
            &["nmod:.*", "nsubj|dobj", "conj(:.*)?"],
        ))
    }
}

/// Random pattern with `1..=max_nodes` nodes. Some nodes are left
/// uncaptured so distinct assignments can collapse to one match.
pub fn random_pattern<R: Rng>(rng: &mut R, max_nodes: usize) -> PatternAst {
    let total = rng.gen_range(1..=max_nodes);
    let mut next = 0usize;
    build_pattern(rng, total, &mut next)
}

fn build_pattern<R: Rng>(rng: &mut R, nodes: usize, next: &mut usize) -> PatternAst {
    let capture = if rng.gen_bool(0.75) {
        Some(format!("n{next}"))
    } else {
        None
    };
    *next += 1;
    let mut ast = PatternAst::node(random_node(rng, capture));
    let mut remaining = nodes - 1;
    while remaining > 0 {
        let size = rng.gen_range(1..=remaining);
        remaining -= size;
        let direction = if rng.gen_bool(0.7) {
            Direction::Governs
        } else {
            Direction::GovernedBy
        };
        let label = random_label(rng);
        let child = build_pattern(rng, size, next);
        ast = ast.relate(direction, label, child);
    }
    ast
}

/// Wider pattern grammar for round-trip checks: awkward regex text, macro
/// references and deeper nesting.
pub fn random_rich_pattern<R: Rng>(rng: &mut R, max_nodes: usize) -> PatternAst {
    let mut names = BTreeSet::new();
    let total = rng.gen_range(1..=max_nodes);
    build_rich(rng, total, &mut names)
}

const RICH_LITERALS: [&str; 6] = ["cause", "nmod:to", "x-1", "a.b", "$CLAUSAL_VERB", "_"];
const RICH_REGEXES: [&str; 8] = [
    "VB.*",
    "a/b",
    "(?i)stress",
    "$CLAUSAL_NOUN|reason",
    "nmod:$RESULT_PREP",
    "[{}();]+",
    "\\d{2,3}",
    "x y",
];

fn rich_value<R: Rng>(rng: &mut R) -> ValueMatcher {
    random_value(rng, &RICH_LITERALS, &RICH_REGEXES)
}

fn build_rich<R: Rng>(rng: &mut R, nodes: usize, names: &mut BTreeSet<String>) -> PatternAst {
    let mut head = NodePattern::default();
    for attr in [Attr::Form, Attr::Lemma, Attr::Pos] {
        if rng.gen_bool(0.4) {
            head.constraints.insert(attr, rich_value(rng));
        }
    }
    if rng.gen_bool(0.6) {
        let name = format!(
            "{}{}",
            ["cause", "effect", "t_", "X"][rng.gen_range(0..4)],
            names.len()
        );
        names.insert(name.clone());
        head.capture = Some(name);
    }
    let mut ast = PatternAst::node(head);
    let mut remaining = nodes - 1;
    while remaining > 0 {
        let size = rng.gen_range(1..=remaining);
        remaining -= size;
        let direction = if rng.gen_bool(0.5) {
            Direction::Governs
        } else {
            Direction::GovernedBy
        };
        let label = if rng.gen_bool(0.2) {
            None
        } else {
            Some(rich_value(rng))
        };
        let child = build_rich(rng, size, names);
        ast = ast.relate(direction, label, child);
    }
    ast
}
