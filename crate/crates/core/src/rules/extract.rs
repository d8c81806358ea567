use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::RuleSet;
use crate::depgraph::DependencyGraph;

/// A cause-effect relation found in one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalTriple {
    /// Surface span of the cause phrase in word order.
    pub cause: String,
    pub cause_head: usize,
    pub rule: u32,
    pub trigger_lemma: String,
    pub trigger: usize,
    /// Target keyword (lemma) the effect matched.
    pub effect: String,
    pub effect_form: String,
    pub effect_index: usize,
    pub tweet_id: String,
    pub sentence: usize,
    pub text: String,
}

/// JSONL form of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub tweet_id: String,
    pub sent: usize,
    pub rule: u32,
    pub trigger_lemma: String,
    pub cause: String,
    pub effect: String,
    pub text: String,
}

impl From<&CausalTriple> for TripleRecord {
    fn from(t: &CausalTriple) -> Self {
        TripleRecord {
            tweet_id: t.tweet_id.clone(),
            sent: t.sentence,
            rule: t.rule,
            trigger_lemma: t.trigger_lemma.clone(),
            cause: t.cause.clone(),
            effect: t.effect.clone(),
            text: t.text.clone(),
        }
    }
}

fn is_conj(label: &str) -> bool {
    label == "conj" || label.starts_with("conj:")
}

/// First token, breadth-first from `start` along outgoing conj edges, whose
/// lemma is a target.
fn resolve_effect(
    graph: &DependencyGraph,
    start: usize,
    targets: &BTreeSet<String>,
) -> Option<usize> {
    let mut queue = VecDeque::from([start]);
    let mut seen = HashSet::from([start]);
    while let Some(index) = queue.pop_front() {
        let token = graph.token(index)?;
        if targets.contains(&token.lemma.to_lowercase()) {
            return Some(index);
        }
        for (edge, dep) in graph.dependents(index, None).ok()? {
            if is_conj(&edge.label) && seen.insert(dep.index) {
                queue.push_back(dep.index);
            }
        }
    }
    None
}

/// Basic-tree subtree of `head` in word order, without punctuation, without
/// case/mark words attached directly to `head`, and without the subtrees
/// rooted at any of `exclude`.
fn cause_span(graph: &DependencyGraph, head: usize, exclude: &[usize]) -> String {
    if exclude.contains(&head) {
        return String::new();
    }
    let mut children: HashMap<usize, Vec<(usize, &str)>> = HashMap::new();
    for e in graph.basic_edges() {
        children
            .entry(e.governor)
            .or_default()
            .push((e.dependent, e.label.as_str()));
    }
    let mut keep = vec![head];
    let mut stack = vec![head];
    while let Some(node) = stack.pop() {
        for &(child, label) in children.get(&node).map(Vec::as_slice).unwrap_or(&[]) {
            let base = label.split(':').next().unwrap_or(label);
            if base == "punct" || exclude.contains(&child) {
                continue;
            }
            if node == head && (base == "case" || base == "mark") {
                continue;
            }
            keep.push(child);
            stack.push(child);
        }
    }
    keep.sort_unstable();
    keep.iter()
        .filter_map(|&i| graph.token(i))
        .map(|t| t.form.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs every rule over one sentence and keeps matches whose effect is a
/// target. The effect may also be reached through conj edges leaving the
/// bound effect token.
pub fn apply_rules(
    graph: &DependencyGraph,
    rules: &RuleSet,
    targets: &BTreeSet<String>,
) -> Vec<CausalTriple> {
    let mut out = Vec::new();
    for rule in rules.rules() {
        let mut emitted = HashSet::new();
        for m in rule.matcher().find(graph) {
            let (Some(trigger), Some(mut cause), Some(mut effect)) =
                (m.get("trigger"), m.get("cause"), m.get("effect"))
            else {
                continue;
            };
            if let Some(invert) = &rule.invert_on {
                let inverted = graph
                    .dependents(trigger, Some(invert))
                    .map(|deps| deps.iter().any(|(e, _)| e.dependent == effect))
                    .unwrap_or(false);
                if inverted {
                    std::mem::swap(&mut cause, &mut effect);
                }
            }
            let Some(keyword) = resolve_effect(graph, effect, targets) else {
                continue;
            };
            if !emitted.insert((trigger, cause, keyword)) {
                continue;
            }
            let span = cause_span(graph, cause, &[effect, keyword]);
            if span.is_empty() {
                continue;
            }
            let trigger_tok = graph.token(trigger).expect("bound token");
            let effect_tok = graph.token(keyword).expect("bound token");
            out.push(CausalTriple {
                cause: span,
                cause_head: cause,
                rule: rule.id,
                trigger_lemma: trigger_tok.lemma.to_lowercase(),
                trigger,
                effect: effect_tok.lemma.to_lowercase(),
                effect_form: effect_tok.form.clone(),
                effect_index: keyword,
                tweet_id: graph.doc_id().to_string(),
                sentence: graph.ordinal(),
                text: graph.text().to_string(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupedTriple {
    pub triple: CausalTriple,
    pub multiplicity: usize,
}

/// Collapses triples sharing (lowercased cause, rule, effect), keeping the
/// first occurrence and counting repeats.
pub fn dedup_triples(triples: &[CausalTriple]) -> Vec<DedupedTriple> {
    let mut index: HashMap<(String, u32, String), usize> = HashMap::new();
    let mut out: Vec<DedupedTriple> = Vec::new();
    for t in triples {
        let key = (t.cause.to_lowercase(), t.rule, t.effect.clone());
        match index.get(&key) {
            Some(&i) => out[i].multiplicity += 1,
            None => {
                index.insert(key, out.len());
                out.push(DedupedTriple {
                    triple: t.clone(),
                    multiplicity: 1,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::parse_conllu;
    use crate::rules::builtin_ruleset;

    fn targets(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn graph(src: &str) -> DependencyGraph {
        parse_conllu(src.as_bytes()).unwrap().remove(0)
    }

    const INVERTED: &str = "# sent_id = x9:0
# text = Insomnia results from stress
1\tInsomnia\tinsomnia\tNOUN\tNN\t_\t2\tnsubj\t_\t_
2\tresults\tresult\tVERB\tVBZ\t_\t0\troot\t_\t_
3\tfrom\tfrom\tADP\tIN\t_\t4\tcase\t_\t_
4\tstress\tstress\tNOUN\tNN\t_\t2\tnmod\t2:nmod:from\t_
";

    const CONJ: &str = "# sent_id = t14:0
# text = too many tears leads to headaches and heavy hearts
1\ttoo\ttoo\tADV\tRB\t_\t2\tadvmod\t_\t_
2\tmany\tmany\tADJ\tJJ\t_\t3\tamod\t_\t_
3\ttears\ttear\tNOUN\tNNS\t_\t4\tnsubj\t_\t_
4\tleads\tlead\tVERB\tVBZ\t_\t0\troot\t_\t_
5\tto\tto\tADP\tTO\t_\t6\tcase\t_\t_
6\theadaches\theadache\tNOUN\tNNS\t_\t4\tnmod\t4:nmod:to\t_
7\tand\tand\tCCONJ\tCC\t_\t6\tcc\t_\t_
8\theavy\theavy\tADJ\tJJ\t_\t9\tamod\t_\t_
9\thearts\theart\tNOUN\tNNS\t_\t6\tconj\t6:conj:and|4:nmod:to\t_
";

    #[test]
    fn results_from_swaps_cause_and_effect() {
        let out = apply_rules(
            &graph(INVERTED),
            &builtin_ruleset(),
            &targets(&["insomnia"]),
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rule, 6);
        assert_eq!(out[0].cause, "stress");
        assert_eq!(out[0].effect, "insomnia");
        assert_eq!(out[0].tweet_id, "x9");

        // Without the swap "stress" would be the effect.
        let none = apply_rules(&graph(INVERTED), &builtin_ruleset(), &targets(&["stress"]));
        assert!(none.is_empty());
    }

    #[test]
    fn conjunct_effects_and_span() {
        let out = apply_rules(&graph(CONJ), &builtin_ruleset(), &targets(&["headache"]));
        assert_eq!(out.len(), 1);
        let t = &out[0];
        assert_eq!(t.cause, "too many tears");
        assert_eq!(t.effect, "headache");
        assert_eq!(t.effect_form, "headaches");
        assert_eq!(t.trigger_lemma, "lead");
    }

    #[test]
    fn effect_filter_excludes_other_targets() {
        let out = apply_rules(&graph(CONJ), &builtin_ruleset(), &targets(&["insomnia"]));
        assert!(out.is_empty());
    }

    fn triple(cause: &str, rule: u32, tweet: &str) -> CausalTriple {
        CausalTriple {
            cause: cause.to_string(),
            cause_head: 1,
            rule,
            trigger_lemma: "cause".into(),
            trigger: 2,
            effect: "insomnia".into(),
            effect_form: "insomnia".into(),
            effect_index: 3,
            tweet_id: tweet.into(),
            sentence: 0,
            text: String::new(),
        }
    }

    #[test]
    fn dedup_is_case_insensitive_on_cause() {
        let ts = [
            triple("missing someone", 1, "a"),
            triple("Missing someone", 1, "b"),
        ];
        let out = dedup_triples(&ts);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].multiplicity, 2);
        assert_eq!(out[0].triple.tweet_id, "a");
    }

    #[test]
    fn dedup_keeps_distinct_rules() {
        let ts = [triple("stress", 1, "a"), triple("stress", 3, "a")];
        assert_eq!(dedup_triples(&ts).len(), 2);
        assert!(dedup_triples(&[]).is_empty());
    }
}
