//! Exhaustive reference matcher used to cross-check [`super::find_matches`].
//!
//! Every assignment of tokens to pattern nodes is generated and filtered.
//! Edges are found by scanning the raw enhanced edge list, not through the
//! graph's adjacency indexes.

use std::collections::BTreeSet;

use super::{flatten, Match, MatchError};
use crate::depgraph::DependencyGraph;
use crate::pattern::{Direction, PatternAst};

pub const DEFAULT_ORACLE_BOUND: usize = 16;

pub fn brute_force_matches(
    graph: &DependencyGraph,
    pattern: &PatternAst,
) -> Result<Vec<Match>, MatchError> {
    brute_force_matches_bounded(graph, pattern, DEFAULT_ORACLE_BOUND)
}

pub fn brute_force_matches_bounded(
    graph: &DependencyGraph,
    pattern: &PatternAst,
    bound: usize,
) -> Result<Vec<Match>, MatchError> {
    let nodes = flatten(pattern)?;
    let n = graph.len();
    if n > bound {
        return Err(MatchError::OracleBound {
            sent_id: graph.sent_id().to_string(),
            len: n,
            bound,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let k = nodes.len();
    let edges = graph.enhanced_edges();
    let mut found = BTreeSet::new();
    // Odometer over 1..=n for each node.
    let mut assignment = vec![1usize; k];
    loop {
        let ok = nodes.iter().enumerate().all(|(i, node)| {
            let token = &graph.tokens()[assignment[i] - 1];
            if !node.test.matches(token) {
                return false;
            }
            match &node.link {
                None => true,
                Some((parent, direction, label)) => {
                    let (gov, dep) = match direction {
                        Direction::Governs => (assignment[*parent], assignment[i]),
                        Direction::GovernedBy => (assignment[i], assignment[*parent]),
                    };
                    edges.iter().any(|e| {
                        e.governor == gov
                            && e.dependent == dep
                            && label.as_ref().is_none_or(|l| l.is_match(&e.label))
                    })
                }
            }
        });
        if ok {
            let bindings = nodes
                .iter()
                .zip(&assignment)
                .filter_map(|(node, &tok)| node.capture.clone().map(|c| (c, tok)))
                .collect();
            found.insert(bindings);
        }

        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(found
                    .into_iter()
                    .map(|bindings| Match {
                        bindings,
                        rule: None,
                        sent_id: graph.sent_id().to_string(),
                    })
                    .collect());
            }
            if assignment[pos] < n {
                assignment[pos] += 1;
                break;
            }
            assignment[pos] = 1;
            pos += 1;
        }
    }
}
