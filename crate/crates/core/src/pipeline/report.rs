//! Rule-frequency tables: one row per rule, one column per target.

use std::fmt::Write;

use super::ExtractionResult;

const RULE_HEADER: &str = "Matched rule #";
const TOTAL_ROW: &str = "Total";
const RELATIONSHIP_ROW: &str = "# causal relationship";

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn rows(result: &ExtractionResult) -> Vec<(String, Vec<usize>)> {
    let mut rows: Vec<(String, Vec<usize>)> = result
        .rules
        .iter()
        .map(|id| {
            let counts = result
                .targets
                .iter()
                .map(|t| t.rule_hits.get(id).copied().unwrap_or(0))
                .collect();
            (id.to_string(), counts)
        })
        .collect();
    rows.push((
        TOTAL_ROW.to_string(),
        result.targets.iter().map(|t| t.total_hits()).collect(),
    ));
    rows.push((
        RELATIONSHIP_ROW.to_string(),
        result.targets.iter().map(|t| t.relationships).collect(),
    ));
    rows
}

/// Aligned text table. Column headers carry the number of keyword-matched
/// tweets; the Total row sums the rule rows.
pub fn render_rule_frequency(result: &ExtractionResult) -> String {
    let headers: Vec<String> = result
        .targets
        .iter()
        .map(|t| format!("{} (of {})", title_case(&t.target), t.tweets_matched))
        .collect();
    let rows = rows(result);

    let first = rows
        .iter()
        .map(|(label, _)| label.len())
        .chain([RULE_HEADER.len()])
        .max()
        .unwrap_or(0);
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| {
            rows.iter()
                .map(|(_, counts)| counts[i].to_string().len())
                .chain([h.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{RULE_HEADER:<first$}");
    for (h, w) in headers.iter().zip(&widths) {
        let _ = write!(out, "  {h:>w$}");
    }
    out.push('\n');
    for (label, counts) in &rows {
        let _ = write!(out, "{label:<first$}");
        for (c, w) in counts.iter().zip(&widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Tab-separated form of the same table, with a `tweets` row.
pub fn render_rule_frequency_tsv(result: &ExtractionResult) -> String {
    let mut out = String::from("rule");
    for t in &result.targets {
        out.push('\t');
        out.push_str(&t.target);
    }
    out.push('\n');
    out.push_str("tweets");
    for t in &result.targets {
        let _ = write!(out, "\t{}", t.tweets_matched);
    }
    out.push('\n');
    for (label, counts) in rows(result) {
        let label = match label.as_str() {
            TOTAL_ROW => "total".to_string(),
            RELATIONSHIP_ROW => "relationships".to_string(),
            _ => label,
        };
        out.push_str(&label);
        for c in counts {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
    }
    out
}
