//! CoNLL-U reader and writer.

use std::io::{BufRead, Write};

use super::{DependencyEdge, DependencyGraph, GraphError, Token};

/// A recoverable oddity encountered while reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluWarning {
    pub line: usize,
    pub message: String,
}

struct Row {
    line: usize,
    token: Token,
    head: usize,
    deprel: String,
    deps: Option<Vec<(usize, String)>>,
}

#[derive(Default)]
struct Block {
    sent_id: Option<String>,
    text: Option<String>,
    rows: Vec<Row>,
    first_line: usize,
}

/// Reads every sentence block, logging skipped rows as warnings.
pub fn parse_conllu<R: BufRead>(input: R) -> Result<Vec<DependencyGraph>, GraphError> {
    let (graphs, warnings) = parse_conllu_with_warnings(input)?;
    for w in warnings {
        log::warn!("line {}: {}", w.line, w.message);
    }
    Ok(graphs)
}

pub fn parse_conllu_with_warnings<R: BufRead>(
    input: R,
) -> Result<(Vec<DependencyGraph>, Vec<ConlluWarning>), GraphError> {
    let mut graphs = Vec::new();
    let mut warnings = Vec::new();
    let mut block = Block::default();

    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let line = line.trim_end_matches('\r');

        if line.trim().is_empty() {
            if !block.rows.is_empty() || block.sent_id.is_some() {
                let finished = std::mem::take(&mut block);
                graphs.push(finish_block(finished, graphs.len())?);
            }
            continue;
        }
        if block.rows.is_empty() && block.sent_id.is_none() && block.text.is_none() {
            block.first_line = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => block.sent_id = Some(value.trim().to_string()),
                    "text" => block.text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if let Some(row) = parse_row(line, line_no, &mut warnings)? {
            block.rows.push(row);
        }
    }
    if !block.rows.is_empty() || block.sent_id.is_some() {
        graphs.push(finish_block(block, graphs.len())?);
    }
    Ok((graphs, warnings))
}

fn parse_row(
    line: &str,
    line_no: usize,
    warnings: &mut Vec<ConlluWarning>,
) -> Result<Option<Row>, GraphError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 10 {
        return Err(GraphError::FieldCount {
            line: line_no,
            found: fields.len(),
        });
    }
    let malformed = |message: String| GraphError::Malformed {
        line: line_no,
        message,
    };

    let id = fields[0];
    if id.contains('-') {
        warnings.push(ConlluWarning {
            line: line_no,
            message: format!("skipped multiword token {id}"),
        });
        return Ok(None);
    }
    if id.contains('.') {
        warnings.push(ConlluWarning {
            line: line_no,
            message: format!("skipped empty node {id}"),
        });
        return Ok(None);
    }
    let index: usize = id
        .parse()
        .map_err(|_| malformed(format!("invalid token id '{id}'")))?;
    if index == 0 {
        return Err(malformed("token id must be at least 1".to_string()));
    }
    let head: usize = fields[6]
        .parse()
        .map_err(|_| malformed(format!("invalid head '{}'", fields[6])))?;
    let deprel = fields[7].to_string();
    if deprel.is_empty() || deprel == "_" {
        return Err(malformed("missing dependency relation".to_string()));
    }

    let deps = if fields[8] == "_" {
        None
    } else {
        let mut pairs = Vec::new();
        for item in fields[8].split('|') {
            let (gov, rel) = item
                .split_once(':')
                .ok_or_else(|| malformed(format!("invalid DEPS entry '{item}'")))?;
            if gov.contains('.') {
                warnings.push(ConlluWarning {
                    line: line_no,
                    message: format!("skipped enhanced edge from empty node {gov}"),
                });
                continue;
            }
            let gov: usize = gov
                .parse()
                .map_err(|_| malformed(format!("invalid DEPS head '{gov}'")))?;
            if rel.is_empty() {
                return Err(malformed(format!("empty DEPS relation in '{item}'")));
            }
            pairs.push((gov, rel.to_string()));
        }
        Some(pairs)
    };

    let mut token = Token::new(index, fields[1], fields[2], fields[3], fields[4]);
    if fields[9] != "_" {
        token.misc = fields[9].to_string();
    }
    Ok(Some(Row {
        line: line_no,
        token,
        head,
        deprel,
        deps,
    }))
}

fn finish_block(block: Block, ordinal: usize) -> Result<DependencyGraph, GraphError> {
    let n = block.rows.len();
    let mut tokens = Vec::with_capacity(n);
    let mut basic = Vec::with_capacity(n);
    let mut enhanced = Vec::new();
    let mut any_deps = false;

    for (pos, row) in block.rows.into_iter().enumerate() {
        if row.token.index != pos + 1 {
            return Err(GraphError::Malformed {
                line: row.line,
                message: format!(
                    "token id {} out of sequence, expected {}",
                    row.token.index,
                    pos + 1
                ),
            });
        }
        let out_of_range = |head: usize| GraphError::Malformed {
            line: row.line,
            message: format!("head index {head} out of range for {n} tokens"),
        };
        if row.head > n {
            return Err(out_of_range(row.head));
        }
        let dependent = row.token.index;
        let basic_edge = DependencyEdge::new(row.head, dependent, &row.deprel);
        match row.deps {
            None => enhanced.push(basic_edge.clone()),
            Some(pairs) => {
                any_deps = true;
                for (gov, rel) in pairs {
                    if gov > n {
                        return Err(out_of_range(gov));
                    }
                    enhanced.push(DependencyEdge::new(gov, dependent, &rel));
                }
            }
        }
        basic.push(basic_edge);
        tokens.push(row.token);
    }

    let sent_id = block.sent_id.unwrap_or_else(|| ordinal.to_string());
    let text = block.text.unwrap_or_default();
    let enhanced = any_deps.then_some(enhanced);
    DependencyGraph::new(sent_id, text, tokens, basic, enhanced).map_err(|e| match e {
        GraphError::Invalid { sent_id, message } => GraphError::Invalid {
            sent_id,
            message: format!("{message} (block starting at line {})", block.first_line),
        },
        other => other,
    })
}

fn or_underscore(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

/// Writes graphs in the dialect read by [`parse_conllu`].
pub fn write_conllu<'a, W, I>(graphs: I, mut out: W) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a DependencyGraph>,
{
    for g in graphs {
        writeln!(out, "# sent_id = {}", g.sent_id())?;
        writeln!(out, "# text = {}", g.text())?;
        for tok in g.tokens() {
            let head = g
                .basic_head(tok.index)
                .expect("basic tree covers every token");
            let incoming: Vec<&DependencyEdge> = g
                .enhanced_edges()
                .iter()
                .filter(|e| e.dependent == tok.index)
                .collect();
            let deps = if incoming.len() == 1 && incoming[0] == head {
                "_".to_string()
            } else {
                let mut pairs: Vec<(usize, &str)> = incoming
                    .iter()
                    .map(|e| (e.governor, e.label.as_str()))
                    .collect();
                pairs.sort();
                pairs
                    .iter()
                    .map(|(g, l)| format!("{g}:{l}"))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t_\t{}\t{}\t{}\t{}",
                tok.index,
                tok.form,
                tok.lemma,
                or_underscore(&tok.upos),
                or_underscore(&tok.xpos),
                head.governor,
                head.label,
                deps,
                or_underscore(&tok.misc),
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}
