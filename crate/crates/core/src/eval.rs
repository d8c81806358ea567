//! Accuracy of extracted triples against human annotations.
//!
//! Accuracy is precision over what the extractor returned: true positives
//! divided by extracted triples, per effect category and micro-averaged
//! over all categories. Under strict scoring a triple counts only when the
//! annotator marked it correct and neither hypothetical nor negated; relaxed
//! scoring also accepts hypothetical and negated statements.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::TripleRecord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("line {line}: duplicate annotation for {key}")]
    DuplicateKey { line: usize, key: AnnotationKey },
    #[error("{} unannotated triple(s): {}", .0.len(), .0.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "))]
    Unannotated(Vec<AnnotationKey>),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnnotationKey {
    pub tweet_id: String,
    pub sent: usize,
    pub rule: u32,
    pub effect: String,
}

impl fmt::Display for AnnotationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.tweet_id, self.sent, self.rule, self.effect
        )
    }
}

impl From<&TripleRecord> for AnnotationKey {
    fn from(t: &TripleRecord) -> Self {
        AnnotationKey {
            tweet_id: t.tweet_id.clone(),
            sent: t.sent,
            rule: t.rule,
            effect: t.effect.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub key: AnnotationKey,
    /// The causal relation is genuinely stated.
    pub correct: bool,
    pub hypothetical: bool,
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Relaxed,
}

impl Mode {
    pub fn is_true_positive(self, a: &AnnotationRecord) -> bool {
        match self {
            Mode::Strict => a.correct && !a.hypothetical && !a.negated,
            Mode::Relaxed => a.correct,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Strict => "Strict",
            Mode::Relaxed => "Relaxed",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "relaxed" => Ok(Mode::Relaxed),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

pub type AnnotationSet = BTreeMap<AnnotationKey, AnnotationRecord>;

const COLUMNS: [&str; 7] = [
    "tweet_id",
    "sent",
    "rule",
    "effect",
    "correct",
    "hypothetical",
    "negated",
];

fn parse_flag(value: &str, column: &str, line: usize) -> Result<bool, EvalError> {
    match value {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(EvalError::Format {
            line,
            message: format!("column '{column}' must be 0 or 1, found '{other}'"),
        }),
    }
}

/// Reads a tab-separated annotation file with a header row. Columns may
/// appear in any order; extra columns are ignored.
pub fn load_annotations<R: BufRead>(input: R) -> Result<AnnotationSet, EvalError> {
    let mut lines = input.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(EvalError::MissingColumn(COLUMNS[0].to_string())),
            Some((_, line)) => {
                let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let mut position = [0usize; 7];
    for (slot, column) in position.iter_mut().zip(COLUMNS) {
        *slot = names
            .iter()
            .position(|n| *n == column)
            .ok_or_else(|| EvalError::MissingColumn(column.to_string()))?;
    }

    let mut set = AnnotationSet::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let get = |col: usize| -> Result<&str, EvalError> {
            fields
                .get(position[col])
                .copied()
                .ok_or_else(|| EvalError::Format {
                    line: line_no,
                    message: format!("missing value for column '{}'", COLUMNS[col]),
                })
        };
        let number_err = |col: usize, v: &str| EvalError::Format {
            line: line_no,
            message: format!("column '{}' must be a number, found '{v}'", COLUMNS[col]),
        };
        let sent = get(1)?;
        let rule = get(2)?;
        let key = AnnotationKey {
            tweet_id: get(0)?.to_string(),
            sent: sent.parse().map_err(|_| number_err(1, sent))?,
            rule: rule.parse().map_err(|_| number_err(2, rule))?,
            effect: get(3)?.to_lowercase(),
        };
        let record = AnnotationRecord {
            key: key.clone(),
            correct: parse_flag(get(4)?, COLUMNS[4], line_no)?,
            hypothetical: parse_flag(get(5)?, COLUMNS[5], line_no)?,
            negated: parse_flag(get(6)?, COLUMNS[6], line_no)?,
        };
        if set.insert(key.clone(), record).is_some() {
            return Err(EvalError::DuplicateKey { line: line_no, key });
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub category: String,
    pub true_positives: usize,
    pub total: usize,
    /// `None` when nothing was extracted.
    pub accuracy: Option<f64>,
}

impl CategoryAccuracy {
    fn new(category: String, true_positives: usize, total: usize) -> Self {
        CategoryAccuracy {
            category,
            true_positives,
            total,
            accuracy: (total > 0).then(|| true_positives as f64 / total as f64),
        }
    }

    pub fn percent(&self) -> String {
        format_percent(self.true_positives, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mode: Mode,
    /// Sorted by category name.
    pub categories: Vec<CategoryAccuracy>,
    pub micro: CategoryAccuracy,
}

impl AccuracyReport {
    pub fn category(&self, name: &str) -> Option<&CategoryAccuracy> {
        self.categories.iter().find(|c| c.category == name)
    }
}

/// `tp / total` as a percentage with two decimals, rounded half up using
/// integer arithmetic; `n/a` for an empty denominator.
pub fn format_percent(tp: usize, total: usize) -> String {
    if total == 0 {
        return "n/a".to_string();
    }
    let hundredths = (tp as u128 * 20_000 + total as u128) / (2 * total as u128);
    format!("{}.{:02}%", hundredths / 100, hundredths % 100)
}

/// Scores every triple against its annotation. Fails if any triple lacks
/// one.
pub fn accuracy(
    triples: &[TripleRecord],
    annotations: &AnnotationSet,
    mode: Mode,
) -> Result<AccuracyReport, EvalError> {
    let mut missing = Vec::new();
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for t in triples {
        let key = AnnotationKey::from(t);
        match annotations.get(&key) {
            None => missing.push(key),
            Some(a) => {
                let entry = counts.entry(t.effect.as_str()).or_default();
                entry.1 += 1;
                if mode.is_true_positive(a) {
                    entry.0 += 1;
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(EvalError::Unannotated(missing));
    }
    let categories: Vec<CategoryAccuracy> = counts
        .into_iter()
        .map(|(cat, (tp, total))| CategoryAccuracy::new(cat.to_string(), tp, total))
        .collect();
    let tp = categories.iter().map(|c| c.true_positives).sum();
    let total = categories.iter().map(|c| c.total).sum();
    Ok(AccuracyReport {
        mode,
        categories,
        micro: CategoryAccuracy::new("micro-average".to_string(), tp, total),
    })
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Text table with one column per report. Categories follow `order` when
/// given (unknown names are skipped), otherwise alphabetical order.
pub fn render_accuracy_table(reports: &[AccuracyReport], order: Option<&[String]>) -> String {
    let mut names: Vec<String> = match order {
        Some(order) => order.to_vec(),
        None => Vec::new(),
    };
    for r in reports {
        for c in &r.categories {
            if order.is_none() && !names.contains(&c.category) {
                names.push(c.category.clone());
            }
        }
    }
    if order.is_none() {
        names.sort();
    }

    let mut rows: Vec<(String, Vec<String>)> = names
        .iter()
        .map(|name| {
            let cells = reports
                .iter()
                .map(|r| {
                    r.category(name)
                        .map(CategoryAccuracy::percent)
                        .unwrap_or_else(|| "n/a".to_string())
                })
                .collect();
            (title_case(name), cells)
        })
        .collect();
    rows.push((
        "Micro-average".to_string(),
        reports.iter().map(|r| r.micro.percent()).collect(),
    ));

    let headers: Vec<String> = reports
        .iter()
        .map(|r| format!("{} evaluation", r.mode.label()))
        .collect();
    let first = rows
        .iter()
        .map(|(l, _)| l.len())
        .chain(["Category".len()])
        .max()
        .unwrap_or(0);
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| {
            rows.iter()
                .map(|(_, c)| c[i].len())
                .chain([h.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:<first$}", "Category");
    for (h, w) in headers.iter().zip(&widths) {
        let _ = write!(out, "  {h:>w$}");
    }
    out.push('\n');
    for (label, cells) in &rows {
        let _ = write!(out, "{label:<first$}");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
    }
    out
}
