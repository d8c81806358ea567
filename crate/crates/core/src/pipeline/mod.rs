//! Batch extraction over a tweet corpus with pre-computed parses.
//!
//! Tweets are filtered by target keyword, joined with their parsed
//! sentences by tweet id, run through the rule set and aggregated per
//! target. Results are independent of input order and of thread count.

mod report;

pub use report::{render_rule_frequency, render_rule_frequency_tsv};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{parse_conllu, DependencyGraph, GraphError};
use crate::rules::{
    apply_rules, builtin_ruleset, dedup_triples, load_rules, CausalTriple, RuleError, RuleSet,
    TripleRecord,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Rules { path: PathBuf, source: RuleError },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TweetCorpus {
    pub tweets: Vec<TweetRecord>,
    /// Lines skipped as malformed, empty or duplicate.
    pub skipped: usize,
}

/// Reads JSONL tweets. Bad lines are logged and counted, never fatal.
pub fn read_tweets<R: BufRead>(input: R) -> std::io::Result<TweetCorpus> {
    let mut corpus = TweetCorpus::default();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TweetRecord>(&line) {
            Ok(t) if t.text.trim().is_empty() => {
                log::warn!("line {}: tweet {} has empty text, skipped", i + 1, t.id);
                corpus.skipped += 1;
            }
            Ok(t) if !ids.insert(t.id.clone()) => {
                log::warn!("line {}: duplicate tweet id {}, skipped", i + 1, t.id);
                corpus.skipped += 1;
            }
            Ok(t) => corpus.tweets.push(t),
            Err(e) => {
                log::warn!("line {}: malformed tweet record: {e}", i + 1);
                corpus.skipped += 1;
            }
        }
    }
    Ok(corpus)
}

/// Normalises a target list: trimmed, lowercased, de-duplicated, order kept.
pub fn normalize_targets<S: AsRef<str>>(targets: &[S]) -> Result<Vec<String>, PipelineError> {
    let mut seen = HashSet::new();
    let out: Vec<String> = targets
        .iter()
        .map(|t| t.as_ref().trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .filter(|t| seen.insert(t.clone()))
        .collect();
    if out.is_empty() {
        return Err(PipelineError::Config(
            "at least one target is required".into(),
        ));
    }
    Ok(out)
}

/// Whole-word, case-insensitive keyword test accepting plural -s/-es.
#[derive(Debug, Clone)]
pub struct KeywordFilter {
    targets: Vec<(String, Regex)>,
}

impl KeywordFilter {
    pub fn new<S: AsRef<str>>(targets: &[S]) -> Self {
        let targets = targets
            .iter()
            .map(|t| {
                let t = t.as_ref().to_lowercase();
                let re = Regex::new(&format!(r"(?i)\b{}(?:e?s)?\b", regex::escape(&t)))
                    .expect("escaped keyword is a valid regex");
                (t, re)
            })
            .collect();
        KeywordFilter { targets }
    }

    pub fn matches(&self, text: &str) -> BTreeSet<String> {
        self.targets
            .iter()
            .filter(|(_, re)| re.is_match(text))
            .map(|(t, _)| t.clone())
            .collect()
    }
}

/// Tweets mentioning at least one target, in input order, with the targets
/// each one mentions.
pub fn filter_tweets<'a, I, S>(tweets: I, targets: &[S]) -> Vec<(&'a TweetRecord, BTreeSet<String>)>
where
    I: IntoIterator<Item = &'a TweetRecord>,
    S: AsRef<str>,
{
    let filter = KeywordFilter::new(targets);
    tweets
        .into_iter()
        .filter_map(|t| {
            let hits = filter.matches(&t.text);
            (!hits.is_empty()).then_some((t, hits))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleEntry {
    #[serde(flatten)]
    pub record: TripleRecord,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: String,
    pub tweets_matched: usize,
    pub rule_hits: BTreeMap<u32, usize>,
    pub raw_triple_count: usize,
    /// Triples after de-duplication (or all triples when disabled).
    pub relationships: usize,
    #[serde(default)]
    pub triples: Vec<TripleEntry>,
}

impl TargetResult {
    pub fn total_hits(&self) -> usize {
        self.rule_hits.values().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub rules: Vec<u32>,
    pub targets: Vec<TargetResult>,
    #[serde(default)]
    pub missing_parses: usize,
    #[serde(default)]
    pub skipped_tweets: usize,
}

impl ExtractionResult {
    pub fn target(&self, name: &str) -> Option<&TargetResult> {
        self.targets.iter().find(|t| t.target == name)
    }

    /// All reported triples, target by target.
    pub fn records(&self) -> impl Iterator<Item = &TripleRecord> {
        self.targets
            .iter()
            .flat_map(|t| t.triples.iter().map(|e| &e.record))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RulesSource {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub targets: Vec<String>,
    pub rules: RulesSource,
    pub tweets: PathBuf,
    pub parses: PathBuf,
    pub dedup: bool,
}

fn canonical_order(a: &CausalTriple, b: &CausalTriple) -> std::cmp::Ordering {
    (
        &a.tweet_id,
        a.sentence,
        a.rule,
        a.trigger,
        a.cause_head,
        a.effect_index,
    )
        .cmp(&(
            &b.tweet_id,
            b.sentence,
            b.rule,
            b.trigger,
            b.cause_head,
            b.effect_index,
        ))
}

/// Runs extraction over in-memory inputs.
pub fn extract_corpus(
    tweets: &[TweetRecord],
    graphs: &[DependencyGraph],
    rules: &RuleSet,
    targets: &[String],
    dedup: bool,
) -> ExtractionResult {
    let mut by_doc: HashMap<&str, Vec<&DependencyGraph>> = HashMap::new();
    for g in graphs {
        by_doc.entry(g.doc_id()).or_default().push(g);
    }
    for list in by_doc.values_mut() {
        list.sort_by_key(|g| g.ordinal());
    }

    let filtered = filter_tweets(tweets, targets);
    let per_tweet: Vec<Option<Vec<CausalTriple>>> = filtered
        .par_iter()
        .map(|(tweet, hits)| {
            by_doc.get(tweet.id.as_str()).map(|sentences| {
                sentences
                    .iter()
                    .flat_map(|g| apply_rules(g, rules, hits))
                    .collect()
            })
        })
        .collect();

    let missing_parses = per_tweet.iter().filter(|t| t.is_none()).count();
    let mut all: Vec<CausalTriple> = per_tweet.into_iter().flatten().flatten().collect();
    all.sort_by(canonical_order);

    let rule_ids = rules.ids();
    let targets = targets
        .iter()
        .map(|target| {
            let tweets_matched = filtered
                .iter()
                .filter(|(_, hits)| hits.contains(target))
                .count();
            let raw: Vec<CausalTriple> = all
                .iter()
                .filter(|t| &t.effect == target)
                .cloned()
                .collect();
            let mut rule_hits: BTreeMap<u32, usize> = rule_ids.iter().map(|&id| (id, 0)).collect();
            for t in &raw {
                *rule_hits.entry(t.rule).or_default() += 1;
            }
            let triples: Vec<TripleEntry> = if dedup {
                dedup_triples(&raw)
                    .into_iter()
                    .map(|d| TripleEntry {
                        record: TripleRecord::from(&d.triple),
                        multiplicity: d.multiplicity,
                    })
                    .collect()
            } else {
                raw.iter()
                    .map(|t| TripleEntry {
                        record: TripleRecord::from(t),
                        multiplicity: 1,
                    })
                    .collect()
            };
            TargetResult {
                target: target.clone(),
                tweets_matched,
                rule_hits,
                raw_triple_count: raw.len(),
                relationships: triples.len(),
                triples,
            }
        })
        .collect();

    ExtractionResult {
        rules: rule_ids,
        targets,
        missing_parses,
        skipped_tweets: 0,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_ruleset(source: &RulesSource) -> Result<RuleSet, PipelineError> {
    match source {
        RulesSource::Builtin => Ok(builtin_ruleset()),
        RulesSource::File(path) => load_rules(open(path)?).map_err(|source| PipelineError::Rules {
            path: path.clone(),
            source,
        }),
    }
}

pub fn load_parses(path: &Path) -> Result<Vec<DependencyGraph>, PipelineError> {
    parse_conllu(open(path)?).map_err(|source| PipelineError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads every input named by `config` and runs [`extract_corpus`].
pub fn extract(config: &PipelineConfig) -> Result<ExtractionResult, PipelineError> {
    let targets = normalize_targets(&config.targets)?;
    let rules = load_ruleset(&config.rules)?;
    let corpus = read_tweets(open(&config.tweets)?).map_err(|source| PipelineError::Io {
        path: config.tweets.clone(),
        source,
    })?;
    let graphs = load_parses(&config.parses)?;
    let mut result = extract_corpus(&corpus.tweets, &graphs, &rules, &targets, config.dedup);
    result.skipped_tweets = corpus.skipped;
    Ok(result)
}

/// Writes triples as JSONL, one record per line.
pub fn write_triples_jsonl<'a, T: Serialize + 'a, W: Write>(
    records: impl IntoIterator<Item = &'a T>,
    mut out: W,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Reads JSONL triples. Unlike tweets, malformed lines are errors.
pub fn read_triples_jsonl<R: BufRead>(input: R) -> std::io::Result<Vec<TripleRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: {e}", i + 1),
            )
        })?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(id: &str, text: &str) -> TweetRecord {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            created_at: None,
            city: None,
        }
    }

    #[test]
    fn keyword_filter_word_boundaries() {
        let f = KeywordFilter::new(&["insomnia", "headache", "stress"]);
        assert_eq!(
            f.matches("I have insomnia"),
            BTreeSet::from(["insomnia".to_string()])
        );
        assert_eq!(
            f.matches("headaches everywhere"),
            BTreeSet::from(["headache".to_string()])
        );
        assert!(f.matches("insomniac life").is_empty());
        assert!(f.matches("so stressed").is_empty());
        assert_eq!(f.matches("STRESSES and Insomnia").len(), 2);
    }

    #[test]
    fn filter_keeps_order_and_lists_all_targets() {
        let tweets = [
            tweet("1", "stress causes insomnia"),
            tweet("2", "nothing here"),
            tweet("3", "insomnia again"),
        ];
        let out = filter_tweets(&tweets, &["insomnia", "stress"]);
        let ids: Vec<_> = out.iter().map(|(t, _)| t.id.as_str()).collect();
        assert_eq!(ids, ["1", "3"]);
        assert_eq!(out[0].1.len(), 2);
    }

    #[test]
    fn reading_skips_bad_lines() {
        let input = r#"{"id":"1","text":"a"}
not json
{"id":"1","text":"dup"}
{"id":"2","text":""}

{"id":"3","text":"b","city":"San Diego","created_at":"2013-10-01"}
"#;
        let corpus = read_tweets(input.as_bytes()).unwrap();
        assert_eq!(corpus.tweets.len(), 2);
        assert_eq!(corpus.skipped, 3);
        assert_eq!(corpus.tweets[1].city.as_deref(), Some("San Diego"));
    }

    #[test]
    fn targets_must_not_be_empty() {
        assert!(normalize_targets::<&str>(&[]).is_err());
        assert!(normalize_targets(&[" "]).is_err());
        assert_eq!(
            normalize_targets(&["Stress", "stress", "insomnia"]).unwrap(),
            ["stress", "insomnia"]
        );
    }

    #[test]
    fn empty_corpus_gives_zero_counts() {
        let targets = vec!["insomnia".to_string()];
        let r = extract_corpus(&[], &[], &builtin_ruleset(), &targets, true);
        let t = r.target("insomnia").unwrap();
        assert_eq!(t.tweets_matched, 0);
        assert_eq!(t.total_hits(), 0);
        assert_eq!(t.rule_hits.len(), 6);
        assert_eq!(r.missing_parses, 0);
    }

    #[test]
    fn missing_parses_are_counted() {
        let tweets = [tweet("a", "stress causes insomnia"), tweet("b", "insomnia")];
        let targets = vec!["insomnia".to_string()];
        let r = extract_corpus(&tweets, &[], &builtin_ruleset(), &targets, true);
        assert_eq!(r.target("insomnia").unwrap().tweets_matched, 2);
        assert_eq!(r.target("insomnia").unwrap().total_hits(), 0);
        assert_eq!(r.missing_parses, 2);
    }

    #[test]
    fn triples_jsonl_round_trip() {
        let rec = TripleRecord {
            tweet_id: "t1".into(),
            sent: 0,
            rule: 1,
            trigger_lemma: "cause".into(),
            cause: "Stress".into(),
            effect: "insomnia".into(),
            text: "Stress causes insomnia.".into(),
        };
        let mut buf = Vec::new();
        write_triples_jsonl([&rec], &mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            line,
            "{\"tweet_id\":\"t1\",\"sent\":0,\"rule\":1,\"trigger_lemma\":\"cause\",\
             \"cause\":\"Stress\",\"effect\":\"insomnia\",\"text\":\"Stress causes insomnia.\"}\n"
        );
        assert_eq!(read_triples_jsonl(buf.as_slice()).unwrap(), [rec]);
    }
}
