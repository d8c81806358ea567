use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use causegraph::eval::{accuracy, load_annotations, render_accuracy_table, AccuracyReport, Mode};
use causegraph::pipeline::{
    extract, load_parses, normalize_targets, read_triples_jsonl, render_rule_frequency,
    render_rule_frequency_tsv, write_triples_jsonl, ExtractionResult, PipelineConfig, RulesSource,
};
use causegraph::{expand_lexicons, find_matches, parse_pattern, LexiconSet};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "causegraph",
    version,
    about = "Extract cause-effect relations from dependency-parsed tweets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the rule set over a tweet corpus and write the extracted triples.
    Extract {
        /// Tweets as JSON lines with `id` and `text`.
        #[arg(long)]
        tweets: PathBuf,
        /// CoNLL-U parses with sentence ids of the form `tweet_id:n`.
        #[arg(long)]
        parses: PathBuf,
        /// Comma-separated target lemmas.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<String>,
        /// Rule file; the built-in rules are used when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Keep repeated (cause, rule, effect) triples.
        #[arg(long)]
        no_dedup: bool,
        /// Output path for triples (JSON lines).
        #[arg(long)]
        out: PathBuf,
        /// Also write the full result as JSON, for `report`.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Print every match of a pattern as a JSON line.
    Match {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        parses: PathBuf,
    },
    /// Render the rule-frequency table from a saved result.
    Report {
        #[arg(long)]
        result: PathBuf,
        /// Tab-separated output.
        #[arg(long)]
        tsv: bool,
    },
    /// Score triples against annotations.
    Eval {
        #[arg(long)]
        triples: PathBuf,
        /// TSV with tweet_id, sent, rule, effect, correct, hypothetical, negated.
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalMode::Both)]
        mode: EvalMode,
        /// Also write the reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMode {
    Strict,
    Relaxed,
    Both,
}

impl EvalMode {
    fn modes(self) -> &'static [Mode] {
        match self {
            EvalMode::Strict => &[Mode::Strict],
            EvalMode::Relaxed => &[Mode::Relaxed],
            EvalMode::Both => &[Mode::Strict, Mode::Relaxed],
        }
    }
}

/// Failure kinds that map to distinct exit codes.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run_extract(
    tweets: PathBuf,
    parses: PathBuf,
    targets: Vec<String>,
    rules: Option<PathBuf>,
    no_dedup: bool,
    out: PathBuf,
    result_path: Option<PathBuf>,
) -> Result<(), Failure> {
    let targets = normalize_targets(&targets).map_err(|e| Failure::Usage(e.into()))?;
    let config = PipelineConfig {
        targets,
        rules: rules.map_or(RulesSource::Builtin, RulesSource::File),
        tweets,
        parses,
        dedup: !no_dedup,
    };
    let result = extract(&config).context("extraction failed")?;
    if result.missing_parses > 0 {
        log::warn!("{} matched tweet(s) have no parse", result.missing_parses);
    }
    if result.skipped_tweets > 0 {
        log::warn!("{} tweet line(s) skipped", result.skipped_tweets);
    }

    let mut writer = create(&out)?;
    let entries = result.targets.iter().flat_map(|t| &t.triples);
    write_triples_jsonl(entries, &mut writer)
        .and_then(|_| writer.flush())
        .with_context(|| format!("cannot write {}", out.display()))?;
    if let Some(path) = result_path {
        let mut writer = create(&path)?;
        serde_json::to_writer_pretty(&mut writer, &result)
            .map_err(io::Error::from)
            .and_then(|_| writer.write_all(b"\n"))
            .and_then(|_| writer.flush())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    print!("{}", render_rule_frequency(&result));
    Ok(())
}

fn run_match(pattern: &str, parses: &Path) -> Result<(), Failure> {
    let ast = parse_pattern(pattern)
        .map_err(|e| Failure::Usage(anyhow::anyhow!("invalid pattern: {e}")))?;
    let ast = expand_lexicons(&ast, &LexiconSet::builtin())
        .map_err(|e| Failure::Usage(anyhow::anyhow!("invalid pattern: {e}")))?;
    let graphs = load_parses(parses).context("cannot load parses")?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for graph in &graphs {
        let matches = find_matches(graph, &ast).map_err(|e| Failure::Usage(e.into()))?;
        for m in matches {
            let bindings: BTreeMap<&str, serde_json::Value> = m
                .bindings
                .iter()
                .map(|(name, &index)| {
                    let token = graph.token(index).expect("bound token exists");
                    (
                        name.as_str(),
                        json!({"index": index, "form": token.form, "lemma": token.lemma}),
                    )
                })
                .collect();
            let line = json!({"sent_id": m.sent_id, "bindings": bindings});
            writeln!(out, "{line}").context("cannot write to stdout")?;
        }
    }
    Ok(())
}

fn run_report(result: &Path, tsv: bool) -> Result<(), Failure> {
    let result: ExtractionResult = serde_json::from_reader(open(result)?)
        .with_context(|| format!("{}: invalid result file", result.display()))?;
    if tsv {
        print!("{}", render_rule_frequency_tsv(&result));
    } else {
        print!("{}", render_rule_frequency(&result));
    }
    Ok(())
}

fn run_eval(
    triples: &Path,
    annotations: &Path,
    mode: EvalMode,
    json_path: Option<PathBuf>,
) -> Result<(), Failure> {
    let records = read_triples_jsonl(open(triples)?)
        .with_context(|| format!("{}: invalid triples", triples.display()))?;
    let annotations = load_annotations(open(annotations)?)
        .with_context(|| format!("{}: invalid annotations", annotations.display()))?;
    let reports: Vec<AccuracyReport> = mode
        .modes()
        .iter()
        .map(|&m| accuracy(&records, &annotations, m))
        .collect::<Result<_, _>>()
        .context("evaluation failed")?;

    // Categories in order of first appearance among the triples.
    let mut order: Vec<String> = Vec::new();
    for r in &records {
        if !order.contains(&r.effect) {
            order.push(r.effect.clone());
        }
    }
    print!("{}", render_accuracy_table(&reports, Some(&order)));

    if let Some(path) = json_path {
        let mut writer = create(&path)?;
        serde_json::to_writer_pretty(&mut writer, &reports)
            .map_err(io::Error::from)
            .and_then(|_| writer.write_all(b"\n"))
            .and_then(|_| writer.flush())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Extract {
            tweets,
            parses,
            targets,
            rules,
            no_dedup,
            out,
            result,
        } => run_extract(tweets, parses, targets, rules, no_dedup, out, result),
        Command::Match { pattern, parses } => run_match(&pattern, &parses),
        Command::Report { result, tsv } => run_report(&result, tsv),
        Command::Eval {
            triples,
            annotations,
            mode,
            json,
        } => run_eval(&triples, &annotations, mode, json),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
