//! Command-line surface: mine -> select-actions -> correct -> evaluate,
//! plus LM training/scoring and template-set statistics.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 external-command
//! failure.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use gec_templates::batch;
use gec_templates::corpus::open_corpus;
use gec_templates::correct::AppliedCorrection;
use gec_templates::error::Error;
use gec_templates::evaluate::{self, usage_report};
use gec_templates::lm::{perplexity, ExternalScorer, LanguageModel, NgramModel};
use gec_templates::matcher::CompiledTemplateSet;
use gec_templates::miner;
use gec_templates::selector::{self, ActionSummary, SelectorConfig};
use gec_templates::template::{self, CorrectiveAction};

#[derive(Parser)]
#[command(name = "gec-templates", version, about = "Error-template mining, selection, correction, and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine candidate templates from a directory of page dumps
    Mine(MineArgs),
    /// Train or apply the built-in character n-gram model
    Lm(LmArgs),
    /// Select each template's corrective action by perplexity reduction
    SelectActions(SelectActionsArgs),
    /// Apply templates to text, optionally around an external model
    Correct(CorrectArgs),
    /// Score hypotheses against references or annotated gold edits
    Evaluate(EvaluateArgs),
    /// Action counts and proportions over a template file
    Stats(StatsArgs),
}

#[derive(Args)]
struct MineArgs {
    /// Directory of .txt/.html page dumps
    #[arg(long)]
    input: PathBuf,
    /// Output template JSONL
    #[arg(long)]
    output: PathBuf,
    /// Custom search patterns (JSONL with id, prefix, suffix)
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Args)]
struct LmArgs {
    #[command(subcommand)]
    command: LmCommand,
}

#[derive(Subcommand)]
enum LmCommand {
    /// Count n-grams over a corpus and write a model file
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(short, long, default_value_t = 0.01)]
        k: f64,
    },
    /// Emit "<ppl>\t<sentence>" per input line
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Sentences, one per line (stdin when omitted)
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SelectActionsArgs {
    #[arg(long)]
    templates: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Built-in n-gram model file
    #[arg(long, conflicts_with = "scorer_cmd")]
    model: Option<PathBuf>,
    /// External scorer command (line protocol over stdio)
    #[arg(long)]
    scorer_cmd: Option<String>,
    /// Evidence sentences per template
    #[arg(short = 'N', long = "max-samples", default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 5.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enriched template JSONL
    #[arg(long)]
    output: PathBuf,
    /// Also write the action summary JSON here
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectArgs {
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// pre | post | both (relative to the external model)
    #[arg(long)]
    stage: Option<String>,
    /// External correction model as a line filter
    #[arg(long)]
    model_cmd: Option<String>,
    /// Override every template's action (left|right|random)
    #[arg(long)]
    force_action: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Usage-report JSON path
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON config with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    /// Reference sentences, line-aligned with --src
    #[arg(long = "ref", conflicts_with = "gold")]
    reference: Option<PathBuf>,
    /// Annotated gold JSONL (source, edits)
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    templates: PathBuf,
}

/// Errors mapped to process exit codes.
enum CliError {
    Usage(String),
    Data(String),
    External(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::External(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::External(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::Scorer(_) | Error::ExternalCommand(_) | Error::LineCountMismatch { .. } => {
                CliError::External(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Lm(args) => match args.command {
            LmCommand::Train {
                corpus,
                output,
                order,
                k,
            } => cmd_lm_train(&corpus, &output, order, k),
            LmCommand::Score { model, input } => cmd_lm_score(&model, input.as_deref()),
        },
        Command::SelectActions(args) => cmd_select_actions(args),
        Command::Correct(args) => cmd_correct(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let lines: std::io::Result<Vec<String>> = BufReader::new(file).lines().collect();
    Ok(lines?)
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_mine(args: MineArgs) -> Result<(), CliError> {
    let patterns = match &args.patterns {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            miner::read_patterns(BufReader::new(file))?
        }
        None => miner::load_default_patterns(),
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.input)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map_or(false, |ext| ext == "txt" || ext == "html")
        })
        .collect();
    files.sort();

    let mut pages = 0usize;
    let mut candidates = Vec::new();
    for path in &files {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let text = miner::strip_markup(&raw);
        candidates.extend(miner::extract_candidates(&text, &patterns));
        pages += 1;
    }
    let templates = miner::normalize_and_dedupe(&candidates);
    template::write_templates_file(&args.output, &templates)?;
    println!("pages scanned: {pages}");
    println!("questions matched: {}", candidates.len());
    println!("templates emitted: {}", templates.len());
    Ok(())
}

fn cmd_lm_train(corpus: &Path, output: &Path, order: usize, k: f64) -> Result<(), CliError> {
    if order < 1 {
        return Err(CliError::Usage("--order must be >= 1".into()));
    }
    if !(k > 0.0) {
        return Err(CliError::Usage("-k must be positive".into()));
    }
    let stream = open_corpus(corpus)?;
    let sentences: Result<Vec<String>, Error> = stream.collect();
    let model = NgramModel::train(sentences?, order, k)?;
    model.save_file(output)?;
    println!(
        "trained order-{order} model, vocab {} characters",
        model.vocab_size()
    );
    Ok(())
}

fn cmd_lm_score(model_path: &Path, input: Option<&Path>) -> Result<(), CliError> {
    let model = NgramModel::load_file(model_path)?;
    let lines: Vec<String> = match input {
        Some(path) => read_lines(path)?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf.lines().map(str::to_string).collect()
        }
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    for line in &lines {
        let ppl = perplexity(&model, line)?;
        writeln!(out, "{ppl:.6}\t{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_select_actions(args: SelectActionsArgs) -> Result<(), CliError> {
    let model: Box<dyn LanguageModel> = match (&args.model, &args.scorer_cmd) {
        (Some(path), None) => Box::new(NgramModel::load_file(path)?),
        (None, Some(cmd)) => Box::new(ExternalScorer::spawn(cmd)?),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --model or --scorer-cmd is required".into(),
            ))
        }
    };
    let mut templates = template::read_templates_file(&args.templates)?;
    let cfg = SelectorConfig {
        n: args.n,
        alpha: args.alpha,
        rng_key: args.seed,
    };
    let corpus = open_corpus(&args.corpus)?;
    let decisions = selector::select_actions_batch(&templates, corpus, model.as_ref(), &cfg)?;
    selector::apply_decisions(&mut templates, &decisions);
    template::write_templates_file(&args.output, &templates)?;
    let summary = ActionSummary::from_decisions(&decisions);
    let summary_json = serde_json::to_string(&summary)?;
    println!("{summary_json}");
    if let Some(path) = &args.summary {
        std::fs::write(path, format!("{summary_json}\n"))?;
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    stage: Option<String>,
    model_cmd: Option<String>,
    templates_path: Option<PathBuf>,
    seed: Option<u64>,
    force_action: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Pre,
    Post,
    Both,
}

fn parse_stage(s: &str) -> Result<Stage, CliError> {
    match s {
        "pre" => Ok(Stage::Pre),
        "post" => Ok(Stage::Post),
        "both" => Ok(Stage::Both),
        other => Err(CliError::Usage(format!(
            "unknown stage {other:?} (expected pre|post|both)"
        ))),
    }
}

fn parse_action(s: &str) -> Result<CorrectiveAction, CliError> {
    s.parse().map_err(CliError::Usage)
}

/// Pipe lines through a shell command, one line in, one line out.
fn run_model_cmd(cmd: &str, lines: &[String]) -> Result<Vec<String>, CliError> {
    use std::process::{Command, Stdio};
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| CliError::External(format!("failed to spawn {cmd:?}: {e}")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let payload = {
        let mut s = String::new();
        for line in lines {
            s.push_str(line);
            s.push('\n');
        }
        s
    };
    let writer = std::thread::spawn(move || stdin.write_all(payload.as_bytes()));
    let stdout = child.stdout.take().expect("piped stdout");
    let out_lines: std::io::Result<Vec<String>> = BufReader::new(stdout).lines().collect();
    let out_lines = out_lines?;
    writer
        .join()
        .expect("writer thread panicked")
        .map_err(|e| CliError::External(format!("writing to {cmd:?}: {e}")))?;
    let status = child
        .wait()
        .map_err(|e| CliError::External(e.to_string()))?;
    if !status.success() {
        return Err(CliError::External(format!(
            "model command {cmd:?} exited with {status}"
        )));
    }
    if out_lines.len() != lines.len() {
        return Err(CliError::External(format!(
            "model command {cmd:?} returned {} lines for {} inputs",
            out_lines.len(),
            lines.len()
        )));
    }
    Ok(out_lines)
}

fn cmd_correct(args: CorrectArgs) -> Result<(), CliError> {
    let file_cfg: FileConfig = match &args.config {
        Some(path) => serde_json::from_reader(BufReader::new(std::fs::File::open(path)?))?,
        None => FileConfig::default(),
    };
    let stage = parse_stage(
        args.stage
            .as_deref()
            .or(file_cfg.stage.as_deref())
            .unwrap_or("pre"),
    )?;
    let model_cmd = args.model_cmd.or(file_cfg.model_cmd);
    let templates_path = args
        .templates
        .or(file_cfg.templates_path)
        .ok_or_else(|| CliError::Usage("--templates is required".into()))?;
    let seed = args.seed.or(file_cfg.seed).unwrap_or(0);
    let force = args
        .force_action
        .or(file_cfg.force_action)
        .map(|s| parse_action(&s))
        .transpose()?;
    if matches!(stage, Stage::Post | Stage::Both) && model_cmd.is_none() {
        return Err(CliError::Usage(
            "stage=post and stage=both require --model-cmd".into(),
        ));
    }

    let templates = template::read_templates_file(&templates_path)?;
    if force.is_none() {
        if let Some(t) = templates.iter().find(|t| t.action.is_none()) {
            return Err(CliError::Usage(format!(
                "template {} has no action; select actions first or pass --force-action",
                t.id
            )));
        }
    }
    let set = CompiledTemplateSet::compile(templates)?;
    let input = read_lines(&args.input)?;

    let apply = |lines: &[String]| -> Result<(Vec<String>, Vec<AppliedCorrection>), CliError> {
        let results = batch::correct_all(&set, lines, seed, force)?;
        let mut out = Vec::with_capacity(results.len());
        let mut log = Vec::new();
        for (corrected, applied) in results {
            out.push(corrected);
            log.extend(applied);
        }
        Ok((out, log))
    };
    let model = |lines: Vec<String>| -> Result<Vec<String>, CliError> {
        match &model_cmd {
            Some(cmd) => run_model_cmd(cmd, &lines),
            None => Ok(lines),
        }
    };

    let mut pre_log = Vec::new();
    let mut post_log = Vec::new();
    let output = match stage {
        Stage::Pre => {
            let (corrected, log) = apply(&input)?;
            pre_log = log;
            model(corrected)?
        }
        Stage::Post => {
            let modeled = model(input)?;
            let (corrected, log) = apply(&modeled)?;
            post_log = log;
            corrected
        }
        Stage::Both => {
            let (corrected, log) = apply(&input)?;
            pre_log = log;
            let modeled = model(corrected)?;
            let (corrected, log) = apply(&modeled)?;
            post_log = log;
            corrected
        }
    };
    write_lines(&args.output, &output)?;

    if let Some(path) = &args.report {
        // pre and post logs are reported separately, not merged
        let report = serde_json::json!({
            "pre": usage_report(&pre_log),
            "post": usage_report(&post_log),
        });
        std::fs::write(path, format!("{report}\n"))?;
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let sources = read_lines(&args.src)?;
    let hypotheses = read_lines(&args.hyp)?;
    let report = match (&args.reference, &args.gold) {
        (Some(ref_path), None) => {
            let references = read_lines(ref_path)?;
            evaluate::score(&sources, &hypotheses, &references, args.beta)?
        }
        (None, Some(gold_path)) => {
            let file = std::fs::File::open(gold_path)?;
            let records = evaluate::read_gold(BufReader::new(file))?;
            let gold: Vec<Vec<evaluate::Edit>> = records.into_iter().map(|r| r.edits).collect();
            evaluate::score_with_gold(&sources, &hypotheses, &gold, args.beta)?
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --ref or --gold is required".into(),
            ))
        }
    };
    println!("{}", serde_json::to_string(&report)?);
    print!("{}", report.table());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let templates = template::read_templates_file(&args.templates)?;
    let total = templates.len();
    let count = |action: Option<CorrectiveAction>| {
        templates.iter().filter(|t| t.action == action).count()
    };
    let pct = |n: usize| {
        if total == 0 {
            0.0
        } else {
            100.0 * n as f64 / total as f64
        }
    };
    println!("total {total}");
    for (label, n) in [
        ("left", count(Some(CorrectiveAction::Left))),
        ("right", count(Some(CorrectiveAction::Right))),
        ("random", count(Some(CorrectiveAction::Random))),
        ("unset", count(None)),
    ] {
        println!("{label} {n} {:.2}%", pct(n));
    }
    Ok(())
}
