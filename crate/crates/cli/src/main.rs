use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lexc_core::corpus::{self, CorpusError};
use lexc_core::eval::{run_with_options, RunOptions};
use lexc_core::force_majeure::{
    classify, filter_catalog, EventCatalog, FmError, FmThresholds, ScoreProvider, TableScoreProvider,
};
use lexc_core::lint::lint;
use lexc_core::model::{print_canonical, validate, ContractAst};
use lexc_core::parser::{parse, parse_scenario};

const OK: u8 = 0;
const FINDINGS: u8 = 1;
const INVALID: u8 = 2;
const EVAL: u8 = 3;
const IO: u8 = 4;

#[derive(Parser)]
#[command(name = "lexc", version, about = "Contracts as code: parse, lint, run and compare")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a contract, printing its canonical form
    Parse { file: PathBuf },
    /// Report ambiguity findings
    Lint { file: PathBuf },
    /// Evaluate a contract against a scenario
    Run {
        file: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_passes: usize,
    },
    /// Force-majeure event scoring
    #[command(subcommand)]
    Fm(FmCommand),
    /// Case corpus workflows
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Subcommand)]
enum FmCommand {
    /// Classify one event
    Classify {
        #[command(flatten)]
        opts: FmOpts,
        #[arg(long)]
        event: String,
    },
    /// List the catalog events that classify as included
    Filter {
        #[command(flatten)]
        opts: FmOpts,
    },
}

#[derive(Args)]
struct FmOpts {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long, default_value_t = 7)]
    sim_threshold: u32,
    /// A whole number, or `off` to ignore impact
    #[arg(long, default_value = "7", value_parser = parse_impact)]
    impact_threshold: Impact,
}

#[derive(Clone, Copy)]
struct Impact(Option<u32>);

fn parse_impact(s: &str) -> Result<Impact, String> {
    if s == "off" {
        return Ok(Impact(None));
    }
    s.parse::<u32>()
        .map(|n| Impact(Some(n)))
        .map_err(|_| format!("expected a whole number or `off`, found `{s}`"))
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Run every entry and print the alignment report
    Run {
        dir: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rewrite manifest.tsv from the files on disk
    Manifest { dir: PathBuf },
    /// Rewrite every expected ledger from the current evaluator
    Bless { dir: PathBuf },
}

/// Diagnostic plus exit code.
struct Failure(u8, String);

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.format == Format::Json;
    let result = match cli.command {
        Command::Parse { file } => cmd_parse(&file, json),
        Command::Lint { file } => cmd_lint(&file, json),
        Command::Run {
            file,
            scenario,
            max_passes,
        } => cmd_run(&file, &scenario, max_passes, json),
        Command::Fm(FmCommand::Classify { opts, event }) => cmd_fm_classify(&opts, &event, json),
        Command::Fm(FmCommand::Filter { opts }) => cmd_fm_filter(&opts, json),
        Command::Corpus(CorpusCommand::Run { dir, report }) => cmd_corpus_run(&dir, report.as_deref(), json),
        Command::Corpus(CorpusCommand::Manifest { dir }) => cmd_corpus_manifest(&dir),
        Command::Corpus(CorpusCommand::Bless { dir }) => cmd_corpus_bless(&dir),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("lexc: {message}");
            ExitCode::from(code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(IO, format!("{}: {e}", path.display())))
}

fn load_contract(path: &Path) -> Result<ContractAst, Failure> {
    let text = read(path)?;
    let ast = parse(&text).map_err(|e| Failure(INVALID, format!("{}:{e}", path.display())))?;
    let errors = validate(&ast);
    if let Some(first) = errors.first() {
        for e in &errors[1..] {
            eprintln!("{}:{}:{}: {e}", path.display(), e.span.line, e.span.column);
        }
        return Err(Failure(
            INVALID,
            format!("{}:{}:{}: {first}", path.display(), first.span.line, first.span.column),
        ));
    }
    Ok(ast)
}

fn emit_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
}

fn cmd_parse(file: &Path, json: bool) -> Outcome {
    let ast = load_contract(file)?;
    let canonical = print_canonical(&ast);
    if json {
        emit_json(json!({ "name": ast.name, "canonical": canonical }));
    } else {
        print!("{canonical}");
    }
    Ok(OK)
}

fn cmd_lint(file: &Path, json: bool) -> Outcome {
    let text = read(file)?;
    let ast = parse(&text).map_err(|e| Failure(INVALID, format!("{}:{e}", file.display())))?;
    let findings = lint(&ast);
    if json {
        emit_json(json!({ "file": file.display().to_string(), "findings": findings }));
    } else {
        let name = file.display().to_string();
        for f in &findings {
            println!("{}", f.to_text(&name));
        }
    }
    Ok(if findings.iter().any(|f| !f.is_note()) { FINDINGS } else { OK })
}

fn cmd_run(file: &Path, scenario: &Path, max_passes: usize, json: bool) -> Outcome {
    let ast = load_contract(file)?;
    let scn = parse_scenario(&read(scenario)?)
        .map_err(|e| Failure(INVALID, format!("{}:{e}", scenario.display())))?;
    match run_with_options(&ast, &scn, &RunOptions { max_passes }) {
        Ok(ledger) => {
            if json {
                emit_json(json!({ "ok": true, "ledger": ledger }));
            } else {
                print!("{}", ledger.to_machine());
            }
            Ok(OK)
        }
        Err(e) => {
            if json {
                emit_json(json!({ "ok": false, "error": e }));
            }
            Err(Failure(
                EVAL,
                format!("{}:{}:{}: {}", file.display(), e.span.line, e.span.column, e.to_machine().trim_end()),
            ))
        }
    }
}

fn fm_setup(opts: &FmOpts) -> Result<(TableScoreProvider, FmThresholds), Failure> {
    let table = TableScoreProvider::parse(&read(&opts.catalog)?)
        .map_err(|e| Failure(INVALID, format!("{}: {e}", opts.catalog.display())))?;
    let thresholds = FmThresholds::new(opts.sim_threshold, opts.impact_threshold.0)
        .map_err(|e| Failure(INVALID, e.to_string()))?;
    Ok((table, thresholds))
}

fn fm_failure(e: FmError) -> Failure {
    match e {
        FmError::MissingScores(_) => Failure(EVAL, e.to_string()),
        _ => Failure(INVALID, e.to_string()),
    }
}

fn cmd_fm_classify(opts: &FmOpts, event: &str, json: bool) -> Outcome {
    let (table, thresholds) = fm_setup(opts)?;
    let scores = table.score(event).map_err(fm_failure)?;
    let included = classify(&scores, &thresholds);
    let verdict = if included { "included" } else { "excluded" };
    if json {
        emit_json(json!({
            "event": scores.name,
            "similarity": scores.similarity,
            "impact": scores.impact,
            "result": verdict,
        }));
    } else {
        println!("{verdict}");
    }
    Ok(OK)
}

fn cmd_fm_filter(opts: &FmOpts, json: bool) -> Outcome {
    let (table, thresholds) = fm_setup(opts)?;
    let catalog = EventCatalog::from_table("catalog", &table);
    let included = filter_catalog(&catalog, &thresholds).map_err(fm_failure)?;
    if json {
        emit_json(json!({ "included": included }));
    } else {
        for name in &included {
            println!("{name}");
        }
    }
    Ok(OK)
}

fn corpus_failure(e: CorpusError) -> Failure {
    let code = match e {
        CorpusError::Io { .. } => IO,
        _ => INVALID,
    };
    Failure(code, e.to_string())
}

fn cmd_corpus_run(dir: &Path, report_path: Option<&Path>, json: bool) -> Outcome {
    let entries = corpus::load_corpus(dir).map_err(corpus_failure)?;
    let results = corpus::run_corpus(&entries);
    let report = corpus::build_report(&entries, &results);
    let text = if json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.to_text()
    };
    print!("{text}");
    if let Some(path) = report_path {
        write(path, &text)?;
    }
    for row in report.rows.iter().filter(|r| !r.agree || !r.ledgers_match || !r.lints_match) {
        eprintln!(
            "{}: alignment {} (expected {}), ledgers {}, lints {}",
            row.id,
            row.computed,
            row.expected,
            if row.ledgers_match { "match" } else { "differ" },
            if row.lints_match { "match" } else { "differ" },
        );
    }
    Ok(if report.is_clean() { OK } else { FINDINGS })
}

fn cmd_corpus_manifest(dir: &Path) -> Outcome {
    let entries = corpus::load_entries(dir).map_err(corpus_failure)?;
    corpus::write_manifest(dir, &entries)
        .map_err(|e| Failure(IO, format!("{}: {e}", dir.display())))?;
    Ok(OK)
}

fn cmd_corpus_bless(dir: &Path) -> Outcome {
    let entries = corpus::load_entries(dir).map_err(corpus_failure)?;
    for entry in &entries {
        corpus::bless_entry(entry).map_err(|e| Failure(IO, format!("{}: {e}", entry.id)))?;
    }
    let entries = corpus::load_entries(dir).map_err(corpus_failure)?;
    corpus::write_manifest(dir, &entries)
        .map_err(|e| Failure(IO, format!("{}: {e}", dir.display())))?;
    Ok(OK)
}
