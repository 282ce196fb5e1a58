//! Case encodings on disk: loading, running against golden ledgers, and the
//! alignment analysis.
//!
//! Layout: `<dir>/<id>/contract.lexc`, `<dir>/<id>/<n>.scn`,
//! `<dir>/<id>/expected/<n>.ledger`, `<dir>/<id>/meta.tsv`, plus
//! `<dir>/manifest.tsv` listing every entry file with its SHA-256.

mod manifest;
mod meta;
mod report;

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use manifest::{manifest_text, sha256_hex, write_manifest, MANIFEST_FILE};
pub use meta::{parse_meta, Alignment, Assertion, Meta, OppositeCause, Relation, Subject};
pub use report::{build_report, AlignmentReport, ReportRow, Tallies, REFERENCE_ROW};

use crate::eval::{format_value, run_with_options, serialize_money, EvalError, EvalErrorKind};
use crate::eval::{OutcomeLedger, RunOptions};
use crate::lint::{lint, Finding, LintCode};
use crate::model::validate::{validate, StructuralError};
use crate::model::ContractAst;
use crate::parser::{parse, parse_scenario, ParseError, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{id}: {message}")]
    Manifest { id: String, message: String },
    #[error("{}:{error}", path.display())]
    Parse { path: PathBuf, error: ParseError },
    #[error("{}: {error}", path.display())]
    Scenario { path: PathBuf, error: ScenarioError },
    #[error("{}:{line}: {message}", path.display())]
    Meta { path: PathBuf, line: usize, message: String },
    #[error("{id}: contract fails validation: {}", errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { id: String, errors: Vec<StructuralError> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug)]
pub struct ScenarioCase {
    pub number: u32,
    pub path: PathBuf,
    pub scenario: Scenario,
    /// Machine ledger or `ERROR ...` line; `None` before blessing.
    pub expected: Option<String>,
}

impl ScenarioCase {
    pub fn expected_path(&self, entry_dir: &Path) -> PathBuf {
        entry_dir.join("expected").join(format!("{}.ledger", self.number))
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub dir: PathBuf,
    pub contract_path: PathBuf,
    pub source: String,
    pub ast: ContractAst,
    pub scenarios: Vec<ScenarioCase>,
    pub title: String,
    pub citation: String,
    pub assertions: Vec<Assertion>,
    pub expected_alignment: Alignment,
    pub opposite_cause: Option<OppositeCause>,
    /// Codes of the non-note findings the linter must produce, as a set.
    pub expected_lints: BTreeSet<LintCode>,
    pub exclusive: Vec<(String, String)>,
}

impl CorpusEntry {
    /// Entry files relative to the corpus root, sorted.
    pub fn files(&self) -> Vec<String> {
        let mut files = vec![
            format!("{}/contract.lexc", self.id),
            format!("{}/meta.tsv", self.id),
        ];
        for case in &self.scenarios {
            files.push(format!("{}/{}.scn", self.id, case.number));
            if case.expected.is_some() {
                files.push(format!("{}/expected/{}.ledger", self.id, case.number));
            }
        }
        files.sort();
        files
    }
}

/// Loads every entry and checks the manifest.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let entries = load_entries(dir)?;
    for entry in &entries {
        if let Some(case) = entry.scenarios.iter().find(|c| c.expected.is_none()) {
            return Err(CorpusError::Manifest {
                id: entry.id.clone(),
                message: format!("missing expected/{}.ledger", case.number),
            });
        }
    }
    manifest::verify(dir, &entries)?;
    Ok(entries)
}

/// Loads entries without requiring expected ledgers or a manifest.
pub fn load_entries(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let listing = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut ids = Vec::new();
    for item in listing {
        let item = item.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        if item.path().is_dir() {
            ids.push(item.file_name().to_string_lossy().into_owned());
        }
    }
    ids.sort();
    ids.iter().map(|id| load_entry(dir, id)).collect()
}

pub fn load_entry(root: &Path, id: &str) -> Result<CorpusEntry, CorpusError> {
    let dir = root.join(id);
    let manifest_err = |message: String| CorpusError::Manifest {
        id: id.to_string(),
        message,
    };
    let contract_path = dir.join("contract.lexc");
    if !contract_path.is_file() {
        return Err(manifest_err("missing contract.lexc".into()));
    }
    let meta_path = dir.join("meta.tsv");
    if !meta_path.is_file() {
        return Err(manifest_err("missing meta.tsv".into()));
    }
    let source = read(&contract_path)?;
    let ast = parse(&source).map_err(|error| CorpusError::Parse {
        path: contract_path.clone(),
        error,
    })?;
    let errors = validate(&ast);
    if !errors.is_empty() {
        return Err(CorpusError::Invalid {
            id: id.to_string(),
            errors,
        });
    }
    let meta = parse_meta(&read(&meta_path)?).map_err(|(line, message)| CorpusError::Meta {
        path: meta_path.clone(),
        line,
        message,
    })?;

    let mut numbers = Vec::new();
    for item in fs::read_dir(&dir).map_err(|source| CorpusError::Io {
        path: dir.clone(),
        source,
    })? {
        let name = item
            .map_err(|source| CorpusError::Io {
                path: dir.clone(),
                source,
            })?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if let Some(stem) = name.strip_suffix(".scn") {
            let n = stem
                .parse::<u32>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| manifest_err(format!("scenario file `{name}` is not numbered")))?;
            numbers.push(n);
        }
    }
    numbers.sort_unstable();
    let mut scenarios = Vec::new();
    for number in numbers {
        let path = dir.join(format!("{number}.scn"));
        let scenario = parse_scenario(&read(&path)?).map_err(|error| CorpusError::Scenario {
            path: path.clone(),
            error,
        })?;
        let expected_path = dir.join("expected").join(format!("{number}.ledger"));
        let expected = if expected_path.is_file() {
            Some(read(&expected_path)?)
        } else {
            None
        };
        scenarios.push(ScenarioCase {
            number,
            path,
            scenario,
            expected,
        });
    }

    let alignment = meta
        .alignment
        .ok_or_else(|| manifest_err("meta.tsv has no alignment".into()))?;
    if alignment == Alignment::LintOnly && !scenarios.is_empty() {
        return Err(manifest_err("LintOnly entries take no scenarios".into()));
    }
    if alignment != Alignment::LintOnly && scenarios.is_empty() {
        return Err(manifest_err("no scenarios".into()));
    }
    if (alignment == Alignment::Opposite) != meta.cause.is_some() {
        return Err(manifest_err("a cause is given exactly for Opposite entries".into()));
    }
    for a in &meta.assertions {
        if !a.evaluable && a.reason.as_deref().is_none_or(str::is_empty) {
            return Err(manifest_err(format!("unevaluable {} has no reason", a.subject)));
        }
        if let Some(n) = a.scenario {
            if !scenarios.iter().any(|c| c.number == n) {
                return Err(manifest_err(format!("assertion refers to missing scenario {n}")));
            }
        }
    }

    Ok(CorpusEntry {
        id: id.to_string(),
        dir,
        contract_path,
        source,
        ast,
        scenarios,
        title: meta.title,
        citation: meta.citation,
        assertions: meta.assertions,
        expected_alignment: alignment,
        opposite_cause: meta.cause,
        expected_lints: meta.lints.into_iter().collect(),
        exclusive: meta.exclusive,
    })
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub number: u32,
    pub outcome: Result<OutcomeLedger, EvalError>,
    pub expected: Option<String>,
}

impl ScenarioResult {
    /// Machine ledger, or the `ERROR` line.
    pub fn actual_text(&self) -> String {
        match &self.outcome {
            Ok(ledger) => ledger.to_machine(),
            Err(e) => e.to_machine(),
        }
    }

    pub fn matches_expected(&self) -> bool {
        self.expected.as_deref() == Some(self.actual_text().as_str())
    }

    pub fn is_unbound(&self) -> bool {
        matches!(&self.outcome, Err(e) if e.kind == EvalErrorKind::UnboundInput)
    }
}

#[derive(Clone, Debug)]
pub struct EntryResult {
    pub id: String,
    pub scenarios: Vec<ScenarioResult>,
    pub findings: Vec<Finding>,
    pub computed_alignment: Alignment,
}

impl EntryResult {
    pub fn ledgers_match(&self) -> bool {
        self.scenarios.iter().all(ScenarioResult::matches_expected)
    }

    pub fn lint_codes(&self) -> BTreeSet<LintCode> {
        self.findings
            .iter()
            .filter(|f| !f.is_note())
            .map(|f| f.code)
            .collect()
    }
}

pub fn run_entry(entry: &CorpusEntry) -> EntryResult {
    let options = RunOptions::default();
    let scenarios: Vec<ScenarioResult> = entry
        .scenarios
        .iter()
        .map(|case| ScenarioResult {
            number: case.number,
            outcome: run_with_options(&entry.ast, &case.scenario, &options),
            expected: case.expected.clone(),
        })
        .collect();
    let computed_alignment = if entry.expected_alignment == Alignment::LintOnly {
        Alignment::LintOnly
    } else {
        classify_alignment(&scenarios, &entry.assertions, &entry.exclusive)
    };
    EntryResult {
        id: entry.id.clone(),
        scenarios,
        findings: lint(&entry.ast),
        computed_alignment,
    }
}

/// Entries run in parallel; results keep entry order.
pub fn run_corpus(entries: &[CorpusEntry]) -> Vec<EntryResult> {
    entries.par_iter().map(run_entry).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Contradicted,
    /// The scenario stopped on an unbound input.
    Indeterminate,
    Unevaluable,
}

/// Verdicts of one assertion over the scenarios it targets.
pub fn assertion_verdicts(
    actuals: &[ScenarioResult],
    assertion: &Assertion,
    exclusive: &[(String, String)],
) -> Vec<Verdict> {
    actuals
        .iter()
        .filter(|r| assertion.scenario.is_none_or(|n| n == r.number))
        .map(|r| {
            if !assertion.evaluable {
                Verdict::Unevaluable
            } else if r.is_unbound() {
                Verdict::Indeterminate
            } else {
                match &r.outcome {
                    Ok(ledger) if holds(ledger, assertion, exclusive) => Verdict::Satisfied,
                    _ => Verdict::Contradicted,
                }
            }
        })
        .collect()
}

fn holds(ledger: &OutcomeLedger, assertion: &Assertion, exclusive: &[(String, String)]) -> bool {
    let observed: Vec<String> = match &assertion.subject {
        Subject::Status(name) => ledger
            .status(name)
            .map(format_value)
            .or_else(|| exclusive_value(ledger, name, exclusive))
            .into_iter()
            .collect(),
        Subject::Payment { from, to } => ledger.payments(from, to).map(serialize_money).collect(),
        Subject::Termination => ledger.terminations().map(str::to_string).collect(),
    };
    match assertion.relation {
        Relation::Exists => !observed.is_empty(),
        Relation::Absent => observed.is_empty(),
        Relation::Equals => observed.iter().any(|v| Some(v) == assertion.expected.as_ref()),
    }
}

/// A missing boolean status read as the negation of its exclusive partner.
fn exclusive_value(ledger: &OutcomeLedger, name: &str, exclusive: &[(String, String)]) -> Option<String> {
    exclusive.iter().find_map(|(a, b)| {
        let partner = if a == name {
            b
        } else if b == name {
            a
        } else {
            return None;
        };
        match ledger.status(partner) {
            Some(crate::model::Value::Boolean(v)) => Some((!v).to_string()),
            _ => None,
        }
    })
}

/// Contradiction dominates; then anything unevaluable or unbound is partial.
pub fn classify_alignment(
    actuals: &[ScenarioResult],
    assertions: &[Assertion],
    exclusive: &[(String, String)],
) -> Alignment {
    let verdicts: Vec<Verdict> = assertions
        .iter()
        .flat_map(|a| assertion_verdicts(actuals, a, exclusive))
        .collect();
    if verdicts.contains(&Verdict::Contradicted) {
        Alignment::Opposite
    } else if verdicts.contains(&Verdict::Unevaluable) || actuals.iter().any(ScenarioResult::is_unbound) {
        Alignment::Partial
    } else {
        Alignment::Match
    }
}

/// Writes `expected/<n>.ledger` for every scenario from the current evaluator.
pub fn bless_entry(entry: &CorpusEntry) -> io::Result<()> {
    let result = run_entry(entry);
    let dir = entry.dir.join("expected");
    fs::create_dir_all(&dir)?;
    for case in &result.scenarios {
        fs::write(dir.join(format!("{}.ledger", case.number)), case.actual_text())?;
    }
    Ok(())
}
