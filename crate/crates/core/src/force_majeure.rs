//! Force-majeure event catalogs: registered custom events, threshold
//! classification of scored events, and the notify/suspend/terminate flow.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::eval::{LedgerEntry, OutcomeLedger};
use crate::model::ast::CatalogDecl;
use crate::model::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FmError {
    #[error("no scores for event \"{0}\"")]
    MissingScores(String),
    #[error("event name is empty")]
    EmptyName,
    #[error("\"{0}\" is already a listed event")]
    AlreadyListed(String),
    #[error("threshold must be at least 1")]
    InvalidThreshold,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScoredEvent {
    pub name: String,
    /// 1 to 10
    pub similarity: u32,
    /// Stored as given; the shipped table runs above 10.
    pub impact: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmThresholds {
    pub similarity_min: u32,
    /// `None` ignores impact entirely.
    pub impact_min: Option<u32>,
}

impl Default for FmThresholds {
    fn default() -> Self {
        FmThresholds {
            similarity_min: 7,
            impact_min: Some(7),
        }
    }
}

impl FmThresholds {
    pub fn new(similarity_min: u32, impact_min: Option<u32>) -> Result<Self, FmError> {
        if similarity_min == 0 || impact_min == Some(0) {
            return Err(FmError::InvalidThreshold);
        }
        Ok(FmThresholds {
            similarity_min,
            impact_min,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmParams {
    pub max_duration_days: u64,
}

impl Default for FmParams {
    fn default() -> Self {
        FmParams {
            max_duration_days: 30,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventCatalog {
    pub name: String,
    pub listed: Vec<String>,
    pub has_wildcard: bool,
    registered_custom: BTreeSet<String>,
    scores: BTreeMap<String, ScoredEvent>,
}

impl EventCatalog {
    pub fn new(name: impl Into<String>, listed: Vec<String>) -> Self {
        let mut seen = BTreeSet::new();
        let listed = listed.into_iter().filter(|e| seen.insert(e.clone())).collect();
        EventCatalog {
            name: name.into(),
            listed,
            ..Default::default()
        }
    }

    pub fn from_decl(decl: &CatalogDecl) -> Self {
        let mut c = Self::new(&decl.name, decl.events.iter().map(|e| e.name.clone()).collect());
        c.has_wildcard = decl.has_wildcard();
        c
    }

    /// Every row of a score table becomes a listed, scored event.
    pub fn from_table(name: impl Into<String>, table: &TableScoreProvider) -> Self {
        let mut c = Self::new(name, table.rows.iter().map(|r| r.name.clone()).collect());
        for row in &table.rows {
            c.scores.insert(row.name.clone(), row.clone());
        }
        c
    }

    /// Attaches scores from `provider` for every listed event it knows.
    pub fn with_scores(mut self, provider: &dyn ScoreProvider) -> Self {
        for e in &self.listed {
            if let Ok(s) = provider.score(e) {
                self.scores.insert(e.clone(), s);
            }
        }
        self
    }

    pub fn set_score(&mut self, score: ScoredEvent) {
        self.scores.insert(score.name.clone(), score);
    }

    pub fn score(&self, event: &str) -> Option<&ScoredEvent> {
        self.scores.get(event)
    }

    pub fn is_listed(&self, event: &str) -> bool {
        self.listed.iter().any(|e| e == event)
    }

    pub fn registered(&self) -> impl Iterator<Item = &str> {
        self.registered_custom.iter().map(String::as_str)
    }

    pub fn recognizes(&self, event: &str) -> bool {
        self.is_listed(event) || self.registered_custom.contains(event)
    }
}

/// Inclusive on both thresholds.
pub fn classify(scores: &ScoredEvent, thresholds: &FmThresholds) -> bool {
    scores.similarity >= thresholds.similarity_min
        || thresholds.impact_min.is_some_and(|min| scores.impact >= min)
}

/// Listed events that classify as included, in listed order.
pub fn filter_catalog(
    catalog: &EventCatalog,
    thresholds: &FmThresholds,
) -> Result<Vec<String>, FmError> {
    let mut out = Vec::new();
    for e in &catalog.listed {
        let s = catalog
            .score(e)
            .ok_or_else(|| FmError::MissingScores(e.clone()))?;
        if classify(s, thresholds) {
            out.push(e.clone());
        }
    }
    Ok(out)
}

pub fn register_custom_event(catalog: &EventCatalog, name: &str) -> Result<EventCatalog, FmError> {
    if name.is_empty() {
        return Err(FmError::EmptyName);
    }
    if catalog.is_listed(name) {
        return Err(FmError::AlreadyListed(name.to_string()));
    }
    let mut next = catalog.clone();
    next.registered_custom.insert(name.to_string());
    Ok(next)
}

pub fn is_custom_event_registered(catalog: &EventCatalog, name: &str) -> bool {
    catalog.registered_custom.contains(name)
}

pub fn handle_event(
    affected: &str,
    other: &str,
    event: &str,
    duration_days: u64,
    catalog: &EventCatalog,
    params: &FmParams,
) -> OutcomeLedger {
    let mut ledger = OutcomeLedger::default();
    if !catalog.recognizes(event) {
        ledger
            .entries
            .push(LedgerEntry::Notice(format!("event not recognized: {event}")));
        return ledger;
    }
    ledger.entries.push(LedgerEntry::Notice(format!(
        "{affected} notifies {other} of {event} lasting {duration_days} days"
    )));
    ledger.entries.push(LedgerEntry::Status {
        name: "obligations_suspended".into(),
        value: Value::Boolean(true),
    });
    if duration_days > params.max_duration_days {
        ledger.entries.push(LedgerEntry::Termination(format!(
            "{affected} or {other} may terminate after {duration_days} days of force majeure"
        )));
    } else {
        ledger.entries.push(LedgerEntry::Status {
            name: "performance_resumed".into(),
            value: Value::Boolean(true),
        });
    }
    ledger
}

/// Source of (similarity, impact) scores.
pub trait ScoreProvider: Send + Sync {
    fn score(&self, event: &str) -> Result<ScoredEvent, FmError>;
}

/// Scores read from a `name<TAB>similarity<TAB>impact` table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableScoreProvider {
    rows: Vec<ScoredEvent>,
}

impl TableScoreProvider {
    pub fn parse(text: &str) -> Result<Self, FmError> {
        let mut rows: Vec<ScoredEvent> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| FmError::Parse { line, message };
            let content = raw.trim_end_matches('\r');
            if content.trim().is_empty() || content.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = content.split('\t').collect();
            let [name, sim, impact] = fields[..] else {
                return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(err("event name is empty".into()));
            }
            let number = |field: &str, what: &str| {
                field
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| err(format!("{what} `{}` is not a whole number", field.trim())))
            };
            let similarity = number(sim, "similarity")?;
            let impact = number(impact, "impact")?;
            if !(1..=10).contains(&similarity) {
                return Err(err(format!("similarity {similarity} is outside 1..10")));
            }
            if impact == 0 {
                return Err(err("impact must be at least 1".into()));
            }
            if rows.iter().any(|r| r.name == name) {
                return Err(err(format!("event \"{name}\" appears twice")));
            }
            rows.push(ScoredEvent {
                name: name.to_string(),
                similarity,
                impact,
            });
        }
        Ok(TableScoreProvider { rows })
    }

    pub fn from_file(path: &Path) -> std::io::Result<Result<Self, FmError>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn rows(&self) -> &[ScoredEvent] {
        &self.rows
    }
}

impl ScoreProvider for TableScoreProvider {
    fn score(&self, event: &str) -> Result<ScoredEvent, FmError> {
        self.rows
            .iter()
            .find(|r| r.name == event)
            .cloned()
            .ok_or_else(|| FmError::MissingScores(event.to_string()))
    }
}
