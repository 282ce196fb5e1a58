//! Static detection of drafting anti-patterns.
//!
//! | code   | detects                                   | taxonomy |
//! |--------|-------------------------------------------|----------|
//! | LEX001 | catch-all `other` in an event catalog     | phrase   |
//! | LEX002 | circular definitions                      | extract  |
//! | LEX003 | rectification that may not terminate      | extract  |
//! | LEX004 | constraint a party may override           | phrase   |
//! | LEX005 | undeclared references and unused inputs   | absence  |
//! | LEX006 | clauses that can both fire and disagree   | extract  |

mod conflicts;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

pub use conflicts::{detect_conflicts, MAX_CONFLICT_VARIABLES};

use crate::eval::{eval_expr, Environment};
use crate::model::ast::*;
use crate::model::graph::dependency_graph;
use crate::model::value::Value;
use crate::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LintCode {
    Lex001,
    Lex002,
    Lex003,
    Lex004,
    Lex005,
    Lex006,
}

impl LintCode {
    pub const ALL: [LintCode; 6] = [
        LintCode::Lex001,
        LintCode::Lex002,
        LintCode::Lex003,
        LintCode::Lex004,
        LintCode::Lex005,
        LintCode::Lex006,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::Lex001 => "LEX001",
            LintCode::Lex002 => "LEX002",
            LintCode::Lex003 => "LEX003",
            LintCode::Lex004 => "LEX004",
            LintCode::Lex005 => "LEX005",
            LintCode::Lex006 => "LEX006",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == text)
    }

    pub fn default_severity(self) -> Severity {
        match self {
            LintCode::Lex004 => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn taxonomy(self) -> Taxonomy {
        match self {
            LintCode::Lex001 | LintCode::Lex004 => Taxonomy::PhraseAmbiguity,
            LintCode::Lex002 | LintCode::Lex003 | LintCode::Lex006 => Taxonomy::ExtractAmbiguity,
            LintCode::Lex005 => Taxonomy::AbsenceAmbiguity,
        }
    }
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for LintCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    /// A check that was skipped; never counts as a finding for exit codes.
    Note,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Taxonomy {
    PhraseAmbiguity,
    ExtractAmbiguity,
    AbsenceAmbiguity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub code: LintCode,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub taxonomy: Taxonomy,
    /// LEX006 only: the two clauses and an input assignment firing both.
    pub conflict: Option<Conflict>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub clauses: (String, String),
    pub statuses: Vec<String>,
    pub witness: Vec<(String, bool)>,
}

impl Finding {
    pub fn new(code: LintCode, span: Span, message: impl Into<String>) -> Self {
        Finding {
            code,
            severity: code.default_severity(),
            span,
            message: message.into(),
            taxonomy: code.taxonomy(),
            conflict: None,
        }
    }

    pub fn is_note(&self) -> bool {
        self.severity == Severity::Note
    }

    /// `LEXnnn file:line:col message`
    pub fn to_text(&self, file: &str) -> String {
        format!(
            "{} {}:{}:{} {}",
            self.code, file, self.span.line, self.span.column, self.message
        )
    }
}

#[derive(Serialize)]
struct FindingRepr<'a> {
    code: LintCode,
    severity: Severity,
    line: u32,
    column: u32,
    message: &'a str,
    taxonomy: Taxonomy,
}

impl Serialize for Finding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FindingRepr {
            code: self.code,
            severity: self.severity,
            line: self.span.line,
            column: self.span.column,
            message: &self.message,
            taxonomy: self.taxonomy,
        }
        .serialize(s)
    }
}

/// All detectors, ordered by span.
pub fn lint(ast: &ContractAst) -> Vec<Finding> {
    let mut out = Vec::new();
    out.extend(detect_catch_all(ast));
    out.extend(detect_cycles(ast));
    out.extend(detect_unbounded_rectification(ast));
    out.extend(detect_discretionary_override(ast));
    out.extend(detect_absence(ast));
    out.extend(detect_conflicts(ast));
    out.sort_by(|a, b| (a.span, a.code, &a.message).cmp(&(b.span, b.code, &b.message)));
    out
}

/// LEX001
pub fn detect_catch_all(ast: &ContractAst) -> Vec<Finding> {
    ast.event_catalogs
        .iter()
        .filter_map(|c| {
            c.wildcard.map(|span| {
                Finding::new(
                    LintCode::Lex001,
                    span,
                    format!("event catalog `{}` admits any event through `other`", c.name),
                )
            })
        })
        .collect()
}

/// LEX002
pub fn detect_cycles(ast: &ContractAst) -> Vec<Finding> {
    dependency_graph(ast)
        .cycles()
        .into_iter()
        .map(|members| {
            let span = ast.definition(&members[0]).map(|d| d.span).unwrap_or_default();
            Finding::new(
                LintCode::Lex002,
                span,
                format!("circular definitions: {}", members.join(", ")),
            )
        })
        .collect()
}

/// LEX003. A rule passes only if its body assigns a literal to every status
/// its guard reads and the guard is false under those literals. Anything
/// else is flagged, including guards that cannot be evaluated.
pub fn detect_unbounded_rectification(ast: &ContractAst) -> Vec<Finding> {
    let mut out = Vec::new();
    for rule in &ast.rectify_rules {
        let mut env = Environment::with_catalogs(ast);
        let mut missing = Vec::new();
        for (name, _) in rule.guard.references() {
            let assigned = rule.body.iter().rev().find(|a| a.name == name);
            match assigned.map(|a| &a.value.kind) {
                Some(ExprKind::Literal(v)) => env.bind(name, v.clone()),
                _ => missing.push(name),
            }
        }
        let message = if !missing.is_empty() {
            format!(
                "rectify `{}` never resets {} to a constant; the rule can fire again",
                rule.name,
                missing.iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(", ")
            )
        } else {
            match eval_expr(&rule.guard, &env) {
                Ok(Value::Boolean(false)) => continue,
                _ => format!(
                    "rectify `{}` leaves its own guard satisfiable after firing",
                    rule.name
                ),
            }
        };
        out.push(Finding::new(LintCode::Lex003, rule.span, message));
    }
    out
}

/// LEX004
pub fn detect_discretionary_override(ast: &ContractAst) -> Vec<Finding> {
    ast.constraints
        .iter()
        .filter_map(|c| {
            c.overridable_by.as_ref().map(|party| {
                Finding::new(
                    LintCode::Lex004,
                    c.span,
                    format!("constraint \"{}\" can be set aside by {party}", c.description),
                )
            })
        })
        .collect()
}

/// LEX005: names used without a declaration, and inputs nothing reads.
pub fn detect_absence(ast: &ContractAst) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut reported: BTreeSet<String> = BTreeSet::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut unresolved = |name: &str, span: Span, what: &str, out: &mut Vec<Finding>| {
        if reported.insert(name.to_string()) {
            out.push(Finding::new(
                LintCode::Lex005,
                span,
                format!("{what} `{name}` is referenced but never declared"),
            ));
        }
    };

    let contract_scope: Vec<&Expr> = {
        let mut v: Vec<&Expr> = ast.definitions.iter().map(|d| &d.expr).collect();
        for c in &ast.clauses {
            v.push(&c.guard);
            for o in &c.outcomes {
                match &o.kind {
                    OutcomeKind::Pay { amount, .. } => v.push(amount),
                    OutcomeKind::SetStatus { value, .. } => v.push(value),
                    _ => {}
                }
            }
        }
        v
    };
    for expr in &contract_scope {
        for (name, span) in expr.references() {
            used.insert(name);
            if ast.input(name).is_none() && ast.definition(name).is_none() {
                unresolved(name, span, "name", &mut out);
            }
        }
        for (catalog, span) in expr.catalog_references() {
            if ast.catalog(catalog).is_none() {
                unresolved(catalog, span, "event catalog", &mut out);
            }
        }
    }
    for c in &ast.clauses {
        for o in &c.outcomes {
            if let OutcomeKind::Pay { from, to, .. } = &o.kind {
                for party in [from, to] {
                    if !ast.has_party(party) {
                        unresolved(party, o.span, "party", &mut out);
                    }
                }
            }
        }
    }
    for c in &ast.constraints {
        if let Some(party) = &c.overridable_by {
            if !ast.has_party(party) {
                unresolved(party, c.span, "party", &mut out);
            }
        }
    }
    let statuses = ast.status_names();
    for r in &ast.rectify_rules {
        let exprs = std::iter::once(&r.guard).chain(r.body.iter().map(|a| &a.value));
        for expr in exprs {
            for (name, span) in expr.references() {
                if !statuses.contains(&name) {
                    unresolved(name, span, "status", &mut out);
                }
            }
        }
        for a in &r.body {
            if !statuses.contains(&a.name.as_str()) {
                unresolved(&a.name, a.span, "status", &mut out);
            }
        }
    }
    for input in &ast.inputs {
        if !used.contains(input.name.as_str()) {
            out.push(Finding::new(
                LintCode::Lex005,
                input.span,
                format!("input `{}` is declared but no term uses it", input.name),
            ));
        }
    }
    out
}
