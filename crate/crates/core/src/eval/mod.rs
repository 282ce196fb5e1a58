//! Exact evaluation of contracts against scenarios.

mod ledger;
mod rectify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub use ledger::{format_value, serialize_money, LedgerEntry, OutcomeLedger};
pub use rectify::{apply_rectification, StatusStore};

use crate::model::ast::*;
use crate::model::graph::dependency_graph;
use crate::model::value::{Money, Percent, Rational, Value};
use crate::parser::Scenario;
use crate::span::Span;

/// Largest compounding exponent accepted.
pub const MAX_PERIODS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EvalErrorKind {
    UnboundInput,
    DivisionByZero,
    CyclicDefinition,
    CurrencyMismatch,
    StatusConflict,
    /// Negative elapsed periods where a count must be non-negative.
    NegativeDayCount,
    InputTypeMismatch,
    TypeMismatch,
    PeriodOverflow,
}

impl EvalErrorKind {
    pub const ALL: [EvalErrorKind; 9] = [
        EvalErrorKind::UnboundInput,
        EvalErrorKind::DivisionByZero,
        EvalErrorKind::CyclicDefinition,
        EvalErrorKind::CurrencyMismatch,
        EvalErrorKind::StatusConflict,
        EvalErrorKind::NegativeDayCount,
        EvalErrorKind::InputTypeMismatch,
        EvalErrorKind::TypeMismatch,
        EvalErrorKind::PeriodOverflow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvalErrorKind::UnboundInput => "UnboundInput",
            EvalErrorKind::DivisionByZero => "DivisionByZero",
            EvalErrorKind::CyclicDefinition => "CyclicDefinition",
            EvalErrorKind::CurrencyMismatch => "CurrencyMismatch",
            EvalErrorKind::StatusConflict => "StatusConflict",
            EvalErrorKind::NegativeDayCount => "NegativeDayCount",
            EvalErrorKind::InputTypeMismatch => "InputTypeMismatch",
            EvalErrorKind::TypeMismatch => "TypeMismatch",
            EvalErrorKind::PeriodOverflow => "PeriodOverflow",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// For `UnboundInput`, exactly the missing input's name.
    pub detail: String,
    pub span: Span,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, detail: impl Into<String>, span: Span) -> Self {
        EvalError {
            kind,
            detail: detail.into(),
            span,
        }
    }

    /// `ERROR <Kind> <detail>`, the expected-ledger form of an error.
    pub fn to_machine(&self) -> String {
        format!("ERROR {} {}\n", self.kind, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub max_passes: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_passes: 8 }
    }
}

/// Event set of one catalog as seen by `in`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatalogSet {
    pub events: BTreeSet<String>,
    pub wildcard: bool,
}

impl CatalogSet {
    /// A wildcard catalog admits every event.
    pub fn contains(&self, event: &str) -> bool {
        self.wildcard || self.events.contains(event)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Environment {
    pub values: BTreeMap<String, Value>,
    pub catalogs: BTreeMap<String, CatalogSet>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_catalogs(ast: &ContractAst) -> Self {
        let catalogs = ast
            .event_catalogs
            .iter()
            .map(|c| {
                let set = CatalogSet {
                    events: c.events.iter().map(|e| e.name.clone()).collect(),
                    wildcard: c.has_wildcard(),
                };
                (c.name.clone(), set)
            })
            .collect();
        Environment {
            values: BTreeMap::new(),
            catalogs,
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }
}

impl FromIterator<(String, Value)> for Environment {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Environment {
            values: iter.into_iter().collect(),
            catalogs: BTreeMap::new(),
        }
    }
}

/// Calendar days from `d1` to `d2`; negative when `d2` is earlier.
pub fn day_count(d1: NaiveDate, d2: NaiveDate) -> i64 {
    (d2 - d1).num_days()
}

pub fn run(ast: &ContractAst, scenario: &Scenario) -> Result<OutcomeLedger, EvalError> {
    run_with_options(ast, scenario, &RunOptions::default())
}

pub fn run_with_options(
    ast: &ContractAst,
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<OutcomeLedger, EvalError> {
    let mut env = Environment::with_catalogs(ast);
    for input in &ast.inputs {
        let Some(value) = scenario.get(&input.name) else {
            return Err(EvalError::new(EvalErrorKind::UnboundInput, &input.name, input.span));
        };
        if value.value_type() != input.ty {
            return Err(EvalError::new(
                EvalErrorKind::InputTypeMismatch,
                format!("{} expects {}, scenario gives {}", input.name, input.ty, value.value_type()),
                input.span,
            ));
        }
        env.bind(&input.name, value.clone());
    }

    let order = dependency_graph(ast).evaluation_order().map_err(|cycle| {
        let span = ast.definition(&cycle[0]).map(|d| d.span).unwrap_or_default();
        EvalError::new(EvalErrorKind::CyclicDefinition, cycle.join(", "), span)
    })?;
    for name in order {
        let def = ast.definition(&name).expect("graph nodes come from definitions");
        let value = eval_expr(&def.expr, &env)?;
        env.bind(name, value);
    }

    let mut ledger = OutcomeLedger::default();
    let mut store = StatusStore::new();
    for clause in &ast.clauses {
        if !eval_bool(&clause.guard, &env)? {
            continue;
        }
        ledger.fired_clauses.push(clause.name.clone());
        for outcome in &clause.outcomes {
            match &outcome.kind {
                OutcomeKind::Pay { from, to, amount } => {
                    let amount = match eval_expr(amount, &env)? {
                        Value::Money(m) => m,
                        other => return Err(type_error("money", &other, amount.span)),
                    };
                    ledger.entries.push(LedgerEntry::Payment {
                        from: from.clone(),
                        to: to.clone(),
                        amount,
                    });
                }
                OutcomeKind::SetStatus { name, value } => {
                    let value = eval_expr(value, &env)?;
                    match store.get(name) {
                        Some(prev) if *prev == value => {}
                        Some(prev) => {
                            return Err(EvalError::new(
                                EvalErrorKind::StatusConflict,
                                format!(
                                    "{name} already set to {}, clause {} sets {}",
                                    format_value(prev),
                                    clause.name,
                                    format_value(&value)
                                ),
                                outcome.span,
                            ))
                        }
                        None => {
                            store.insert(name.clone(), value.clone());
                            ledger.entries.push(LedgerEntry::Status {
                                name: name.clone(),
                                value,
                            });
                        }
                    }
                }
                OutcomeKind::Terminate(reason) => {
                    ledger.entries.push(LedgerEntry::Termination(reason.clone()))
                }
                OutcomeKind::Notice(text) => ledger.entries.push(LedgerEntry::Notice(text.clone())),
            }
        }
    }

    if !ast.rectify_rules.is_empty() {
        ledger.rectification_passes =
            apply_rectification(&mut store, &ast.rectify_rules, options.max_passes)?;
        for entry in &mut ledger.entries {
            if let LedgerEntry::Status { name, value } = entry {
                *value = store[name.as_str()].clone();
            }
        }
    }
    Ok(ledger)
}

fn type_error(expected: &str, found: &Value, span: Span) -> EvalError {
    EvalError::new(
        EvalErrorKind::TypeMismatch,
        format!("expected {expected}, found {}", found.value_type()),
        span,
    )
}

fn eval_bool(expr: &Expr, env: &Environment) -> Result<bool, EvalError> {
    match eval_expr(expr, env)? {
        Value::Boolean(b) => Ok(b),
        other => Err(type_error("boolean", &other, expr.span)),
    }
}

fn eval_number(expr: &Expr, env: &Environment) -> Result<Rational, EvalError> {
    match eval_expr(expr, env)? {
        Value::Number(n) => Ok(n),
        other => Err(type_error("number", &other, expr.span)),
    }
}

fn eval_date(expr: &Expr, env: &Environment) -> Result<NaiveDate, EvalError> {
    match eval_expr(expr, env)? {
        Value::Date(d) => Ok(d),
        other => Err(type_error("date", &other, expr.span)),
    }
}

pub fn eval_expr(expr: &Expr, env: &Environment) -> Result<Value, EvalError> {
    let span = expr.span;
    match &expr.kind {
        ExprKind::Literal(v) => Ok(v.clone()),
        ExprKind::Name(n) => env
            .get(n)
            .cloned()
            .ok_or_else(|| EvalError::new(EvalErrorKind::UnboundInput, n, span)),
        ExprKind::Unary { op, operand } => {
            let v = eval_expr(operand, env)?;
            match (op, v) {
                (UnaryOp::Not, Value::Boolean(b)) => Ok(Value::Boolean(!b)),
                (UnaryOp::Neg, Value::Number(n)) => Ok(Value::Number(-n)),
                (UnaryOp::Neg, Value::Money(m)) => {
                    Ok(Value::Money(Money::new(m.currency(), -m.into_amount())))
                }
                (_, v) => Err(type_error("operand of matching type", &v, span)),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => match op {
            BinOp::And => Ok(Value::Boolean(eval_bool(lhs, env)? && eval_bool(rhs, env)?)),
            BinOp::Or => Ok(Value::Boolean(eval_bool(lhs, env)? || eval_bool(rhs, env)?)),
            _ => {
                let l = eval_expr(lhs, env)?;
                let r = eval_expr(rhs, env)?;
                binary(*op, l, r, span)
            }
        },
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            if eval_bool(cond, env)? {
                eval_expr(then_branch, env)
            } else {
                eval_expr(else_branch, env)
            }
        }
        ExprKind::Days { from, to } => {
            let days = day_count(eval_date(from, env)?, eval_date(to, env)?);
            Ok(Value::integer(days))
        }
        ExprKind::Compound {
            base,
            rate,
            periods,
        } => {
            let base_value = eval_expr(base, env)?;
            let rate = match eval_expr(rate, env)? {
                Value::Percent(p) => p,
                other => return Err(type_error("percent", &other, span)),
            };
            let periods = eval_number(periods, env)?.floor();
            if periods.is_negative() {
                return Err(EvalError::new(
                    EvalErrorKind::NegativeDayCount,
                    format!("compound periods {} is negative", periods.to_integer()),
                    span,
                ));
            }
            let n = periods
                .to_integer()
                .to_u64()
                .filter(|n| *n <= MAX_PERIODS)
                .ok_or_else(|| {
                    EvalError::new(
                        EvalErrorKind::PeriodOverflow,
                        format!("compound periods exceed {MAX_PERIODS}"),
                        span,
                    )
                })?;
            let factor = num_traits::pow(Rational::one() + rate.fraction(), n as usize);
            match base_value {
                Value::Money(m) => Ok(Value::Money(Money::new(m.currency(), m.into_amount() * factor))),
                Value::Number(x) => Ok(Value::Number(x * factor)),
                Value::Percent(p) => Ok(Value::Percent(Percent::from_fraction_unchecked(
                    p.fraction() * factor,
                ))),
                other => Err(type_error("money, number or percent", &other, base.span)),
            }
        }
        ExprKind::InCatalog { event, catalog } => {
            let event = match eval_expr(event, env)? {
                Value::Text(t) => t,
                other => return Err(type_error("text", &other, span)),
            };
            let set = env.catalogs.get(catalog).ok_or_else(|| {
                EvalError::new(EvalErrorKind::TypeMismatch, format!("unknown catalog {catalog}"), span)
            })?;
            Ok(Value::Boolean(set.contains(&event)))
        }
    }
}

fn same_currency(a: &Money, b: &Money, op: BinOp, span: Span) -> Result<(), EvalError> {
    if a.currency() == b.currency() {
        Ok(())
    } else {
        Err(EvalError::new(
            EvalErrorKind::CurrencyMismatch,
            format!("{} {op} {}", a.currency(), b.currency()),
            span,
        ))
    }
}

fn non_zero(divisor: &Rational, span: Span) -> Result<(), EvalError> {
    if divisor.is_zero() {
        Err(EvalError::new(EvalErrorKind::DivisionByZero, "divisor is zero", span))
    } else {
        Ok(())
    }
}

fn percent(fraction: Rational, span: Span) -> Result<Value, EvalError> {
    Percent::from_fraction(fraction)
        .map(Value::Percent)
        .map_err(|_| EvalError::new(EvalErrorKind::TypeMismatch, "percent would be negative", span))
}

fn ordering(l: &Value, r: &Value, op: BinOp, span: Span) -> Result<std::cmp::Ordering, EvalError> {
    match (l, r) {
        (Value::Money(a), Value::Money(b)) => {
            same_currency(a, b, op, span)?;
            Ok(a.amount().cmp(b.amount()))
        }
        (Value::Number(a), Value::Number(b)) => Ok(a.cmp(b)),
        (Value::Percent(a), Value::Percent(b)) => Ok(a.fraction().cmp(b.fraction())),
        (Value::Date(a), Value::Date(b)) => Ok(a.cmp(b)),
        _ => Err(mismatch(op, l, r, span)),
    }
}

fn mismatch(op: BinOp, l: &Value, r: &Value, span: Span) -> EvalError {
    EvalError::new(
        EvalErrorKind::TypeMismatch,
        format!("`{op}` is not defined for {} and {}", l.value_type(), r.value_type()),
        span,
    )
}

fn binary(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, EvalError> {
    use Value::*;
    match op {
        BinOp::Add | BinOp::Sub => {
            let sub = op == BinOp::Sub;
            let combine = |a: &Rational, b: &Rational| if sub { a - b } else { a + b };
            match (&l, &r) {
                (Money(a), Money(b)) => {
                    same_currency(a, b, op, span)?;
                    Ok(Money(crate::model::value::Money::new(
                        a.currency(),
                        combine(a.amount(), b.amount()),
                    )))
                }
                (Number(a), Number(b)) => Ok(Number(combine(a, b))),
                (Percent(a), Percent(b)) => percent(combine(a.fraction(), b.fraction()), span),
                _ => Err(mismatch(op, &l, &r, span)),
            }
        }
        BinOp::Mul => match (&l, &r) {
            (Money(m), Number(n)) | (Number(n), Money(m)) => {
                Ok(Money(crate::model::value::Money::new(m.currency(), m.amount() * n)))
            }
            (Money(m), Percent(p)) | (Percent(p), Money(m)) => Ok(Money(
                crate::model::value::Money::new(m.currency(), m.amount() * p.fraction()),
            )),
            (Percent(p), Number(n)) | (Number(n), Percent(p)) => percent(p.fraction() * n, span),
            (Percent(a), Percent(b)) => percent(a.fraction() * b.fraction(), span),
            (Number(a), Number(b)) => Ok(Number(a * b)),
            _ => Err(mismatch(op, &l, &r, span)),
        },
        BinOp::Div => {
            let divisor = match &r {
                Number(n) => n.clone(),
                Percent(p) => p.fraction().clone(),
                _ => return Err(mismatch(op, &l, &r, span)),
            };
            match &l {
                Money(_) | Number(_) | Percent(_) => non_zero(&divisor, span)?,
                _ => return Err(mismatch(op, &l, &r, span)),
            }
            match (&l, &r) {
                (Money(m), _) => Ok(Money(crate::model::value::Money::new(
                    m.currency(),
                    m.amount() / divisor,
                ))),
                (Number(n), _) => Ok(Number(n / divisor)),
                (Percent(p), Number(_)) => percent(p.fraction() / divisor, span),
                (Percent(p), Percent(_)) => Ok(Number(p.fraction() / divisor)),
                _ => Err(mismatch(op, &l, &r, span)),
            }
        }
        BinOp::Min | BinOp::Max => {
            let ord = ordering(&l, &r, op, span)?;
            let take_left = if op == BinOp::Min { ord.is_le() } else { ord.is_ge() };
            Ok(if take_left { l } else { r })
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = ordering(&l, &r, op, span)?;
            Ok(Boolean(match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Le => ord.is_le(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        BinOp::Eq | BinOp::Ne => {
            let equal = match (&l, &r) {
                (Money(a), Money(b)) => {
                    same_currency(a, b, op, span)?;
                    a.amount() == b.amount()
                }
                _ if l.value_type() == r.value_type() => l == r,
                _ => return Err(mismatch(op, &l, &r, span)),
            };
            Ok(Boolean(equal == (op == BinOp::Eq)))
        }
        BinOp::And | BinOp::Or => match (&l, &r) {
            (Boolean(a), Boolean(b)) => Ok(Boolean(if op == BinOp::And { *a && *b } else { *a || *b })),
            _ => Err(mismatch(op, &l, &r, span)),
        },
    }
}

/// Integer helper for callers building rationals.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
