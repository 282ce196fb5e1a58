//! Structural validation: unique names, resolved references, well-typed
//! expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::*;
use super::value::{Currency, Value, ValueType};
use crate::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StructuralErrorKind {
    DuplicateName,
    UnresolvedName,
    TypeMismatch,
    CurrencyMismatch,
    UndeclaredParty,
    UndeclaredStatus,
    InvalidDeadline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralError {
    pub kind: StructuralErrorKind,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {:?}: {}",
            self.span.line, self.span.column, self.kind, self.message
        )
    }
}

/// Type of an expression as far as it is known before evaluation. Money
/// carries its currency when a literal fixes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StaticType {
    pub ty: ValueType,
    pub currency: Option<Currency>,
}

impl StaticType {
    fn of(ty: ValueType) -> Self {
        StaticType { ty, currency: None }
    }
}

/// Returns every structural error in source order; empty means the contract
/// is valid.
pub fn validate(ast: &ContractAst) -> Vec<StructuralError> {
    let mut v = Validator {
        ast,
        errors: Vec::new(),
        statuses: BTreeMap::new(),
    };
    v.check_names();
    v.check_definitions();
    v.check_clauses();
    v.check_rectify();
    v.check_constraints();
    v.errors.sort_by_key(|e| e.span);
    v.errors
}

/// Static type of each status name, from the first clause that sets it.
pub fn status_types(ast: &ContractAst) -> BTreeMap<String, StaticType> {
    let mut v = Validator {
        ast,
        errors: Vec::new(),
        statuses: BTreeMap::new(),
    };
    v.check_clauses();
    v.statuses
}

#[derive(Clone, Copy)]
enum Scope {
    /// inputs and definitions
    Contract,
    /// status names, inside rectify rules
    Status,
}

struct Validator<'a> {
    ast: &'a ContractAst,
    errors: Vec<StructuralError>,
    statuses: BTreeMap<String, StaticType>,
}

impl<'a> Validator<'a> {
    fn push(&mut self, kind: StructuralErrorKind, span: Span, message: impl Into<String>) {
        self.errors.push(StructuralError {
            kind,
            message: message.into(),
            span,
        });
    }

    fn check_names(&mut self) {
        let ast = self.ast;
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let declared = ast
            .parties
            .iter()
            .map(|p| (p.name.as_str(), p.span))
            .chain(ast.inputs.iter().map(|i| (i.name.as_str(), i.span)))
            .chain(ast.definitions.iter().map(|d| (d.name.as_str(), d.span)))
            .chain(ast.event_catalogs.iter().map(|c| (c.name.as_str(), c.span)));
        for (name, span) in declared {
            if !seen.insert(name) {
                self.push(
                    StructuralErrorKind::DuplicateName,
                    span,
                    format!("`{name}` is declared more than once"),
                );
            }
        }
        let mut clause_names = BTreeSet::new();
        for c in &ast.clauses {
            if !clause_names.insert(c.name.as_str()) {
                self.push(
                    StructuralErrorKind::DuplicateName,
                    c.span,
                    format!("clause `{}` is declared more than once", c.name),
                );
            }
        }
        let mut rule_names = BTreeSet::new();
        for r in &ast.rectify_rules {
            if !rule_names.insert(r.name.as_str()) {
                self.push(
                    StructuralErrorKind::DuplicateName,
                    r.span,
                    format!("rectify rule `{}` is declared more than once", r.name),
                );
            }
        }
        for cat in &ast.event_catalogs {
            let mut events = BTreeSet::new();
            for e in &cat.events {
                if !events.insert(e.name.as_str()) {
                    self.push(
                        StructuralErrorKind::DuplicateName,
                        e.span,
                        format!("event \"{}\" is listed twice in `{}`", e.name, cat.name),
                    );
                }
            }
        }
    }

    fn check_definitions(&mut self) {
        for d in &self.ast.definitions {
            if let Some(t) = self.type_of(&d.expr, Scope::Contract) {
                if t.ty != d.ty {
                    self.push(
                        StructuralErrorKind::TypeMismatch,
                        d.expr.span,
                        format!("`{}` is declared {} but its expression is {}", d.name, d.ty, t.ty),
                    );
                }
            }
        }
    }

    fn check_clauses(&mut self) {
        for c in &self.ast.clauses {
            self.expect_type(&c.guard, Scope::Contract, ValueType::Boolean, "clause guard");
            for o in &c.outcomes {
                match &o.kind {
                    OutcomeKind::Pay { from, to, amount } => {
                        for party in [from, to] {
                            if !self.ast.has_party(party) {
                                self.push(
                                    StructuralErrorKind::UndeclaredParty,
                                    o.span,
                                    format!("party `{party}` is not declared"),
                                );
                            }
                        }
                        self.expect_type(amount, Scope::Contract, ValueType::Money, "payment amount");
                    }
                    OutcomeKind::SetStatus { name, value } => {
                        let Some(t) = self.type_of(value, Scope::Contract) else {
                            continue;
                        };
                        match self.statuses.get(name) {
                            None => {
                                self.statuses.insert(name.clone(), t);
                            }
                            Some(prev) if prev.ty != t.ty => {
                                let prev = prev.ty;
                                self.push(
                                    StructuralErrorKind::TypeMismatch,
                                    value.span,
                                    format!("status `{name}` was set as {prev} elsewhere, here as {}", t.ty),
                                );
                            }
                            Some(_) => {}
                        }
                    }
                    OutcomeKind::Terminate(_) | OutcomeKind::Notice(_) => {}
                }
            }
        }
    }

    fn check_rectify(&mut self) {
        for r in &self.ast.rectify_rules {
            self.expect_type(&r.guard, Scope::Status, ValueType::Boolean, "rectify guard");
            for a in &r.body {
                let Some(target) = self.statuses.get(&a.name).copied() else {
                    self.push(
                        StructuralErrorKind::UndeclaredStatus,
                        a.span,
                        format!("`{}` is not a status set by any clause", a.name),
                    );
                    continue;
                };
                if let Some(t) = self.type_of(&a.value, Scope::Status) {
                    if t.ty != target.ty {
                        self.push(
                            StructuralErrorKind::TypeMismatch,
                            a.value.span,
                            format!("status `{}` is {} but is assigned {}", a.name, target.ty, t.ty),
                        );
                    }
                }
            }
        }
    }

    fn check_constraints(&mut self) {
        for c in &self.ast.constraints {
            if c.deadline_days == Some(0) {
                self.push(
                    StructuralErrorKind::InvalidDeadline,
                    c.span,
                    "deadline must be at least one day",
                );
            }
            if let Some(party) = &c.overridable_by {
                if !self.ast.has_party(party) {
                    self.push(
                        StructuralErrorKind::UndeclaredParty,
                        c.span,
                        format!("party `{party}` is not declared"),
                    );
                }
            }
        }
    }

    fn expect_type(&mut self, expr: &Expr, scope: Scope, want: ValueType, what: &str) {
        if let Some(t) = self.type_of(expr, scope) {
            if t.ty != want {
                self.push(
                    StructuralErrorKind::TypeMismatch,
                    expr.span,
                    format!("{what} must be {want}, found {}", t.ty),
                );
            }
        }
    }

    /// `None` when an error was already reported for this subtree.
    fn type_of(&mut self, expr: &Expr, scope: Scope) -> Option<StaticType> {
        use ValueType::*;
        match &expr.kind {
            ExprKind::Literal(v) => Some(StaticType {
                ty: v.value_type(),
                currency: match v {
                    Value::Money(m) => Some(m.currency()),
                    _ => None,
                },
            }),
            ExprKind::Name(n) => self.resolve(n, expr.span, scope),
            ExprKind::Unary { op, operand } => {
                let t = self.type_of(operand, scope)?;
                let ok = match op {
                    UnaryOp::Not => t.ty == Boolean,
                    UnaryOp::Neg => matches!(t.ty, Number | Money),
                };
                if ok {
                    Some(t)
                } else {
                    let sym = if *op == UnaryOp::Not { "not" } else { "-" };
                    self.mismatch(expr.span, format!("`{sym}` cannot apply to {}", t.ty))
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.type_of(lhs, scope);
                let r = self.type_of(rhs, scope);
                let (l, r) = (l?, r?);
                match binary_type(*op, l, r) {
                    Ok(t) => Some(t),
                    Err(BinaryTypeError::Currency(a, b)) => {
                        self.push(
                            StructuralErrorKind::CurrencyMismatch,
                            expr.span,
                            format!("`{op}` mixes {a} and {b}"),
                        );
                        None
                    }
                    Err(BinaryTypeError::Types) => self.mismatch(
                        expr.span,
                        format!("`{op}` is not defined for {} and {}", l.ty, r.ty),
                    ),
                }
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expect_type(cond, scope, Boolean, "condition");
                let a = self.type_of(then_branch, scope);
                let b = self.type_of(else_branch, scope);
                let (a, b) = (a?, b?);
                if a.ty != b.ty {
                    return self.mismatch(
                        expr.span,
                        format!("branches have different types: {} and {}", a.ty, b.ty),
                    );
                }
                match merge_currency(a.currency, b.currency) {
                    Ok(currency) => Some(StaticType { ty: a.ty, currency }),
                    Err((x, y)) => {
                        self.push(
                            StructuralErrorKind::CurrencyMismatch,
                            expr.span,
                            format!("branches mix {x} and {y}"),
                        );
                        None
                    }
                }
            }
            ExprKind::Days { from, to } => {
                self.expect_type(from, scope, Date, "days() argument");
                self.expect_type(to, scope, Date, "days() argument");
                Some(StaticType::of(Number))
            }
            ExprKind::Compound {
                base,
                rate,
                periods,
            } => {
                self.expect_type(rate, scope, Percent, "compound() rate");
                self.expect_type(periods, scope, Number, "compound() periods");
                let b = self.type_of(base, scope)?;
                if matches!(b.ty, Money | Number | Percent) {
                    Some(b)
                } else {
                    self.mismatch(base.span, format!("compound() base cannot be {}", b.ty))
                }
            }
            ExprKind::InCatalog { event, catalog } => {
                self.expect_type(event, scope, Text, "event name");
                if self.ast.catalog(catalog).is_none() {
                    self.push(
                        StructuralErrorKind::UnresolvedName,
                        expr.span,
                        format!("event catalog `{catalog}` is not declared"),
                    );
                }
                Some(StaticType::of(Boolean))
            }
        }
    }

    fn mismatch(&mut self, span: Span, message: String) -> Option<StaticType> {
        self.push(StructuralErrorKind::TypeMismatch, span, message);
        None
    }

    fn resolve(&mut self, name: &str, span: Span, scope: Scope) -> Option<StaticType> {
        match scope {
            Scope::Contract => {
                if let Some(i) = self.ast.input(name) {
                    return Some(StaticType::of(i.ty));
                }
                if let Some(d) = self.ast.definition(name) {
                    return Some(StaticType::of(d.ty));
                }
                self.push(
                    StructuralErrorKind::UnresolvedName,
                    span,
                    format!("`{name}` is not a declared input or definition"),
                );
                None
            }
            Scope::Status => {
                if let Some(t) = self.statuses.get(name) {
                    return Some(*t);
                }
                self.push(
                    StructuralErrorKind::UndeclaredStatus,
                    span,
                    format!("`{name}` is not a status set by any clause"),
                );
                None
            }
        }
    }
}

enum BinaryTypeError {
    Types,
    Currency(Currency, Currency),
}

fn merge_currency(
    a: Option<Currency>,
    b: Option<Currency>,
) -> Result<Option<Currency>, (Currency, Currency)> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err((x, y)),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

/// The operator type rules shared by validation and evaluation.
fn binary_type(op: BinOp, l: StaticType, r: StaticType) -> Result<StaticType, BinaryTypeError> {
    use ValueType::*;
    let same_money = || {
        merge_currency(l.currency, r.currency)
            .map(|currency| StaticType { ty: Money, currency })
            .map_err(|(a, b)| BinaryTypeError::Currency(a, b))
    };
    let plain = |ty| Ok(StaticType::of(ty));
    let money_from = |t: StaticType| Ok(StaticType { ty: Money, currency: t.currency });
    match op {
        BinOp::Add | BinOp::Sub => match (l.ty, r.ty) {
            (Money, Money) => same_money(),
            (Number, Number) => plain(Number),
            (Percent, Percent) => plain(Percent),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::Mul => match (l.ty, r.ty) {
            (Money, Number | Percent) => money_from(l),
            (Number | Percent, Money) => money_from(r),
            (Percent, Number) | (Number, Percent) | (Percent, Percent) => plain(Percent),
            (Number, Number) => plain(Number),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::Div => match (l.ty, r.ty) {
            (Money, Number | Percent) => money_from(l),
            (Number, Number) | (Number, Percent) | (Percent, Percent) => plain(Number),
            (Percent, Number) => plain(Percent),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::Min | BinOp::Max => match (l.ty, r.ty) {
            (Money, Money) => same_money(),
            (a, b) if a == b && matches!(a, Number | Percent | Date) => plain(a),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (l.ty, r.ty) {
            (Money, Money) => same_money().map(|_| StaticType::of(Boolean)),
            (a, b) if a == b && matches!(a, Number | Percent | Date) => plain(Boolean),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::Eq | BinOp::Ne => match (l.ty, r.ty) {
            (Money, Money) => same_money().map(|_| StaticType::of(Boolean)),
            (a, b) if a == b => plain(Boolean),
            _ => Err(BinaryTypeError::Types),
        },
        BinOp::And | BinOp::Or => match (l.ty, r.ty) {
            (Boolean, Boolean) => plain(Boolean),
            _ => Err(BinaryTypeError::Types),
        },
    }
}

/// Result type of `op` applied to operand types, ignoring currency.
pub fn binary_result_type(op: BinOp, l: ValueType, r: ValueType) -> Option<ValueType> {
    binary_type(op, StaticType::of(l), StaticType::of(r))
        .ok()
        .map(|t| t.ty)
}
