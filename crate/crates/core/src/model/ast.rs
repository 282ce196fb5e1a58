//! Abstract syntax of a contract.
//!
//! Every node carries the [`Span`] of the text it was parsed from. Structural
//! comparisons that should ignore source locations go through
//! [`ContractAst::without_spans`].

use std::fmt;

use super::value::{Value, ValueType};
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractAst {
    pub name: String,
    pub parties: Vec<Party>,
    pub inputs: Vec<InputDecl>,
    pub definitions: Vec<Definition>,
    pub clauses: Vec<Clause>,
    pub event_catalogs: Vec<CatalogDecl>,
    pub rectify_rules: Vec<RectifyRule>,
    pub constraints: Vec<Constraint>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub ty: ValueType,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub ty: ValueType,
    pub expr: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: String,
    pub guard: Expr,
    pub outcomes: Vec<Outcome>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Pay { from: String, to: String, amount: Expr },
    SetStatus { name: String, value: Expr },
    Terminate(String),
    Notice(String),
}

/// `events NAME { "A"; "B"; other; }`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogDecl {
    pub name: String,
    pub events: Vec<CatalogEvent>,
    /// Span of the `other` wildcard, if present.
    pub wildcard: Option<Span>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEvent {
    pub name: String,
    pub span: Span,
}

impl CatalogDecl {
    pub fn has_wildcard(&self) -> bool {
        self.wildcard.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectifyRule {
    pub name: String,
    pub guard: Expr,
    pub body: Vec<Assignment>,
    pub span: Span,
}

/// `set NAME = EXPR` inside a rectify body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub description: String,
    pub deadline_days: Option<u64>,
    pub overridable_by: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Literal(Value),
    Name(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    Days {
        from: Box<Expr>,
        to: Box<Expr>,
    },
    Compound {
        base: Box<Expr>,
        rate: Box<Expr>,
        periods: Box<Expr>,
    },
    /// `EVENT in CATALOG`
    InCatalog {
        event: Box<Expr>,
        catalog: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    /// Binding strength; `min`/`max` are call forms and bind like primaries.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
            BinOp::Min | BinOp::Max => 9,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Min => "min",
            BinOp::Max => "max",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn literal(value: Value) -> Self {
        Expr::new(ExprKind::Literal(value), Span::default())
    }

    pub fn name(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Name(name.into()), Span::default())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::new(
            ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            Span::default(),
        )
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Self {
        Expr::new(
            ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            Span::default(),
        )
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Name(_) => Vec::new(),
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => vec![cond, then_branch, else_branch],
            ExprKind::Days { from, to } => vec![from, to],
            ExprKind::Compound {
                base,
                rate,
                periods,
            } => vec![base, rate, periods],
            ExprKind::InCatalog { event, .. } => vec![event],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Literal(_) | ExprKind::Name(_) => Vec::new(),
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => vec![cond, then_branch, else_branch],
            ExprKind::Days { from, to } => vec![from, to],
            ExprKind::Compound {
                base,
                rate,
                periods,
            } => vec![base, rate, periods],
            ExprKind::InCatalog { event, .. } => vec![event],
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Referenced names in first-occurrence order, with the span of the first
    /// reference.
    pub fn references(&self) -> Vec<(&str, Span)> {
        let mut out: Vec<(&str, Span)> = Vec::new();
        self.visit(&mut |e| {
            if let ExprKind::Name(n) = &e.kind {
                if !out.iter().any(|(seen, _)| *seen == n.as_str()) {
                    out.push((n.as_str(), e.span));
                }
            }
        });
        out
    }

    pub fn catalog_references(&self) -> Vec<(&str, Span)> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ExprKind::InCatalog { catalog, .. } = &e.kind {
                out.push((catalog.as_str(), e.span));
            }
        });
        out
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Literal(_))
    }

    fn clear_spans(&mut self) {
        self.span = Span::default();
        for child in self.children_mut() {
            child.clear_spans();
        }
    }
}

impl ContractAst {
    pub fn empty(name: impl Into<String>) -> Self {
        ContractAst {
            name: name.into(),
            parties: Vec::new(),
            inputs: Vec::new(),
            definitions: Vec::new(),
            clauses: Vec::new(),
            event_catalogs: Vec::new(),
            rectify_rules: Vec::new(),
            constraints: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn input(&self, name: &str) -> Option<&InputDecl> {
        self.inputs.iter().find(|i| i.name == name)
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    pub fn catalog(&self, name: &str) -> Option<&CatalogDecl> {
        self.event_catalogs.iter().find(|c| c.name == name)
    }

    pub fn has_party(&self, name: &str) -> bool {
        self.parties.iter().any(|p| p.name == name)
    }

    /// Every expression in the contract, in source order of its owner:
    /// definitions, clause guards and outcomes, then rectify rules.
    pub fn expressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        for d in &self.definitions {
            out.push(&d.expr);
        }
        for c in &self.clauses {
            out.push(&c.guard);
            for o in &c.outcomes {
                match &o.kind {
                    OutcomeKind::Pay { amount, .. } => out.push(amount),
                    OutcomeKind::SetStatus { value, .. } => out.push(value),
                    _ => {}
                }
            }
        }
        for r in &self.rectify_rules {
            out.push(&r.guard);
            for a in &r.body {
                out.push(&a.value);
            }
        }
        out
    }

    /// Status names set by clause outcomes, in first-assignment order.
    pub fn status_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.clauses {
            for o in &c.outcomes {
                if let OutcomeKind::SetStatus { name, .. } = &o.kind {
                    if !out.contains(&name.as_str()) {
                        out.push(name);
                    }
                }
            }
        }
        out
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> ContractAst {
        let mut ast = self.clone();
        ast.span = Span::default();
        for p in &mut ast.parties {
            p.span = Span::default();
        }
        for i in &mut ast.inputs {
            i.span = Span::default();
        }
        for d in &mut ast.definitions {
            d.span = Span::default();
            d.expr.clear_spans();
        }
        for c in &mut ast.clauses {
            c.span = Span::default();
            c.guard.clear_spans();
            for o in &mut c.outcomes {
                o.span = Span::default();
                match &mut o.kind {
                    OutcomeKind::Pay { amount, .. } => amount.clear_spans(),
                    OutcomeKind::SetStatus { value, .. } => value.clear_spans(),
                    _ => {}
                }
            }
        }
        for cat in &mut ast.event_catalogs {
            cat.span = Span::default();
            if cat.wildcard.is_some() {
                cat.wildcard = Some(Span::default());
            }
            for e in &mut cat.events {
                e.span = Span::default();
            }
        }
        for r in &mut ast.rectify_rules {
            r.span = Span::default();
            r.guard.clear_spans();
            for a in &mut r.body {
                a.span = Span::default();
                a.value.clear_spans();
            }
        }
        for c in &mut ast.constraints {
            c.span = Span::default();
        }
        ast
    }
}

impl Expr {
    pub fn without_spans(&self) -> Expr {
        let mut e = self.clone();
        e.clear_spans();
        e
    }
}
