//! Contract (`.lexc`) and scenario (`.scn`) text to syntax trees.
//!
//! The grammar is LL(1) apart from money literals, which need one token of
//! lookahead (`GBP 90`). Parsing stops at the first syntax error.

mod lexer;
mod scenario;

use std::fmt;

use num_traits::ToPrimitive;
use thiserror::Error;

pub use scenario::{parse_scenario, Binding, Scenario, ScenarioError};

use crate::model::ast::*;
use crate::model::validate::{validate, StructuralError};
use crate::model::value::{Currency, Money, Percent, Rational, Value, ValueType};
use crate::span::Span;
use lexer::{Lexer, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
    pub found: String,
}

pub const RESERVED: &[&str] = &[
    "contract", "party", "input", "let", "clause", "when", "then", "pay", "amount", "set",
    "terminate", "notice", "events", "other", "rectify", "constraint", "deadline", "days",
    "overridable", "by", "and", "or", "not", "if", "else", "true", "false", "min", "max",
    "compound", "in", "money", "number", "percent", "date", "boolean", "text",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Parses contract text. The result is syntactically well-formed but not yet
/// validated; see [`parse_checked`].
pub fn parse(text: &str) -> Result<ContractAst, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.contract()?;
    parser.expect_eof()?;
    Ok(ast)
}

/// Parses and validates, returning the structural errors alongside the tree.
pub fn parse_checked(text: &str) -> Result<(ContractAst, Vec<StructuralError>), ParseError> {
    let ast = parse(text)?;
    let errors = validate(&ast);
    Ok((ast, errors))
}

/// Parses a single expression (used by tooling and span tests).
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    parser.expect_eof()?;
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error(&self, expected: impl fmt::Display) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.span.line,
            column: t.span.column,
            expected: expected.to_string(),
            found: t.tok.describe(),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == kw)
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format_args!("`{kw}`")))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<Span> {
        if self.at_sym(sym) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format_args!("`{sym}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Ident(w) if !is_reserved(w) => {
                let w = w.clone();
                Ok((w, self.bump().span))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn expect_string(&mut self) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => Err(self.error("string literal")),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn expect_type(&mut self) -> PResult<ValueType> {
        if let Tok::Ident(w) = &self.peek().tok {
            if let Some(ty) = ValueType::from_keyword(w) {
                self.bump();
                return Ok(ty);
            }
        }
        Err(self.error("type (money, number, percent, date, boolean, text)"))
    }

    fn contract(&mut self) -> PResult<ContractAst> {
        let start = self.expect_keyword("contract")?;
        let (name, _) = self.expect_string()?;
        self.expect_sym("{")?;
        let mut ast = ContractAst::empty(name);
        while !self.at_sym("}") {
            self.declaration(&mut ast)?;
        }
        let end = self.expect_sym("}")?;
        ast.span = start.to(end);
        Ok(ast)
    }

    fn declaration(&mut self, ast: &mut ContractAst) -> PResult<()> {
        let start = self.peek().span;
        let keyword = match &self.peek().tok {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.error("declaration")),
        };
        match keyword.as_str() {
            "party" => {
                self.bump();
                let (name, _) = self.expect_ident()?;
                let end = self.expect_sym(";")?;
                ast.parties.push(Party {
                    name,
                    span: start.to(end),
                });
            }
            "input" => {
                self.bump();
                let (name, _) = self.expect_ident()?;
                self.expect_sym(":")?;
                let ty = self.expect_type()?;
                let end = self.expect_sym(";")?;
                ast.inputs.push(InputDecl {
                    name,
                    ty,
                    span: start.to(end),
                });
            }
            "let" => {
                self.bump();
                let (name, _) = self.expect_ident()?;
                self.expect_sym(":")?;
                let ty = self.expect_type()?;
                self.expect_sym("=")?;
                let expr = self.expr()?;
                let end = self.expect_sym(";")?;
                ast.definitions.push(Definition {
                    name,
                    ty,
                    expr,
                    span: start.to(end),
                });
            }
            "clause" => ast.clauses.push(self.clause()?),
            "events" => ast.event_catalogs.push(self.catalog()?),
            "rectify" => ast.rectify_rules.push(self.rectify()?),
            "constraint" => ast.constraints.push(self.constraint()?),
            _ => return Err(self.error("declaration")),
        }
        Ok(())
    }

    fn clause(&mut self) -> PResult<Clause> {
        let start = self.expect_keyword("clause")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("{")?;
        self.expect_keyword("when")?;
        let guard = self.expr()?;
        self.expect_keyword("then")?;
        let mut outcomes = vec![self.outcome()?];
        self.expect_sym(";")?;
        while !self.at_sym("}") {
            outcomes.push(self.outcome()?);
            self.expect_sym(";")?;
        }
        let end = self.expect_sym("}")?;
        Ok(Clause {
            name,
            guard,
            outcomes,
            span: start.to(end),
        })
    }

    fn outcome(&mut self) -> PResult<Outcome> {
        let start = self.peek().span;
        let kind = if self.eat_keyword("pay") {
            let (from, _) = self.expect_ident()?;
            self.expect_sym("->")?;
            let (to, _) = self.expect_ident()?;
            self.expect_keyword("amount")?;
            let amount = self.expr()?;
            OutcomeKind::Pay { from, to, amount }
        } else if self.eat_keyword("set") {
            let (name, _) = self.expect_ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            OutcomeKind::SetStatus { name, value }
        } else if self.eat_keyword("terminate") {
            OutcomeKind::Terminate(self.expect_string()?.0)
        } else if self.eat_keyword("notice") {
            OutcomeKind::Notice(self.expect_string()?.0)
        } else {
            return Err(self.error("outcome (pay, set, terminate, notice)"));
        };
        Ok(Outcome {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn catalog(&mut self) -> PResult<CatalogDecl> {
        let start = self.expect_keyword("events")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("{")?;
        let mut events = Vec::new();
        let mut wildcard = None;
        while !self.at_sym("}") {
            if wildcard.is_none() && self.at_keyword("other") {
                let span = self.bump().span;
                self.expect_sym(";")?;
                wildcard = Some(span);
                continue;
            }
            let (event, span) = self.expect_string()?;
            self.expect_sym(";")?;
            events.push(CatalogEvent { name: event, span });
        }
        let end = self.expect_sym("}")?;
        Ok(CatalogDecl {
            name,
            events,
            wildcard,
            span: start.to(end),
        })
    }

    fn rectify(&mut self) -> PResult<RectifyRule> {
        let start = self.expect_keyword("rectify")?;
        let (name, _) = self.expect_ident()?;
        self.expect_keyword("when")?;
        let guard = self.expr()?;
        self.expect_sym("{")?;
        let mut body = Vec::new();
        while !self.at_sym("}") {
            let set_span = self.expect_keyword("set")?;
            let (target, _) = self.expect_ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            let end = self.expect_sym(";")?;
            body.push(Assignment {
                name: target,
                value,
                span: set_span.to(end),
            });
        }
        let end = self.expect_sym("}")?;
        Ok(RectifyRule {
            name,
            guard,
            body,
            span: start.to(end),
        })
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        let start = self.expect_keyword("constraint")?;
        let (description, _) = self.expect_string()?;
        let mut deadline_days = None;
        if self.eat_keyword("deadline") {
            deadline_days = Some(match &self.peek().tok {
                Tok::Number {
                    value,
                    integer: true,
                } => {
                    let days = value
                        .to_integer()
                        .to_u64()
                        .ok_or_else(|| self.error("whole number of days"))?;
                    self.bump();
                    days
                }
                _ => return Err(self.error("whole number of days")),
            });
            self.expect_keyword("days")?;
        }
        let mut overridable_by = None;
        if self.eat_keyword("overridable") {
            self.expect_keyword("by")?;
            overridable_by = Some(self.expect_ident()?.0);
        }
        let end = self.expect_sym(";")?;
        Ok(Constraint {
            description,
            deadline_days,
            overridable_by,
            span: start.to(end),
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn binary_level(
        &mut self,
        next: fn(&mut Self) -> PResult<Expr>,
        ops: &[(&str, BinOp)],
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (text, op) in ops {
                let hit = match &self.peek().tok {
                    Tok::Sym(s) => s == text,
                    Tok::Ident(w) => w == text,
                    _ => false,
                };
                if hit {
                    self.bump();
                    let rhs = next(self)?;
                    let span = lhs.span.to(rhs.span);
                    lhs = Expr::new(
                        ExprKind::Binary {
                            op: *op,
                            lhs: Box::new(lhs),
                            rhs: Box::new(rhs),
                        },
                        span,
                    );
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binary_level(Self::and_expr, &[("or", BinOp::Or)])
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.binary_level(Self::not_expr, &[("and", BinOp::And)])
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.at_keyword("not") {
            let start = self.bump().span;
            let operand = self.not_expr()?;
            let span = start.to(operand.span);
            return Ok(Expr::new(
                ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                span,
            ));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        if self.at_keyword("in") {
            self.bump();
            let (catalog, end) = self.expect_ident()?;
            let span = lhs.span.to(end);
            return Ok(Expr::new(
                ExprKind::InCatalog {
                    event: Box::new(lhs),
                    catalog,
                },
                span,
            ));
        }
        let op = match &self.peek().tok {
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        let span = lhs.span.to(rhs.span);
        Ok(Expr::new(
            ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        ))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        self.binary_level(Self::mul_expr, &[("+", BinOp::Add), ("-", BinOp::Sub)])
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        self.binary_level(Self::unary_expr, &[("*", BinOp::Mul), ("/", BinOp::Div)])
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if self.at_sym("-") {
            let start = self.bump().span;
            let operand = self.unary_expr()?;
            let span = start.to(operand.span);
            return Ok(Expr::new(
                ExprKind::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                },
                span,
            ));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let token = self.peek().clone();
        let start = token.span;
        let lit = |v: Value| Ok(Expr::new(ExprKind::Literal(v), start));
        match token.tok {
            Tok::Number { value, .. } => {
                self.bump();
                lit(Value::Number(value))
            }
            Tok::Percent(points) => {
                self.bump();
                lit(Value::Percent(Percent::from_points(points).expect("literal is non-negative")))
            }
            Tok::Date(d) => {
                self.bump();
                lit(Value::Date(d))
            }
            Tok::Str(s) => {
                self.bump();
                lit(Value::Text(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let mut inner = self.expr()?;
                let end = self.expect_sym(")")?;
                inner.span = start.to(end);
                Ok(inner)
            }
            Tok::Ident(word) => self.word_primary(&word, start),
            _ => Err(self.error("expression")),
        }
    }

    fn word_primary(&mut self, word: &str, start: Span) -> PResult<Expr> {
        match word {
            "true" | "false" => {
                self.bump();
                Ok(Expr::new(ExprKind::Literal(Value::Boolean(word == "true")), start))
            }
            "if" => {
                self.bump();
                let cond = self.expr()?;
                self.expect_keyword("then")?;
                let then_branch = self.expr()?;
                self.expect_keyword("else")?;
                let else_branch = self.expr()?;
                let span = start.to(else_branch.span);
                Ok(Expr::new(
                    ExprKind::If {
                        cond: Box::new(cond),
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                    },
                    span,
                ))
            }
            "min" | "max" => {
                self.bump();
                let op = if word == "min" { BinOp::Min } else { BinOp::Max };
                let (mut args, end) = self.call_args(2)?;
                let rhs = args.pop().expect("two args");
                let lhs = args.pop().expect("two args");
                Ok(Expr::new(
                    ExprKind::Binary {
                        op,
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                    },
                    start.to(end),
                ))
            }
            "days" => {
                self.bump();
                let (mut args, end) = self.call_args(2)?;
                let to = args.pop().expect("two args");
                let from = args.pop().expect("two args");
                Ok(Expr::new(
                    ExprKind::Days {
                        from: Box::new(from),
                        to: Box::new(to),
                    },
                    start.to(end),
                ))
            }
            "compound" => {
                self.bump();
                let (mut args, end) = self.call_args(3)?;
                let periods = args.pop().expect("three args");
                let rate = args.pop().expect("three args");
                let base = args.pop().expect("three args");
                Ok(Expr::new(
                    ExprKind::Compound {
                        base: Box::new(base),
                        rate: Box::new(rate),
                        periods: Box::new(periods),
                    },
                    start.to(end),
                ))
            }
            _ if Currency::is_code(word)
                && matches!(self.peek_at(1).tok, Tok::Number { .. }) =>
            {
                self.bump();
                let amount_tok = self.bump();
                let Tok::Number { value, .. } = amount_tok.tok else {
                    unreachable!("checked by lookahead")
                };
                let currency = Currency::new(word).expect("checked by is_code");
                Ok(Expr::new(
                    ExprKind::Literal(Value::Money(Money::new(currency, value))),
                    start.to(amount_tok.span),
                ))
            }
            _ if is_reserved(word) => Err(self.error("expression")),
            _ => {
                self.bump();
                Ok(Expr::new(ExprKind::Name(word.to_string()), start))
            }
        }
    }

    fn call_args(&mut self, count: usize) -> PResult<(Vec<Expr>, Span)> {
        self.expect_sym("(")?;
        let mut args = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.expect_sym(",")?;
            }
            args.push(self.expr()?);
        }
        let end = self.expect_sym(")")?;
        Ok((args, end))
    }
}

/// Parses a literal in scenario position: optional leading `-` for numbers
/// and money.
pub(crate) fn literal_from_tokens(tokens: &[Token]) -> Result<(Value, usize), ParseError> {
    let err = |t: &Token, expected: &str| ParseError {
        line: t.span.line,
        column: t.span.column,
        expected: expected.to_string(),
        found: t.tok.describe(),
    };
    let (negative, rest) = match tokens.first().map(|t| &t.tok) {
        Some(Tok::Sym("-")) => (true, &tokens[1..]),
        _ => (false, tokens),
    };
    let first = rest.first().expect("token stream ends with Eof");
    let negate = |r: Rational| if negative { -r } else { r };
    let consumed = usize::from(negative);
    match &first.tok {
        Tok::Number { value, .. } => Ok((Value::Number(negate(value.clone())), consumed + 1)),
        Tok::Ident(code) if Currency::is_code(code) => match rest.get(1).map(|t| &t.tok) {
            Some(Tok::Number { value, .. }) => {
                let currency = Currency::new(code).expect("checked by is_code");
                Ok((
                    Value::Money(Money::new(currency, negate(value.clone()))),
                    consumed + 2,
                ))
            }
            _ => Err(err(rest.get(1).unwrap_or(first), "amount after currency code")),
        },
        _ if negative => Err(err(first, "number or money after `-`")),
        Tok::Percent(points) => Ok((
            Value::Percent(Percent::from_points(points.clone()).expect("non-negative")),
            1,
        )),
        Tok::Date(d) => Ok((Value::Date(*d), 1)),
        Tok::Str(s) => Ok((Value::Text(s.clone()), 1)),
        Tok::Ident(w) if w == "true" || w == "false" => Ok((Value::Boolean(w == "true"), 1)),
        _ => Err(err(first, "literal value")),
    }
}
