//! Canonical DSL text. Output re-parses to the same tree (spans aside) and
//! uses only the parentheses the grammar needs.

use std::fmt::Write;

use super::ast::*;
use super::value::{exact_decimal, format_number, Value};

pub fn print_canonical(ast: &ContractAst) -> String {
    let mut out = format!("contract {} {{", quote(&ast.name));
    let mut body = String::new();
    for p in &ast.parties {
        let _ = writeln!(body, "  party {};", p.name);
    }
    for i in &ast.inputs {
        let _ = writeln!(body, "  input {}: {};", i.name, i.ty);
    }
    for d in &ast.definitions {
        let _ = writeln!(body, "  let {}: {} = {};", d.name, d.ty, print_expr(&d.expr));
    }
    for c in &ast.event_catalogs {
        let _ = writeln!(body, "  events {} {{", c.name);
        for e in &c.events {
            let _ = writeln!(body, "    {};", quote(&e.name));
        }
        if c.wildcard.is_some() {
            body.push_str("    other;\n");
        }
        body.push_str("  }\n");
    }
    for c in &ast.clauses {
        let _ = writeln!(body, "  clause {} {{", c.name);
        let _ = writeln!(body, "    when {} then", print_expr(&c.guard));
        for o in &c.outcomes {
            let _ = writeln!(body, "      {};", print_outcome(o));
        }
        body.push_str("  }\n");
    }
    for r in &ast.rectify_rules {
        let _ = writeln!(body, "  rectify {} when {} {{", r.name, print_expr(&r.guard));
        for a in &r.body {
            let _ = writeln!(body, "    set {} = {};", a.name, print_expr(&a.value));
        }
        body.push_str("  }\n");
    }
    for c in &ast.constraints {
        let mut line = format!("  constraint {}", quote(&c.description));
        if let Some(days) = c.deadline_days {
            let _ = write!(line, " deadline {days} days");
        }
        if let Some(party) = &c.overridable_by {
            let _ = write!(line, " overridable by {party}");
        }
        line.push_str(";\n");
        body.push_str(&line);
    }
    if body.is_empty() {
        out.push_str(" }\n");
    } else {
        out.push('\n');
        out.push_str(&body);
        out.push_str("}\n");
    }
    out
}

fn print_outcome(o: &Outcome) -> String {
    match &o.kind {
        OutcomeKind::Pay { from, to, amount } => {
            format!("pay {from} -> {to} amount {}", print_expr(amount))
        }
        OutcomeKind::SetStatus { name, value } => format!("set {name} = {}", print_expr(value)),
        OutcomeKind::Terminate(reason) => format!("terminate {}", quote(reason)),
        OutcomeKind::Notice(text) => format!("notice {}", quote(text)),
    }
}

pub fn quote(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

/// DSL form of a literal value.
pub fn print_literal(value: &Value) -> String {
    match value {
        Value::Money(m) => format!("{} {}", m.currency(), format_number(m.amount())),
        Value::Number(n) => format_number(n),
        Value::Percent(p) => {
            let points = p.points();
            format!("{}%", exact_decimal(&points).unwrap_or_else(|| format_number(&points)))
        }
        Value::Date(d) => d.format("%Y-%m-%d").to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::Text(t) => quote(t),
    }
}

pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

const PRIMARY: u8 = 9;

fn precedence(expr: &Expr) -> u8 {
    match &expr.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { op: UnaryOp::Not, .. } => 3,
        ExprKind::Unary { op: UnaryOp::Neg, .. } => 7,
        ExprKind::InCatalog { .. } => 4,
        // `else` extends to the right as far as possible
        ExprKind::If { .. } => 0,
        _ => PRIMARY,
    }
}

fn write_expr(out: &mut String, expr: &Expr, min: u8) {
    let parens = precedence(expr) < min;
    if parens {
        out.push('(');
    }
    match &expr.kind {
        ExprKind::Literal(v) => out.push_str(&print_literal(v)),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Unary { op, operand } => match op {
            UnaryOp::Not => {
                out.push_str("not ");
                write_expr(out, operand, 3);
            }
            UnaryOp::Neg => {
                out.push('-');
                write_expr(out, operand, 7);
            }
        },
        ExprKind::Binary { op, lhs, rhs } => match op {
            BinOp::Min | BinOp::Max => {
                out.push_str(op.symbol());
                out.push('(');
                write_expr(out, lhs, 0);
                out.push_str(", ");
                write_expr(out, rhs, 0);
                out.push(')');
            }
            _ => {
                let p = op.precedence();
                let (l, r) = if op.is_comparison() { (5, 5) } else { (p, p + 1) };
                write_expr(out, lhs, l);
                let _ = write!(out, " {} ", op.symbol());
                write_expr(out, rhs, r);
            }
        },
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            out.push_str("if ");
            write_expr(out, cond, 0);
            out.push_str(" then ");
            write_expr(out, then_branch, 0);
            out.push_str(" else ");
            write_expr(out, else_branch, 0);
        }
        ExprKind::Days { from, to } => {
            out.push_str("days(");
            write_expr(out, from, 0);
            out.push_str(", ");
            write_expr(out, to, 0);
            out.push(')');
        }
        ExprKind::Compound {
            base,
            rate,
            periods,
        } => {
            out.push_str("compound(");
            write_expr(out, base, 0);
            out.push_str(", ");
            write_expr(out, rate, 0);
            out.push_str(", ");
            write_expr(out, periods, 0);
            out.push(')');
        }
        ExprKind::InCatalog { event, catalog } => {
            write_expr(out, event, 5);
            let _ = write!(out, " in {catalog}");
        }
    }
    if parens {
        out.push(')');
    }
}
