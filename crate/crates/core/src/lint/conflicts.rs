//! LEX006: pairs of clauses that set one status to different constants and
//! can both fire. Decided by enumerating the boolean inputs the two guards
//! read, after inlining boolean definitions.

use std::collections::BTreeMap;

use super::{Conflict, Finding, LintCode, Severity};
use crate::eval::{eval_expr, Environment};
use crate::model::ast::*;
use crate::model::value::{Value, ValueType};

/// Pairs reading more boolean inputs than this are skipped with a note.
pub const MAX_CONFLICT_VARIABLES: usize = 20;

fn literal_sets(clause: &Clause) -> BTreeMap<&str, &Value> {
    let mut out = BTreeMap::new();
    for o in &clause.outcomes {
        if let OutcomeKind::SetStatus { name, value } = &o.kind {
            if let ExprKind::Literal(v) = &value.kind {
                out.insert(name.as_str(), v);
            }
        }
    }
    out
}

/// Inlines boolean definitions. Names on a definition cycle stay as names.
fn expand(expr: &Expr, ast: &ContractAst, stack: &mut Vec<String>) -> Expr {
    if let ExprKind::Name(n) = &expr.kind {
        if let Some(def) = ast.definition(n) {
            if def.ty == ValueType::Boolean && !stack.contains(n) {
                stack.push(n.clone());
                let inner = expand(&def.expr, ast, stack);
                stack.pop();
                return inner;
            }
        }
        return expr.clone();
    }
    let mut out = expr.clone();
    let rebuild = |e: &Expr, stack: &mut Vec<String>| Box::new(expand(e, ast, stack));
    match &mut out.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) => {}
        ExprKind::Unary { operand, .. } => *operand = rebuild(operand, stack),
        ExprKind::Binary { lhs, rhs, .. } => {
            *lhs = rebuild(lhs, stack);
            *rhs = rebuild(rhs, stack);
        }
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            *cond = rebuild(cond, stack);
            *then_branch = rebuild(then_branch, stack);
            *else_branch = rebuild(else_branch, stack);
        }
        ExprKind::Days { from, to } => {
            *from = rebuild(from, stack);
            *to = rebuild(to, stack);
        }
        ExprKind::Compound {
            base,
            rate,
            periods,
        } => {
            *base = rebuild(base, stack);
            *rate = rebuild(rate, stack);
            *periods = rebuild(periods, stack);
        }
        ExprKind::InCatalog { event, .. } => *event = rebuild(event, stack),
    }
    out
}

fn holds(guard: &Expr, env: &Environment) -> bool {
    matches!(eval_expr(guard, env), Ok(Value::Boolean(true)))
}

pub fn detect_conflicts(ast: &ContractAst) -> Vec<Finding> {
    let sets: Vec<_> = ast.clauses.iter().map(literal_sets).collect();
    let mut out = Vec::new();
    for (i, a) in ast.clauses.iter().enumerate() {
        for (j, b) in ast.clauses.iter().enumerate().skip(i + 1) {
            let statuses: Vec<String> = sets[i]
                .iter()
                .filter(|(name, v)| sets[j].get(*name).is_some_and(|w| w != *v))
                .map(|(name, _)| name.to_string())
                .collect();
            if statuses.is_empty() {
                continue;
            }
            if let Some(f) = check_pair(ast, a, b, statuses) {
                out.push(f);
            }
        }
    }
    out
}

fn check_pair(ast: &ContractAst, a: &Clause, b: &Clause, statuses: Vec<String>) -> Option<Finding> {
    let ga = expand(&a.guard, ast, &mut Vec::new());
    let gb = expand(&b.guard, ast, &mut Vec::new());
    let mut vars: Vec<String> = Vec::new();
    let mut non_boolean: Vec<String> = Vec::new();
    for (name, _) in ga.references().into_iter().chain(gb.references()) {
        let name = name.to_string();
        if vars.contains(&name) || non_boolean.contains(&name) {
            continue;
        }
        match ast.input(&name) {
            Some(i) if i.ty == ValueType::Boolean => vars.push(name),
            _ => non_boolean.push(name),
        }
    }
    let pair = format!("clauses `{}` and `{}` set {}", a.name, b.name, status_list(&statuses));
    let skip = |why: String| {
        let mut f = Finding::new(LintCode::Lex006, b.span, format!("{pair} differently; {why}"));
        f.severity = Severity::Note;
        Some(f)
    };
    if !non_boolean.is_empty() {
        return skip(format!(
            "not checked because the guards read non-boolean {}",
            non_boolean.iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(", ")
        ));
    }
    if vars.len() > MAX_CONFLICT_VARIABLES {
        return skip(format!(
            "not checked because the guards read {} boolean inputs (limit {MAX_CONFLICT_VARIABLES})",
            vars.len()
        ));
    }
    let n = vars.len();
    let base = Environment::with_catalogs(ast);
    for mask in 0u64..(1u64 << n) {
        let mut env = base.clone();
        let witness: Vec<(String, bool)> = vars
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), mask >> (n - 1 - k) & 1 == 1))
            .collect();
        for (v, value) in &witness {
            env.bind(v.clone(), Value::Boolean(*value));
        }
        if holds(&ga, &env) && holds(&gb, &env) {
            let shown = if witness.is_empty() {
                "unconditionally".to_string()
            } else {
                format!(
                    "when {}",
                    witness
                        .iter()
                        .map(|(v, b)| format!("{v}={b}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            let mut f = Finding::new(
                LintCode::Lex006,
                b.span,
                format!("{pair} to conflicting values and both fire {shown}"),
            );
            f.conflict = Some(Conflict {
                clauses: (a.name.clone(), b.name.clone()),
                statuses,
                witness,
            });
            return Some(f);
        }
    }
    None
}

fn status_list(statuses: &[String]) -> String {
    statuses
        .iter()
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(", ")
}
