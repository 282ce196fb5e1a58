//! Bounded rectification passes over the status store.

use std::collections::BTreeMap;

use super::{eval_expr, EvalError, EvalErrorKind, Environment};
use crate::model::ast::RectifyRule;
use crate::model::value::Value;

pub type StatusStore = BTreeMap<String, Value>;

/// A rule applies only when every status it mentions has been set.
fn applicable(rule: &RectifyRule, store: &StatusStore) -> bool {
    let mentioned = rule
        .guard
        .references()
        .into_iter()
        .map(|(n, _)| n)
        .chain(rule.body.iter().flat_map(|a| {
            std::iter::once(a.name.as_str()).chain(a.value.references().into_iter().map(|(n, _)| n))
        }));
    mentioned.into_iter().all(|n| store.contains_key(n))
}

fn env_of(store: &StatusStore) -> Environment {
    store.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn holds(rule: &RectifyRule, store: &StatusStore) -> Result<bool, EvalError> {
    if !applicable(rule, store) {
        return Ok(false);
    }
    match eval_expr(&rule.guard, &env_of(store))? {
        Value::Boolean(b) => Ok(b),
        other => Err(EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("rectify guard is {}", other.value_type()),
            rule.guard.span,
        )),
    }
}

/// Runs passes of `rules` in source order until no guard holds. Returns the
/// number of passes after which the store was stable; a guard still holding
/// after `max_passes` is a non-convergence error.
pub fn apply_rectification(
    store: &mut StatusStore,
    rules: &[RectifyRule],
    max_passes: usize,
) -> Result<usize, EvalError> {
    let max_passes = max_passes.max(1);
    for pass in 1..=max_passes {
        for rule in rules {
            if holds(rule, store)? {
                for a in &rule.body {
                    let value = eval_expr(&a.value, &env_of(store))?;
                    store.insert(a.name.clone(), value);
                }
            }
        }
        let mut still = None;
        for rule in rules {
            if holds(rule, store)? {
                still = Some(rule);
                break;
            }
        }
        match still {
            None => return Ok(pass),
            Some(rule) if pass == max_passes => {
                return Err(EvalError::new(
                    EvalErrorKind::StatusConflict,
                    "rectification did not converge",
                    rule.span,
                ))
            }
            Some(_) => {}
        }
    }
    unreachable!("loop returns on its last pass")
}
