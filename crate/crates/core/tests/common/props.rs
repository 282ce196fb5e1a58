//! Property bodies shared by the suites and the acceptance run.

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::*;
use lexc_core::corpus::load_corpus;
use lexc_core::eval::{eval_expr, run, Environment, EvalErrorKind};
use lexc_core::lint::{detect_conflicts, detect_cycles, LintCode};
use lexc_core::model::{dependency_graph, print_canonical};
use lexc_core::parser::Scenario;
use lexc_core::parse;

// ---- arithmetic trees ----

#[derive(Clone, Debug)]
pub enum Arith {
    Lit(i64, u32),
    Neg(Box<Arith>),
    Bin(BinOp, Box<Arith>, Box<Arith>),
}

pub fn arb_arith() -> impl Strategy<Value = Arith> {
    let leaf = (0i64..2000, 0u32..3).prop_map(|(n, k)| Arith::Lit(n, k));
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Arith::Neg(Box::new(a))),
            (
                prop::sample::select(vec![
                    BinOp::Add,
                    BinOp::Sub,
                    BinOp::Mul,
                    BinOp::Div,
                    BinOp::Min,
                    BinOp::Max
                ]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Arith::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

pub fn arith_expr(a: &Arith) -> Expr {
    match a {
        Arith::Lit(n, k) => Expr::literal(Value::Number(
            Frac::new(*n as i128, 10i128.pow(*k)).unwrap().to_rational(),
        )),
        Arith::Neg(x) => Expr::unary(UnaryOp::Neg, arith_expr(x)),
        Arith::Bin(op, l, r) => Expr::binary(*op, arith_expr(l), arith_expr(r)),
    }
}

/// `Err(true)` on division by zero, `Err(false)` when i128 overflows.
pub fn arith_oracle(a: &Arith) -> Result<Frac, bool> {
    match a {
        Arith::Lit(n, k) => Ok(Frac::new(*n as i128, 10i128.pow(*k)).unwrap()),
        Arith::Neg(x) => {
            let v = arith_oracle(x)?;
            Ok(Frac { n: -v.n, d: v.d })
        }
        Arith::Bin(op, l, r) => {
            let (a, b) = (arith_oracle(l)?, arith_oracle(r)?);
            let lt = |a: Frac, b: Frac| (a.n * b.d) < (b.n * a.d);
            match op {
                BinOp::Add => a.add(b).ok_or(false),
                BinOp::Sub => a.sub(b).ok_or(false),
                BinOp::Mul => a.mul(b).ok_or(false),
                BinOp::Div if b.n == 0 => Err(true),
                BinOp::Div => a.div(b).ok_or(false),
                BinOp::Min => Ok(if lt(b, a) { b } else { a }),
                BinOp::Max => Ok(if lt(a, b) { b } else { a }),
                _ => unreachable!(),
            }
        }
    }
}

pub fn check_arith(tree: &Arith) -> Result<(), TestCaseError> {
    let got = eval_expr(&arith_expr(tree), &Environment::new());
    match arith_oracle(tree) {
        Ok(expected) => prop_assert_eq!(got.unwrap(), Value::Number(expected.to_rational())),
        Err(true) => prop_assert_eq!(got.unwrap_err().kind, EvalErrorKind::DivisionByZero),
        Err(false) => return Err(TestCaseError::reject("oracle overflow")),
    }
    Ok(())
}

// ---- boolean formulas ----

#[derive(Clone, Debug)]
pub enum B {
    Var(usize),
    Const(bool),
    Not(Box<B>),
    And(Box<B>, Box<B>),
    Or(Box<B>, Box<B>),
    /// `var = literal`
    Is(usize, bool),
}

pub fn arb_formula(vars: usize) -> impl Strategy<Value = B> {
    let leaf = prop_oneof![
        (0..vars).prop_map(B::Var),
        any::<bool>().prop_map(B::Const),
        (0..vars, any::<bool>()).prop_map(|(v, b)| B::Is(v, b)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| B::Not(Box::new(x))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| B::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| B::Or(Box::new(a), Box::new(b))),
        ]
    })
}

pub fn truth(f: &B, env: &[bool]) -> bool {
    match f {
        B::Var(v) => env[*v],
        B::Const(b) => *b,
        B::Not(x) => !truth(x, env),
        B::And(a, b) => truth(a, env) && truth(b, env),
        B::Or(a, b) => truth(a, env) || truth(b, env),
        B::Is(v, b) => env[*v] == *b,
    }
}

pub fn formula_expr(f: &B, prefix: &str) -> Expr {
    match f {
        B::Var(v) => Expr::name(format!("{prefix}{v}")),
        B::Const(b) => Expr::literal(Value::Boolean(*b)),
        B::Not(x) => Expr::unary(UnaryOp::Not, formula_expr(x, prefix)),
        B::And(a, b) => Expr::binary(BinOp::And, formula_expr(a, prefix), formula_expr(b, prefix)),
        B::Or(a, b) => Expr::binary(BinOp::Or, formula_expr(a, prefix), formula_expr(b, prefix)),
        B::Is(v, b) => Expr::binary(
            BinOp::Eq,
            Expr::name(format!("{prefix}{v}")),
            Expr::literal(Value::Boolean(*b)),
        ),
    }
}

/// All 2^k rows of a truth table.
pub fn assignments(k: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << k).map(move |mask| (0..k).map(|i| mask >> i & 1 == 1).collect())
}

// ---- round trip ----

pub fn check_round_trip(ast: &ContractAst) -> Result<(), TestCaseError> {
    let printed = print_canonical(ast);
    let again = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
    prop_assert_eq!(again.without_spans(), ast.without_spans(), "{}", printed);
    Ok(())
}

pub fn check_corpus_round_trip() -> Result<usize, String> {
    let paths = contract_paths();
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let ast = parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        check_round_trip(&ast).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(paths.len())
}

// ---- dependency graphs ----

pub fn graph_contract(n: usize, edges: &[(usize, usize)]) -> ContractAst {
    let mut ast = ContractAst::empty("graph");
    for v in 0..n {
        let mut expr = Expr::literal(Value::integer(1));
        for &(_, b) in edges.iter().filter(|(a, _)| *a == v) {
            expr = Expr::binary(BinOp::Add, expr, Expr::name(format!("d{b}")));
        }
        ast.definitions.push(Definition {
            name: format!("d{v}"),
            ty: ValueType::Number,
            expr,
            span: Span::default(),
        });
    }
    ast
}

/// Up to 50 definitions with a mix of sparse and dense edge sets.
pub fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=50).prop_flat_map(|n| {
        let density = if n > 10 { n + n / 2 } else { 2 * n };
        (Just(n), prop::collection::vec((0..n, 0..n), 0..density))
    })
}

pub fn check_graph(n: usize, edges: &[(usize, usize)]) -> Result<(), TestCaseError> {
    let ast = graph_contract(n, edges);
    let findings = detect_cycles(&ast);
    prop_assert_eq!(!findings.is_empty(), has_cycle(n, edges));
    prop_assert!(findings.iter().all(|f| f.code == LintCode::Lex002));
    let flagged: BTreeSet<String> = dependency_graph(&ast).cycles().into_iter().flatten().collect();
    let oracle: BTreeSet<String> = on_cycle(n, edges)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c)
        .map(|(v, _)| format!("d{v}"))
        .collect();
    prop_assert_eq!(flagged, oracle);
    prop_assert_eq!(dependency_graph(&ast).evaluation_order().is_err(), has_cycle(n, edges));
    Ok(())
}

// ---- conflicting status sets ----

pub fn arb_conflict_clauses() -> impl Strategy<Value = Vec<(B, bool)>> {
    prop::collection::vec((arb_formula(4), any::<bool>()), 2..5)
}

/// Witnesses satisfy both guards and conflict at run time; reported pairs
/// are exactly the satisfiable ones.
pub fn check_conflicts(clauses: &[(B, bool)]) -> Result<(), TestCaseError> {
    let mut ast = ContractAst::empty("conflicts");
    for i in 0..4 {
        ast.inputs.push(InputDecl {
            name: format!("b{i}"),
            ty: ValueType::Boolean,
            span: Span::default(),
        });
    }
    for (i, (guard, value)) in clauses.iter().enumerate() {
        ast.clauses.push(Clause {
            name: format!("c{i}"),
            guard: formula_expr(guard, "b"),
            outcomes: vec![Outcome {
                kind: OutcomeKind::SetStatus {
                    name: "st".into(),
                    value: Expr::literal(Value::Boolean(*value)),
                },
                span: Span::default(),
            }],
            span: Span::default(),
        });
    }
    let mut reported = BTreeSet::new();
    for f in detect_conflicts(&ast) {
        prop_assert_eq!(f.code, LintCode::Lex006);
        let conflict = f.conflict.expect("LEX006 carries its conflict");
        let mut scenario = Scenario::default();
        for i in 0..4 {
            scenario.insert(format!("b{i}"), Value::Boolean(false));
        }
        for (name, b) in &conflict.witness {
            scenario.insert(name.clone(), Value::Boolean(*b));
        }
        let env: Environment = scenario
            .bindings
            .iter()
            .map(|(k, b)| (k.clone(), b.value.clone()))
            .collect();
        for name in [&conflict.clauses.0, &conflict.clauses.1] {
            let clause = ast.clauses.iter().find(|c| &c.name == name).unwrap();
            prop_assert_eq!(eval_expr(&clause.guard, &env), Ok(Value::Boolean(true)));
        }
        prop_assert_eq!(run(&ast, &scenario).unwrap_err().kind, EvalErrorKind::StatusConflict);
        reported.insert(conflict.clauses);
    }
    let mut oracle = BTreeSet::new();
    for i in 0..clauses.len() {
        for j in i + 1..clauses.len() {
            if clauses[i].1 != clauses[j].1
                && assignments(4).any(|env| truth(&clauses[i].0, &env) && truth(&clauses[j].0, &env))
            {
                oracle.insert((format!("c{i}"), format!("c{j}")));
            }
        }
    }
    prop_assert_eq!(reported, oracle);
    Ok(())
}

// ---- no silent defaults ----

/// Deletes each binding of each shipped scenario; returns deletions checked.
pub fn check_deletion_sweep() -> Result<usize, String> {
    let entries = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for entry in &entries {
        for case in &entry.scenarios {
            for name in case.scenario.bindings.keys() {
                match run(&entry.ast, &case.scenario.without(name)) {
                    Err(e) if e.kind == EvalErrorKind::UnboundInput && &e.detail == name => {}
                    other => {
                        return Err(format!(
                            "{} scenario {} without `{name}`: {other:?}",
                            entry.id, case.number
                        ))
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
