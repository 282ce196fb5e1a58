mod common;

use proptest::prelude::*;

use common::*;
use lexc_core::model::ast::{ContractAst, Expr, ExprKind};
use lexc_core::model::{print_canonical, print_expr, validate};
use lexc_core::parser::{parse, parse_expr};
use lexc_core::Span;

fn slice(text: &str, span: Span) -> &str {
    &text[span.start..span.end]
}

fn same_kind(a: &ExprKind, b: &ExprKind) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

fn check_expr_spans(text: &str, expr: &Expr) {
    let piece = slice(text, expr.span);
    let reparsed = parse_expr(piece).unwrap_or_else(|e| panic!("`{piece}` does not re-parse: {e}"));
    assert!(
        same_kind(&reparsed.kind, &expr.kind),
        "`{piece}` re-parses as a different construct"
    );
    assert_eq!(reparsed.without_spans(), expr.without_spans(), "`{piece}`");
    for child in expr.children() {
        check_expr_spans(text, child);
    }
}

fn check_decl_spans(text: &str, ast: &ContractAst) {
    let starts = |span: Span, word: &str| {
        assert!(
            slice(text, span).starts_with(word),
            "span `{}` should start with `{word}`",
            slice(text, span)
        )
    };
    starts(ast.span, "contract");
    ast.parties.iter().for_each(|p| starts(p.span, "party"));
    ast.inputs.iter().for_each(|i| starts(i.span, "input"));
    ast.definitions.iter().for_each(|d| starts(d.span, "let"));
    ast.event_catalogs.iter().for_each(|c| {
        starts(c.span, "events");
        c.events.iter().for_each(|e| starts(e.span, "\""));
        if let Some(w) = c.wildcard {
            assert_eq!(slice(text, w), "other");
        }
    });
    ast.clauses.iter().for_each(|c| {
        starts(c.span, "clause");
        for o in &c.outcomes {
            let first = slice(text, o.span).split_whitespace().next().unwrap_or("");
            assert!(["pay", "set", "terminate", "notice"].contains(&first));
        }
    });
    ast.rectify_rules.iter().for_each(|r| {
        starts(r.span, "rectify");
        r.body.iter().for_each(|a| starts(a.span, "set"));
    });
    ast.constraints.iter().for_each(|c| starts(c.span, "constraint"));
    for e in ast.expressions() {
        check_expr_spans(text, e);
    }
}

#[test]
fn corpus_round_trips() {
    for path in contract_paths() {
        let text = std::fs::read_to_string(&path).unwrap();
        let ast = parse(&text).unwrap();
        let printed = print_canonical(&ast);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()));
        assert_eq!(again.without_spans(), ast.without_spans(), "{}", path.display());
        // canonical form is a fixed point
        assert_eq!(print_canonical(&again), printed);
    }
}

#[test]
fn corpus_span_fidelity() {
    for path in contract_paths() {
        let text = std::fs::read_to_string(&path).unwrap();
        check_decl_spans(&text, &parse(&text).unwrap());
    }
}

#[test]
fn corpus_parse_is_deterministic() {
    for path in contract_paths() {
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(parse(&text).unwrap(), parse(&text).unwrap());
    }
}

#[test]
fn rainy_sky_counts() {
    let ast = parse(&corpus_file("rainy-sky/contract.lexc")).unwrap();
    assert_eq!(ast.inputs.len(), 3);
    assert_eq!(ast.definitions.len(), 2);
    assert_eq!(ast.clauses.len(), 1);
    assert!(validate(&ast).is_empty());
}

#[test]
fn every_corpus_contract_validates() {
    for path in contract_paths() {
        let ast = parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(validate(&ast).is_empty(), "{}", path.display());
    }
}

#[test]
fn missing_expression_points_at_semicolon() {
    let text = "contract \"T\" { let x: money = ; }";
    let err = parse(text).unwrap_err();
    assert_eq!((err.line, err.column as usize), (1, text.find(';').unwrap() + 1));
}

/// One inserted defect line per position, in every corpus file.
#[test]
fn seeded_defect_line_is_reported() {
    for path in contract_paths() {
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        for at in 0..=lines.len() {
            for defect in ["  $", "  let let", "  @@"] {
                let mut mutated: Vec<&str> = lines.clone();
                mutated.insert(at, defect);
                let source = mutated.join("\n") + "\n";
                let err = parse(&source).expect_err("defect must not parse");
                assert_eq!(
                    err.line as usize,
                    at + 1,
                    "{} with `{defect}` at line {}: {err}",
                    path.display(),
                    at + 1
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generated_contracts_round_trip(ast in arb_contract()) {
        let printed = print_canonical(&ast);
        let again = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(again.without_spans(), ast.without_spans(), "{}", printed);
    }

    #[test]
    fn generated_spans_are_faithful(ast in arb_contract()) {
        let printed = print_canonical(&ast);
        let again = parse(&printed).unwrap();
        check_decl_spans(&printed, &again);
    }

    #[test]
    fn generated_expressions_round_trip(expr in arb_expr()) {
        let text = print_expr(&expr);
        let again = parse_expr(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(again.without_spans(), expr.without_spans(), "{}", text);
    }
}
