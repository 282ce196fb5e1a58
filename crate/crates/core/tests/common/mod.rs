//! Oracles and generators shared by the integration suites. Nothing here
//! calls into the code it checks.

#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use chrono::NaiveDate;
use num_bigint::BigInt;
use proptest::prelude::*;

use lexc_core::model::ast::*;
use lexc_core::model::value::{Currency, Money, Percent, Rational};
use lexc_core::{Span, Value, ValueType};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_file(rel: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(rel)).unwrap()
}

pub fn contract_paths() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .map(|p| p.join("contract.lexc"))
        .collect();
    out.sort();
    out
}

pub fn gbp(text: &str) -> Value {
    Value::Money(Money::new(Currency::new("GBP").unwrap(), decimal(text)))
}

pub fn decimal(text: &str) -> Rational {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let n: BigInt = format!("{int}{frac}").parse().unwrap();
    Rational::new(n, BigInt::from(10).pow(frac.len() as u32))
}

// ---- fraction oracle: i128 numerator/denominator, hand-rolled gcd ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac {
    pub n: i128,
    pub d: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Frac {
    pub fn new(n: i128, d: i128) -> Option<Frac> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d).max(1);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Frac { n, d })
    }

    pub fn add(self, o: Frac) -> Option<Frac> {
        Frac::new(
            self.n.checked_mul(o.d)?.checked_add(o.n.checked_mul(self.d)?)?,
            self.d.checked_mul(o.d)?,
        )
    }

    pub fn sub(self, o: Frac) -> Option<Frac> {
        self.add(Frac { n: o.n.checked_neg()?, d: o.d })
    }

    pub fn mul(self, o: Frac) -> Option<Frac> {
        Frac::new(self.n.checked_mul(o.n)?, self.d.checked_mul(o.d)?)
    }

    pub fn div(self, o: Frac) -> Option<Frac> {
        if o.n == 0 {
            return None;
        }
        Frac::new(self.n.checked_mul(o.d)?, self.d.checked_mul(o.n)?)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.n), BigInt::from(self.d))
    }

    /// Two decimals, half away from zero.
    pub fn to_cents_text(self) -> String {
        let neg = self.n < 0;
        let scaled = self.n.abs() * 100;
        let mut cents = scaled / self.d;
        if (scaled % self.d) * 2 >= self.d {
            cents += 1;
        }
        let sign = if neg && cents != 0 { "-" } else { "" };
        format!("{sign}{}.{:02}", cents / 100, cents % 100)
    }
}

// ---- calendar oracle ----

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146097 + doe - 719468
}

// ---- graph oracle ----

/// Colour DFS; true when some node reaches itself.
pub fn has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    // 0 white, 1 grey, 2 black
    let mut colour = vec![0u8; n];
    fn visit(v: usize, adj: &[Vec<usize>], colour: &mut [u8]) -> bool {
        colour[v] = 1;
        for &w in &adj[v] {
            if colour[w] == 1 || (colour[w] == 0 && visit(w, adj, colour)) {
                return true;
            }
        }
        colour[v] = 2;
        false
    }
    (0..n).any(|v| colour[v] == 0 && visit(v, &adj, &mut colour))
}

/// Nodes lying on some cycle: v reaches itself through at least one edge.
pub fn on_cycle(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).map(|v| reach[v][v]).collect()
}

/// Every name an expression mentions, by direct structural walk.
pub fn scan_names(expr: &Expr, out: &mut Vec<String>) {
    match &expr.kind {
        ExprKind::Literal(_) => {}
        ExprKind::Name(n) => out.push(n.clone()),
        ExprKind::Unary { operand, .. } => scan_names(operand, out),
        ExprKind::Binary { lhs, rhs, .. } => {
            scan_names(lhs, out);
            scan_names(rhs, out);
        }
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            scan_names(cond, out);
            scan_names(then_branch, out);
            scan_names(else_branch, out);
        }
        ExprKind::Days { from, to } => {
            scan_names(from, out);
            scan_names(to, out);
        }
        ExprKind::Compound {
            base,
            rate,
            periods,
        } => {
            scan_names(base, out);
            scan_names(rate, out);
            scan_names(periods, out);
        }
        ExprKind::InCatalog { event, .. } => scan_names(event, out),
    }
}

// ---- generators ----

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

pub fn arb_decimal() -> impl Strategy<Value = Rational> {
    (0u64..10_000_000, 0u32..4)
        .prop_map(|(n, k)| Rational::new(BigInt::from(n), BigInt::from(10u64.pow(k))))
}

pub fn arb_literal() -> impl Strategy<Value = Value> {
    prop_oneof![
        arb_decimal().prop_map(Value::Number),
        (prop::sample::select(vec!["GBP", "USD", "EUR"]), arb_decimal())
            .prop_map(|(c, a)| Value::Money(Money::new(Currency::new(c).unwrap(), a))),
        arb_decimal().prop_map(|p| Value::Percent(Percent::from_points(p).unwrap())),
        (1990i32..2100, 1u32..=12, 1u32..=28)
            .prop_map(|(y, m, d)| Value::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap())),
        any::<bool>().prop_map(Value::Boolean),
        "[a-zA-Z0-9 \"\\\\_.]{0,8}".prop_map(Value::Text),
    ]
}

pub const NAMES: &[&str] = &["alpha", "beta", "rate", "x1", "due_date", "n_2"];

/// Syntactically arbitrary expressions; types are not respected.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        arb_literal().prop_map(|v| e(ExprKind::Literal(v))),
        prop::sample::select(NAMES).prop_map(|n| e(ExprKind::Name(n.to_string()))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Min,
            BinOp::Max,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
        ];
        prop_oneof![
            (prop::sample::select(vec![UnaryOp::Not, UnaryOp::Neg]), inner.clone()).prop_map(
                |(op, x)| e(ExprKind::Unary {
                    op,
                    operand: Box::new(x)
                })
            ),
            (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, l, r)| e(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(l),
                    rhs: Box::new(r)
                }
            )),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, f)| e(ExprKind::If {
                cond: Box::new(c),
                then_branch: Box::new(t),
                else_branch: Box::new(f)
            })),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| e(ExprKind::Days {
                from: Box::new(a),
                to: Box::new(b)
            })),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(b, r, p)| e(ExprKind::Compound {
                base: Box::new(b),
                rate: Box::new(r),
                periods: Box::new(p)
            })),
            inner.prop_map(|x| e(ExprKind::InCatalog {
                event: Box::new(x),
                catalog: "cat0".into()
            })),
        ]
    })
}

fn arb_type() -> impl Strategy<Value = ValueType> {
    prop::sample::select(ValueType::ALL.to_vec())
}

fn arb_words() -> impl Strategy<Value = String> {
    "[a-zA-Z ,\"\\\\]{0,12}"
}

fn arb_outcome() -> impl Strategy<Value = Outcome> {
    let kind = prop_oneof![
        (0usize..3, 0usize..3, arb_expr()).prop_map(|(a, b, x)| OutcomeKind::Pay {
            from: format!("P{a}"),
            to: format!("P{b}"),
            amount: x
        }),
        (prop::sample::select(vec!["s_one", "s_two", "flag"]), arb_expr()).prop_map(|(n, x)| {
            OutcomeKind::SetStatus {
                name: n.to_string(),
                value: x,
            }
        }),
        arb_words().prop_map(OutcomeKind::Terminate),
        arb_words().prop_map(OutcomeKind::Notice),
    ];
    kind.prop_map(|kind| Outcome {
        kind,
        span: Span::default(),
    })
}

/// Whole contracts with every declaration kind.
pub fn arb_contract() -> impl Strategy<Value = ContractAst> {
    let parties = 0usize..4;
    let inputs = prop::collection::vec(arb_type(), 0..4);
    let defs = prop::collection::vec((arb_type(), arb_expr()), 0..4);
    let catalogs = prop::collection::vec((prop::collection::vec(arb_words(), 0..4), any::<bool>()), 0..3);
    let clauses = prop::collection::vec((arb_expr(), prop::collection::vec(arb_outcome(), 1..4)), 0..4);
    let rules = prop::collection::vec(
        (
            arb_expr(),
            prop::collection::vec((prop::sample::select(vec!["s_one", "flag"]), arb_expr()), 1..3),
        ),
        0..3,
    );
    let constraints = prop::collection::vec(
        (arb_words(), prop::option::of(0u64..400), prop::option::of(0usize..3)),
        0..3,
    );
    (
        "[A-Za-z ]{0,12}",
        parties,
        inputs,
        defs,
        catalogs,
        clauses,
        rules,
        constraints,
    )
        .prop_map(|(name, parties, inputs, defs, catalogs, clauses, rules, constraints)| {
            let s = Span::default();
            ContractAst {
                name,
                parties: (0..parties)
                    .map(|i| Party {
                        name: format!("P{i}"),
                        span: s,
                    })
                    .collect(),
                inputs: inputs
                    .into_iter()
                    .enumerate()
                    .map(|(i, ty)| InputDecl {
                        name: format!("in_{i}"),
                        ty,
                        span: s,
                    })
                    .collect(),
                definitions: defs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (ty, expr))| Definition {
                        name: format!("def_{i}"),
                        ty,
                        expr,
                        span: s,
                    })
                    .collect(),
                clauses: clauses
                    .into_iter()
                    .enumerate()
                    .map(|(i, (guard, outcomes))| Clause {
                        name: format!("clause_{i}"),
                        guard,
                        outcomes,
                        span: s,
                    })
                    .collect(),
                event_catalogs: catalogs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (events, wild))| CatalogDecl {
                        name: format!("cat{i}"),
                        events: events
                            .into_iter()
                            .map(|name| CatalogEvent { name, span: s })
                            .collect(),
                        wildcard: wild.then_some(s),
                        span: s,
                    })
                    .collect(),
                rectify_rules: rules
                    .into_iter()
                    .enumerate()
                    .map(|(i, (guard, body))| RectifyRule {
                        name: format!("rule_{i}"),
                        guard,
                        body: body
                            .into_iter()
                            .map(|(n, value)| Assignment {
                                name: n.to_string(),
                                value,
                                span: s,
                            })
                            .collect(),
                        span: s,
                    })
                    .collect(),
                constraints: constraints
                    .into_iter()
                    .map(|(description, deadline_days, by)| Constraint {
                        description,
                        deadline_days,
                        overridable_by: by.map(|i| format!("P{i}")),
                        span: s,
                    })
                    .collect(),
                span: s,
            }
        })
}
