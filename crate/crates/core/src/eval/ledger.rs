//! Outcome ledger and its machine serialization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::model::print::quote;
use crate::model::value::{exact_decimal, format_number, Money, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LedgerEntry {
    Payment { from: String, to: String, amount: Money },
    Status { name: String, value: Value },
    Termination(String),
    Notice(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeLedger {
    pub entries: Vec<LedgerEntry>,
    pub fired_clauses: Vec<String>,
    /// Rectification passes run; 0 when the contract has no rules.
    pub rectification_passes: usize,
}

impl OutcomeLedger {
    pub fn status(&self, name: &str) -> Option<&Value> {
        self.entries.iter().find_map(|e| match e {
            LedgerEntry::Status { name: n, value } if n == name => Some(value),
            _ => None,
        })
    }

    pub fn payments<'a>(&'a self, from: &'a str, to: &'a str) -> impl Iterator<Item = &'a Money> {
        self.entries.iter().filter_map(move |e| match e {
            LedgerEntry::Payment { from: f, to: t, amount } if f == from && t == to => Some(amount),
            _ => None,
        })
    }

    pub fn terminations(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            LedgerEntry::Termination(r) => Some(r.as_str()),
            _ => None,
        })
    }

    /// One line per entry, each newline-terminated.
    pub fn to_machine(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\n", e.to_machine()))
            .collect()
    }
}

impl LedgerEntry {
    pub fn to_machine(&self) -> String {
        match self {
            LedgerEntry::Payment { from, to, amount } => {
                format!("PAY {from} {to} {}", serialize_money(amount))
            }
            LedgerEntry::Status { name, value } => format!("STATUS {name} {}", format_value(value)),
            LedgerEntry::Termination(reason) => format!("TERMINATE {reason}"),
            LedgerEntry::Notice(text) => format!("NOTICE {text}"),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum EntryRepr<'a> {
    Pay { from: &'a str, to: &'a str, amount: String },
    Status { name: &'a str, value: String },
    Terminate { reason: &'a str },
    Notice { text: &'a str },
}

impl Serialize for LedgerEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            LedgerEntry::Payment { from, to, amount } => EntryRepr::Pay {
                from,
                to,
                amount: serialize_money(amount),
            },
            LedgerEntry::Status { name, value } => EntryRepr::Status {
                name,
                value: format_value(value),
            },
            LedgerEntry::Termination(reason) => EntryRepr::Terminate { reason },
            LedgerEntry::Notice(text) => EntryRepr::Notice { text },
        };
        repr.serialize(s)
    }
}

/// `GBP 143.75`: two decimals, half away from zero, no separators. The only
/// place money is rounded.
pub fn serialize_money(m: &Money) -> String {
    let amount = m.amount();
    let scaled = amount.numer().abs() * BigInt::from(100);
    let denom = amount.denom();
    let (mut cents, rem) = scaled.div_rem(denom);
    if rem * 2 >= *denom {
        cents += 1;
    }
    let (units, frac) = cents.div_rem(&BigInt::from(100));
    let sign = if amount.is_negative() && !cents.is_zero() { "-" } else { "" };
    format!("{} {sign}{units}.{frac:02}", m.currency())
}

/// Status value text used in the ledger.
pub fn format_value(value: &Value) -> String {
    match value {
        Value::Money(m) => serialize_money(m),
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
