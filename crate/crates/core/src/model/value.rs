use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational used for every quantity in the model.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("invalid currency code `{0}`: expected three uppercase ASCII letters")]
    InvalidCurrency(String),
    #[error("percent must be non-negative, got {0}")]
    NegativePercent(Rational),
}

/// ISO-4217 style currency code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Currency([u8; 3]);

impl Currency {
    pub fn new(code: &str) -> Result<Self, ValueError> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_uppercase) {
            return Err(ValueError::InvalidCurrency(code.to_string()));
        }
        Ok(Currency([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        // constructed from uppercase ASCII only
        std::str::from_utf8(&self.0).expect("currency is ASCII")
    }

    /// Whether `word` is lexically a currency code.
    pub fn is_code(word: &str) -> bool {
        word.len() == 3 && word.bytes().all(|b| b.is_ascii_uppercase())
    }
}

impl FromStr for Currency {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Currency::new(s)
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Currency({})", self.as_str())
    }
}

/// An exact amount in major units of one currency.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Money {
    currency: Currency,
    amount: Rational,
}

impl Money {
    pub fn new(currency: Currency, amount: Rational) -> Self {
        Money { currency, amount }
    }

    pub fn currency(&self) -> Currency {
        self.currency
    }

    pub fn amount(&self) -> &Rational {
        &self.amount
    }

    pub fn into_amount(self) -> Rational {
        self.amount
    }
}

/// A percentage held as its exact fraction: `7%` is stored as `7/100`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Percent(Rational);

impl Percent {
    /// From the fraction itself (`0.07` for 7%).
    pub fn from_fraction(fraction: Rational) -> Result<Self, ValueError> {
        if fraction.is_negative() {
            return Err(ValueError::NegativePercent(fraction));
        }
        Ok(Percent(fraction))
    }

    /// From percentage points (`7` for 7%).
    pub fn from_points(points: Rational) -> Result<Self, ValueError> {
        Percent::from_fraction(points / Rational::from_integer(BigInt::from(100)))
    }

    /// Arithmetic results are not range-checked; only literals and scenario
    /// values go through the checked constructors.
    pub(crate) fn from_fraction_unchecked(fraction: Rational) -> Self {
        Percent(fraction)
    }

    pub fn fraction(&self) -> &Rational {
        &self.0
    }

    pub fn points(&self) -> Rational {
        &self.0 * Rational::from_integer(BigInt::from(100))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Money,
    Number,
    Percent,
    Date,
    Boolean,
    Text,
}

impl ValueType {
    pub const ALL: [ValueType; 6] = [
        ValueType::Money,
        ValueType::Number,
        ValueType::Percent,
        ValueType::Date,
        ValueType::Boolean,
        ValueType::Text,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Money => "money",
            ValueType::Number => "number",
            ValueType::Percent => "percent",
            ValueType::Date => "date",
            ValueType::Boolean => "boolean",
            ValueType::Text => "text",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        ValueType::ALL.into_iter().find(|t| t.keyword() == word)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Money(Money),
    Number(Rational),
    Percent(Percent),
    Date(NaiveDate),
    Boolean(bool),
    Text(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Money(_) => ValueType::Money,
            Value::Number(_) => ValueType::Number,
            Value::Percent(_) => ValueType::Percent,
            Value::Date(_) => ValueType::Date,
            Value::Boolean(_) => ValueType::Boolean,
            Value::Text(_) => ValueType::Text,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    pub fn integer(n: i64) -> Value {
        Value::Number(Rational::from_integer(BigInt::from(n)))
    }
}

/// Exact decimal expansion of `r`, or `None` when the denominator has prime
/// factors other than 2 and 5.
pub fn exact_decimal(r: &Rational) -> Option<String> {
    let mut denom = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1) {
        return None;
    }
    let scale = twos.max(fives);
    let scaled = r.numer() * BigInt::from(10).pow(scale) / r.denom();
    Some(insert_point(&scaled, scale as usize))
}

fn insert_point(scaled: &BigInt, scale: usize) -> String {
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let body = if scale == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = scale + 1);
        let (int, frac) = padded.split_at(padded.len() - scale);
        format!("{int}.{frac}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Decimal when exact, else `p/q`.
pub fn format_number(r: &Rational) -> String {
    exact_decimal(r).unwrap_or_else(|| format!("{}/{}", r.numer(), r.denom()))
}

/// Parses `123_456.78` style decimal text (no sign) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let cleaned: String = text.chars().filter(|c| *c != '_').collect();
    let (int, frac) = match cleaned.split_once('.') {
        Some((i, f)) => (i, f),
        None => (cleaned.as_str(), ""),
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) || (cleaned.contains('.') && frac.is_empty()) {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = BigInt::from(10).pow(frac.len() as u32);
    Some(Rational::new(numer, denom))
}
