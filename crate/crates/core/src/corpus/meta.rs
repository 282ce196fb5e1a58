//! `meta.tsv`: tab-separated labels and judgment assertions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::lint::LintCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Alignment {
    Match,
    Partial,
    Opposite,
    LintOnly,
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alignment::Match => "Match",
            Alignment::Partial => "Partial",
            Alignment::Opposite => "Opposite",
            Alignment::LintOnly => "LintOnly",
        })
    }
}

impl FromStr for Alignment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Match" => Ok(Alignment::Match),
            "Partial" => Ok(Alignment::Partial),
            "Opposite" => Ok(Alignment::Opposite),
            "LintOnly" => Ok(Alignment::LintOnly),
            _ => Err(format!("unknown alignment `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OppositeCause {
    EncodingError,
    AmbiguousLanguage,
    Either,
}

impl fmt::Display for OppositeCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OppositeCause::EncodingError => "EncodingError",
            OppositeCause::AmbiguousLanguage => "AmbiguousLanguage",
            OppositeCause::Either => "Either",
        })
    }
}

impl FromStr for OppositeCause {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "EncodingError" => Ok(OppositeCause::EncodingError),
            "AmbiguousLanguage" => Ok(OppositeCause::AmbiguousLanguage),
            "Either" => Ok(OppositeCause::Either),
            _ => Err(format!("unknown cause `{s}`")),
        }
    }
}

/// What an assertion looks at in a ledger.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Subject {
    Status(String),
    Payment { from: String, to: String },
    Termination,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Status(name) => write!(f, "status:{name}"),
            Subject::Payment { from, to } => write!(f, "pay:{from}->{to}"),
            Subject::Termination => f.write_str("terminate"),
        }
    }
}

impl FromStr for Subject {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "terminate" {
            return Ok(Subject::Termination);
        }
        if let Some(name) = s.strip_prefix("status:") {
            if !name.is_empty() {
                return Ok(Subject::Status(name.to_string()));
            }
        }
        if let Some(route) = s.strip_prefix("pay:") {
            if let Some((from, to)) = route.split_once("->") {
                if !from.is_empty() && !to.is_empty() {
                    return Ok(Subject::Payment {
                        from: from.to_string(),
                        to: to.to_string(),
                    });
                }
            }
        }
        Err(format!("bad subject `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Equals,
    Exists,
    Absent,
}

impl FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equals" => Ok(Relation::Equals),
            "exists" => Ok(Relation::Exists),
            "absent" => Ok(Relation::Absent),
            _ => Err(format!("unknown relation `{s}`")),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Equals => "equals",
            Relation::Exists => "exists",
            Relation::Absent => "absent",
        })
    }
}

/// A judgment outcome phrased as a ledger query.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Assertion {
    /// `None` applies to every scenario.
    pub scenario: Option<u32>,
    pub subject: Subject,
    pub relation: Relation,
    /// Machine-format text, compared verbatim.
    pub expected: Option<String>,
    pub evaluable: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Meta {
    pub title: String,
    pub alignment: Option<Alignment>,
    pub cause: Option<OppositeCause>,
    pub citation: String,
    pub lints: Vec<LintCode>,
    pub exclusive: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
}

/// Line-numbered message on failure.
pub fn parse_meta(text: &str) -> Result<Meta, (usize, String)> {
    let mut meta = Meta::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let err = |m: String| (line, m);
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err((line, format!("`{}` takes {} fields, found {}", fields[0], n - 1, fields.len() - 1)))
            }
        };
        match fields[0] {
            "title" => {
                arity(2)?;
                meta.title = fields[1].to_string();
            }
            "citation" => {
                arity(2)?;
                meta.citation = fields[1].to_string();
            }
            "alignment" => {
                arity(2)?;
                meta.alignment = Some(fields[1].parse().map_err(err)?);
            }
            "cause" => {
                arity(2)?;
                meta.cause = Some(fields[1].parse().map_err(err)?);
            }
            "lint" => {
                arity(2)?;
                let code = LintCode::parse(fields[1])
                    .ok_or_else(|| (line, format!("unknown lint code `{}`", fields[1])))?;
                meta.lints.push(code);
            }
            "exclusive" => {
                arity(3)?;
                meta.exclusive.push((fields[1].to_string(), fields[2].to_string()));
            }
            "assert" => {
                if fields.len() != 4 && fields.len() != 5 {
                    return Err(err(format!("`assert` takes 3 or 4 fields, found {}", fields.len() - 1)));
                }
                let relation: Relation = fields[3].parse().map_err(err)?;
                let expected = fields.get(4).map(|s| s.to_string());
                if (relation == Relation::Equals) != expected.is_some() {
                    return Err(err("`equals` needs an expected value; other relations take none".into()));
                }
                meta.assertions.push(Assertion {
                    scenario: scenario_ref(fields[1]).map_err(err)?,
                    subject: fields[2].parse().map_err(err)?,
                    relation,
                    expected,
                    evaluable: true,
                    reason: None,
                });
            }
            "unevaluable" => {
                arity(6)?;
                meta.assertions.push(Assertion {
                    scenario: scenario_ref(fields[1]).map_err(err)?,
                    subject: fields[2].parse().map_err(err)?,
                    relation: fields[3].parse().map_err(err)?,
                    expected: Some(fields[4].to_string()),
                    evaluable: false,
                    reason: Some(fields[5].to_string()),
                });
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(meta)
}

fn scenario_ref(field: &str) -> Result<Option<u32>, String> {
    if field == "*" {
        return Ok(None);
    }
    field
        .parse::<u32>()
        .ok()
        .filter(|n| *n > 0)
        .map(Some)
        .ok_or_else(|| format!("bad scenario reference `{field}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_meta() {
        let m = parse_meta(
            "title\tX v Y\nalignment\tOpposite\ncause\tEither\nlint\tLEX006\nexclusive\ta\tb\n\
             assert\t1\tstatus:a\tequals\ttrue\nassert\t*\tpay:P->Q\texists\n\
             unevaluable\t2\tterminate\tequals\tx\twhy\n",
        )
        .unwrap();
        assert_eq!(m.alignment, Some(Alignment::Opposite));
        assert_eq!(m.cause, Some(OppositeCause::Either));
        assert_eq!(m.lints, vec![LintCode::Lex006]);
        assert_eq!(m.assertions.len(), 3);
        assert_eq!(m.assertions[1].scenario, None);
        assert_eq!(
            m.assertions[1].subject,
            Subject::Payment { from: "P".into(), to: "Q".into() }
        );
        assert!(!m.assertions[2].evaluable);
        assert_eq!(m.assertions[2].reason.as_deref(), Some("why"));
    }

    #[test]
    fn errors_carry_line() {
        assert_eq!(parse_meta("title\tx\nbogus\t1\n").unwrap_err().0, 2);
        assert!(parse_meta("assert\t0\tterminate\texists\n").is_err());
        assert!(parse_meta("assert\t1\tstatus:a\tequals\n").is_err());
        assert!(parse_meta("assert\t1\tpay:->Q\texists\n").is_err());
    }

    #[test]
    fn subject_display_round_trips() {
        for s in ["status:x", "pay:A->B", "terminate"] {
            assert_eq!(s.parse::<Subject>().unwrap().to_string(), s);
        }
    }
}
