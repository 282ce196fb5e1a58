use std::collections::BTreeMap;

use thiserror::Error;

use super::lexer::{Lexer, Tok, Token};
use super::{is_reserved, literal_from_tokens, ParseError};
use crate::model::value::Value;
use crate::span::Span;

/// Named literal bindings for a contract's declared inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub bindings: BTreeMap<String, Binding>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub value: Value,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{line}: duplicate binding `{name}` (first bound on line {first_line})")]
    DuplicateBinding {
        name: String,
        line: u32,
        first_line: u32,
    },
}

impl Scenario {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name).map(|b| &b.value)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), Binding { value, line: 0 });
    }

    pub fn without(&self, name: &str) -> Scenario {
        let mut copy = self.clone();
        copy.bindings.remove(name);
        copy
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// Parses `name = literal` lines; `#` starts a comment.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut scenario = Scenario::default();
    let mut i = 0;
    while tokens[i].tok != Tok::Eof {
        let line = tokens[i].span.line;
        let end = tokens[i..]
            .iter()
            .position(|t| t.span.line != line || t.tok == Tok::Eof)
            .map_or(tokens.len() - 1, |p| i + p);
        let mut line_tokens: Vec<Token> = tokens[i..end].to_vec();
        // sentinel so the literal parser always sees a terminator
        let last = tokens[end - 1].span;
        let width = text[last.start..last.end].chars().count() as u32;
        line_tokens.push(Token {
            tok: Tok::Eof,
            span: Span::new(last.end, last.end, line, last.column + width),
        });
        let (name, value) = binding(&line_tokens)?;
        if let Some(first) = scenario.bindings.get(&name) {
            return Err(ScenarioError::DuplicateBinding {
                name,
                line,
                first_line: first.line,
            });
        }
        scenario.bindings.insert(name, Binding { value, line });
        i = end;
    }
    Ok(scenario)
}

fn binding(tokens: &[Token]) -> Result<(String, Value), ParseError> {
    let err = |t: &Token, expected: &str| ParseError {
        line: t.span.line,
        column: t.span.column,
        expected: expected.to_string(),
        found: if t.tok == Tok::Eof {
            "end of line".to_string()
        } else {
            t.tok.describe()
        },
    };
    let name = match &tokens[0].tok {
        Tok::Ident(w) if !is_reserved(w) => w.clone(),
        _ => return Err(err(&tokens[0], "input name")),
    };
    if tokens[1].tok != Tok::Sym("=") {
        return Err(err(&tokens[1], "`=`"));
    }
    let (value, used) = literal_from_tokens(&tokens[2..]).map_err(|e| {
        if e.found == "end of input" {
            err(&tokens[2], "literal value")
        } else {
            e
        }
    })?;
    let next = &tokens[2 + used];
    if next.tok != Tok::Eof {
        return Err(err(next, "end of line"));
    }
    Ok((name, value))
}
