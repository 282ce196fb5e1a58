use chrono::NaiveDate;

use super::ParseError;
use crate::model::value::{parse_decimal, Rational};
use crate::span::Span;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Number { value: Rational, integer: bool },
    Percent(Rational),
    Date(NaiveDate),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Number { .. } => "number".to_string(),
            Tok::Percent(_) => "percent".to_string(),
            Tok::Date(_) => "date".to_string(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

// longest first
const SYMBOLS: [&str; 19] = [
    "->", "!=", "<=", ">=", "{", "}", "(", ")", ";", ":", ",", "=", "<", ">", "+", "-", "*", "/",
    "%",
];

pub struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: u32,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            let token = self.next_token()?;
            let eof = token.tok == Tok::Eof;
            out.push(token);
            if eof {
                return Ok(out);
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn column_at(&self, pos: usize) -> u32 {
        self.text[self.line_start..pos].chars().count() as u32 + 1
    }

    fn span_from(&self, start: usize, line: u32, column: u32) -> Span {
        Span::new(start, self.pos, line, column)
    }

    fn error_here(&self, expected: &str, found: String) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column_at(self.pos),
            expected: expected.to_string(),
            found,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                self.pos += 1;
                self.line += 1;
                self.line_start = self.pos;
            } else if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        let line = self.line;
        let column = self.column_at(start);
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                span: Span::new(start, start, line, column),
            });
        };

        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let len = self
                .rest()
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(self.rest().len());
            let word = &self.rest()[..len];
            self.pos += len;
            Tok::Ident(word.to_string())
        } else if c.is_ascii_digit() {
            self.lex_number()?
        } else if c == '"' {
            self.lex_string()?
        } else if let Some(sym) = self.lex_unicode_operator() {
            sym
        } else if let Some(sym) = SYMBOLS.iter().find(|s| self.rest().starts_with(**s)) {
            self.pos += sym.len();
            Tok::Sym(sym)
        } else {
            return Err(self.error_here("a token", format!("`{c}`")));
        };
        Ok(Token {
            tok,
            span: self.span_from(start, line, column),
        })
    }

    fn lex_unicode_operator(&mut self) -> Option<Tok> {
        let mapped = match self.peek()? {
            '≠' => "!=",
            '≤' => "<=",
            '≥' => ">=",
            '→' => "->",
            _ => return None,
        };
        self.pos += self.peek()?.len_utf8();
        Some(Tok::Sym(mapped))
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        if let Some(date) = self.try_date()? {
            return Ok(date);
        }
        let rest = self.rest();
        let mut len = rest
            .find(|c: char| !(c.is_ascii_digit() || c == '_'))
            .unwrap_or(rest.len());
        let mut integer = true;
        if rest[len..].starts_with('.')
            && rest[len + 1..].starts_with(|c: char| c.is_ascii_digit())
        {
            integer = false;
            len += 1;
            len += rest[len..]
                .find(|c: char| !(c.is_ascii_digit() || c == '_'))
                .unwrap_or(rest.len() - len);
        }
        let text = &rest[..len];
        let value = parse_decimal(text)
            .ok_or_else(|| self.error_here("a number", format!("`{text}`")))?;
        self.pos += len;
        if self.peek() == Some('%') {
            self.pos += 1;
            return Ok(Tok::Percent(value));
        }
        Ok(Tok::Number { value, integer })
    }

    /// `YYYY-MM-DD` not followed by another digit.
    fn try_date(&mut self) -> Result<Option<Tok>, ParseError> {
        let b = self.rest().as_bytes();
        let shape = b.len() >= 10
            && b[..4].iter().all(u8::is_ascii_digit)
            && b[4] == b'-'
            && b[5..7].iter().all(u8::is_ascii_digit)
            && b[7] == b'-'
            && b[8..10].iter().all(u8::is_ascii_digit)
            && !b.get(10).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if !shape {
            return Ok(None);
        }
        let text = &self.rest()[..10];
        let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
            .map_err(|_| self.error_here("a valid calendar date", format!("`{text}`")))?;
        self.pos += 10;
        Ok(Some(Tok::Date(date)))
    }

    fn lex_string(&mut self) -> Result<Tok, ParseError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    return Err(self.error_here("closing `\"`", "end of line".to_string()))
                }
                Some('"') => {
                    self.pos += 1;
                    return Ok(Tok::Str(out));
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ ('"' | '\\')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        other => {
                            let found = other.map_or("end of input".to_string(), |c| format!("`\\{c}`"));
                            return Err(self.error_here("escape `\\\"` or `\\\\`", found));
                        }
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
    }
}
