//! Reader for solver responses.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use super::expr::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExp {
    Atom(String),
    Str(String),
    List(Vec<SExp>),
}

impl fmt::Display for SExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExp::Atom(a) => f.write_str(a),
            SExp::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SExp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SExpError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected `)` at byte {0}")]
    UnbalancedClose(usize),
    #[error("unterminated string or quoted symbol")]
    Unterminated,
    #[error("trailing input at byte {0}")]
    Trailing(usize),
    #[error("nesting too deep")]
    TooDeep,
    #[error("malformed response: {0}")]
    Malformed(String),
}

const MAX_DEPTH: usize = 512;

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b';' {
                while self.src.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self, depth: usize) -> Result<SExp, SExpError> {
        if depth > MAX_DEPTH {
            return Err(SExpError::TooDeep);
        }
        self.skip_ws();
        match self.src.get(self.pos) {
            None => Err(SExpError::Eof),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(SExpError::Eof),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(SExp::List(items));
                        }
                        Some(_) => items.push(self.read(depth + 1)?),
                    }
                }
            }
            Some(b')') => Err(SExpError::UnbalancedClose(self.pos)),
            Some(b'"') => {
                self.pos += 1;
                let mut s = Vec::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return Err(SExpError::Unterminated),
                        Some(b'"') if self.src.get(self.pos + 1) == Some(&b'"') => {
                            s.push(b'"');
                            self.pos += 2;
                        }
                        Some(b'"') => {
                            self.pos += 1;
                            return Ok(SExp::Str(String::from_utf8_lossy(&s).into_owned()));
                        }
                        Some(&c) => {
                            s.push(c);
                            self.pos += 1;
                        }
                    }
                }
            }
            Some(b'|') => {
                let start = self.pos + 1;
                let end = self.src[start..]
                    .iter()
                    .position(|&c| c == b'|')
                    .ok_or(SExpError::Unterminated)?;
                self.pos = start + end + 1;
                Ok(SExp::Atom(
                    String::from_utf8_lossy(&self.src[start..start + end]).into_owned(),
                ))
            }
            Some(_) => {
                let start = self.pos;
                while let Some(&c) = self.src.get(self.pos) {
                    if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'"' | b';' | b'|') {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(SExp::Atom(
                    String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(),
                ))
            }
        }
    }
}

/// Parses exactly one S-expression.
pub fn parse_sexp(text: &str) -> Result<SExp, SExpError> {
    parse_sexp_bytes(text.as_bytes())
}

pub fn parse_sexp_bytes(bytes: &[u8]) -> Result<SExp, SExpError> {
    let mut r = Reader { src: bytes, pos: 0 };
    let e = r.read(0)?;
    r.skip_ws();
    if r.pos < bytes.len() {
        return Err(SExpError::Trailing(r.pos));
    }
    Ok(e)
}

/// Whether `text` holds at least one complete S-expression (or atom line).
pub fn is_complete(text: &str) -> bool {
    let mut depth: i64 = 0;
    let mut in_str = false;
    let mut any = false;
    for c in text.chars() {
        if in_str {
            if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '(' => {
                depth += 1;
                any = true
            }
            ')' => depth -= 1,
            c if !c.is_whitespace() => any = true,
            _ => {}
        }
    }
    any && depth <= 0 && !in_str
}

/// Interprets a value term: numerals, `(- n)`, `true`, `false`.
pub fn parse_value(e: &SExp) -> Result<Value, SExpError> {
    match e {
        SExp::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        SExp::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        SExp::Atom(a) if !a.is_empty() && a.bytes().all(|b| b.is_ascii_digit()) => {
            Ok(Value::Int(BigInt::from_str(a).map_err(|e| SExpError::Malformed(e.to_string()))?))
        }
        SExp::List(xs) => match xs.as_slice() {
            [SExp::Atom(minus), inner] if minus == "-" => match parse_value(inner)? {
                Value::Int(n) => Ok(Value::Int(-n)),
                Value::Bool(_) => Err(SExpError::Malformed(e.to_string())),
            },
            _ => Err(SExpError::Malformed(e.to_string())),
        },
        _ => Err(SExpError::Malformed(e.to_string())),
    }
}

/// Parses a `get-value` response `((name value) ...)`.
pub fn parse_get_value(text: &str) -> Result<Vec<(String, Value)>, SExpError> {
    let e = parse_sexp(text)?;
    let SExp::List(items) = e else {
        return Err(SExpError::Malformed(text.trim().to_string()));
    };
    items
        .iter()
        .map(|item| match item {
            SExp::List(pair) if pair.len() == 2 => {
                let name = match &pair[0] {
                    SExp::Atom(a) => a.clone(),
                    other => other.to_string(),
                };
                Ok((name, parse_value(&pair[1])?))
            }
            other => Err(SExpError::Malformed(other.to_string())),
        })
        .collect()
}
