//! Reader and printer for the TPDB "old" TRS format:
//! `(VAR x y ...)`, `(RULES l -> r ...)` and ignored `(COMMENT ...)` sections.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::term::{Rule, Symbol, Term, Trs, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: symbol `{name}` used with arity {found}, previously {expected}")]
    ArityClash {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("rule {index}: left-hand side is a variable")]
    VariableLhs { index: usize },
    #[error("rule {index}: variable `{var}` occurs in the right-hand side only")]
    UnboundRhsVariable { index: usize, var: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

impl ParseError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ParseError::Unsupported(_))
    }
}

#[derive(Debug)]
struct RawTerm {
    name: String,
    args: Vec<RawTerm>,
    has_parens: bool,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

fn is_ident_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"' | '|'))
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.error(format!("expected `{c}`, found end of input"))),
        }
    }

    fn at_arrow(&self) -> bool {
        self.peek() == Some('-') && self.peek_at(1) == Some('>')
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !is_ident_char(c) || (!s.is_empty() && self.at_arrow()) {
                break;
            }
            if s.is_empty() && self.at_arrow() {
                break;
            }
            s.push(c);
            self.bump();
        }
        if s.is_empty() {
            return Err(match self.peek() {
                Some(c) => self.error(format!("expected identifier, found `{c}`")),
                None => self.error("expected identifier, found end of input"),
            });
        }
        Ok(s)
    }

    /// Skips a balanced parenthesised body; the opening paren is already consumed.
    fn skip_balanced(&mut self) -> Result<(), ParseError> {
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(self.error("unterminated section"))
    }

    fn term(&mut self, depth: usize) -> Result<RawTerm, ParseError> {
        if depth > 2000 {
            return Err(self.error("term nesting too deep"));
        }
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let name = self.ident()?;
        self.skip_ws();
        let mut args = Vec::new();
        let mut has_parens = false;
        if self.peek() == Some('(') {
            has_parens = true;
            self.bump();
            self.skip_ws();
            if self.peek() == Some(')') {
                self.bump();
            } else {
                loop {
                    args.push(self.term(depth + 1)?);
                    self.skip_ws();
                    match self.bump() {
                        Some(',') => continue,
                        Some(')') => break,
                        Some(c) => return Err(self.error(format!("expected `,` or `)`, found `{c}`"))),
                        None => return Err(self.error("unterminated argument list")),
                    }
                }
            }
        }
        Ok(RawTerm {
            name,
            args,
            has_parens,
            line,
            col,
        })
    }
}

/// Parses a TPDB old-format TRS.
pub fn parse_trs(text: &str) -> Result<Trs, ParseError> {
    let mut lx = Lexer::new(text);
    let mut vars: BTreeSet<String> = BTreeSet::new();
    let mut raw_rules: Vec<(RawTerm, RawTerm)> = Vec::new();
    loop {
        lx.skip_ws();
        if lx.peek().is_none() {
            break;
        }
        lx.expect('(')?;
        let section = lx.ident()?;
        match section.as_str() {
            "VAR" => loop {
                lx.skip_ws();
                if lx.peek() == Some(')') {
                    lx.bump();
                    break;
                }
                vars.insert(lx.ident()?);
            },
            "RULES" => loop {
                lx.skip_ws();
                if lx.peek() == Some(')') {
                    lx.bump();
                    break;
                }
                let lhs = lx.term(0)?;
                lx.skip_ws();
                if !lx.at_arrow() {
                    return Err(lx.error("expected `->`"));
                }
                lx.bump();
                lx.bump();
                if lx.peek() == Some('=') {
                    return Err(ParseError::Unsupported("relative rules (`->=`)".into()));
                }
                let rhs = lx.term(0)?;
                lx.skip_ws();
                if lx.peek() == Some('|') {
                    return Err(ParseError::Unsupported("conditional rules".into()));
                }
                raw_rules.push((lhs, rhs));
            },
            "COMMENT" => lx.skip_balanced()?,
            "STRATEGY" | "THEORY" => {
                return Err(ParseError::Unsupported(format!("({section} ...) section")))
            }
            other => return Err(ParseError::Unsupported(format!("unknown section ({other} ...)"))),
        }
    }

    let mut arities: HashMap<String, usize> = HashMap::new();
    let mut rules = Vec::with_capacity(raw_rules.len());
    for (index, (l, r)) in raw_rules.iter().enumerate() {
        let lhs = convert(l, &vars, &mut arities)?;
        let rhs = convert(r, &vars, &mut arities)?;
        if lhs.is_var() {
            return Err(ParseError::VariableLhs { index });
        }
        let lvars = lhs.var_set();
        if let Some(v) = rhs.vars().into_iter().find(|v| !lvars.contains(v)) {
            return Err(ParseError::UnboundRhsVariable {
                index,
                var: v.to_string(),
            });
        }
        rules.push(Rule::new(index, lhs, rhs));
    }
    Ok(Trs::new(rules))
}

fn convert(
    raw: &RawTerm,
    vars: &BTreeSet<String>,
    arities: &mut HashMap<String, usize>,
) -> Result<Term, ParseError> {
    if vars.contains(&raw.name) {
        if raw.has_parens {
            return Err(ParseError::Syntax {
                line: raw.line,
                col: raw.col,
                msg: format!("variable `{}` applied to arguments", raw.name),
            });
        }
        return Ok(Term::Var(Var::new(&raw.name)));
    }
    let arity = raw.args.len();
    match arities.get(&raw.name) {
        Some(&expected) if expected != arity => {
            return Err(ParseError::ArityClash {
                name: raw.name.clone(),
                expected,
                found: arity,
                line: raw.line,
                col: raw.col,
            })
        }
        Some(_) => {}
        None => {
            arities.insert(raw.name.clone(), arity);
        }
    }
    let args = raw
        .args
        .iter()
        .map(|a| convert(a, vars, arities))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::App(Symbol::new(raw.name.clone(), arity), args))
}

/// Parses a single term; identifiers in `vars` are variables.
pub fn parse_term_with_vars(text: &str, vars: &[&str]) -> Result<Term, ParseError> {
    let mut lx = Lexer::new(text);
    let raw = lx.term(0)?;
    lx.skip_ws();
    if lx.peek().is_some() {
        return Err(lx.error("trailing input after term"));
    }
    let vars: BTreeSet<String> = vars.iter().map(|s| s.to_string()).collect();
    convert(&raw, &vars, &mut HashMap::new())
}

/// Renders a TRS in the same format `parse_trs` reads.
pub fn print_trs(trs: &Trs) -> String {
    let mut vars: Vec<Var> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in &trs.rules {
        for v in r.lhs.vars().into_iter().chain(r.rhs.vars()) {
            if seen.insert(v.clone()) {
                vars.push(v);
            }
        }
    }
    let mut out = String::new();
    if !vars.is_empty() {
        out.push_str("(VAR");
        for v in &vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(")\n");
    }
    out.push_str("(RULES\n");
    for r in &trs.rules {
        let _ = writeln!(out, "  {r}");
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_input() {
        let trs = parse_trs("(VAR x) (RULES f(x) -> x)").unwrap();
        assert_eq!(trs.len(), 1);
        assert_eq!(trs.rules[0].to_string(), "f(x) -> x");
        let sig: Vec<_> = trs.signature().into_iter().collect();
        assert_eq!(sig, vec![Symbol::new("f", 1)]);
    }

    #[test]
    fn ackermann() {
        let trs = parse_trs(
            "(VAR x y) (RULES ack(0,y) -> s(y) ack(s(x),0) -> ack(x,s(0)) \
             ack(s(x),s(y)) -> ack(x,ack(s(x),y)))",
        )
        .unwrap();
        assert_eq!(trs.len(), 3);
        let sig = trs.signature();
        assert_eq!(
            sig,
            [Symbol::new("ack", 2), Symbol::new("s", 1), Symbol::new("0", 0)]
                .into_iter()
                .collect()
        );
        assert_eq!(trs.rules[1].rhs.to_string(), "ack(x,s(0))");
        assert_eq!(trs.rules[2].rhs.to_string(), "ack(x,ack(s(x),y))");
        assert_eq!(
            trs.defined_symbols(),
            [Symbol::new("ack", 2)].into_iter().collect()
        );
    }

    #[test]
    fn arity_clash() {
        let err = parse_trs("(VAR x) (RULES f(x) -> f(x,x))").unwrap_err();
        assert!(matches!(err, ParseError::ArityClash { expected: 1, found: 2, .. }), "{err}");
    }

    #[test]
    fn ill_formed_rules() {
        assert_eq!(
            parse_trs("(VAR x) (RULES x -> a)").unwrap_err(),
            ParseError::VariableLhs { index: 0 }
        );
        assert!(matches!(
            parse_trs("(VAR x y) (RULES f(x) -> y)").unwrap_err(),
            ParseError::UnboundRhsVariable { index: 0, .. }
        ));
    }

    #[test]
    fn unsupported_sections() {
        for src in [
            "(VAR x) (STRATEGY INNERMOST) (RULES f(x) -> x)",
            "(VAR x) (THEORY (AC plus)) (RULES f(x) -> x)",
            "(VAR x) (RULES f(x) ->= x)",
            "(VAR x) (RULES f(x) -> x | x == a)",
        ] {
            assert!(parse_trs(src).unwrap_err().is_unsupported(), "{src}");
        }
    }

    #[test]
    fn comments_and_empty_files() {
        let trs = parse_trs("(COMMENT this (has) \"odd\" chars, -> ok)\n(RULES)").unwrap();
        assert!(trs.is_empty());
        assert!(parse_trs("").unwrap().is_empty());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_trs("(VAR x)\n(RULES f(x -> x)").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
        assert!(parse_trs("(RULES f(a) g)").is_err());
        assert!(parse_trs("(RULES").is_err());
        assert!(parse_trs("(VAR x) (RULES x(a) -> a)").is_err());
    }

    #[test]
    fn constants_with_and_without_parens() {
        let trs = parse_trs("(RULES f(a()) -> a)").unwrap();
        assert_eq!(trs.rules[0].to_string(), "f(a) -> a");
    }

    #[test]
    fn arrow_without_spaces() {
        let trs = parse_trs("(VAR x)(RULES f(x)->x g(x)->f(x))").unwrap();
        assert_eq!(trs.len(), 2);
    }

    #[test]
    fn print_then_parse() {
        let src = "(VAR x y) (RULES plus(0,y) -> y plus(s(x),y) -> s(plus(x,y)))";
        let trs = parse_trs(src).unwrap();
        assert_eq!(parse_trs(&print_trs(&trs)).unwrap(), trs);
    }
}
