//! Line-oriented KB text format.
//!
//! ```text
//! # comment
//! pred partOf/2
//! pred Wheel/1
//! Wheel(b1)
//! forall x,y: partOf(x,y) -> ~partOf(y,x)
//! ```
//!
//! Binding strength, tightest first: `~`, `&`, `|`, `->` (right associative).
//! A quantifier body extends to the end of the enclosing group. An identifier
//! bound by an enclosing quantifier is a variable, anything else is a constant;
//! names starting with `?` are always variables and must be bound.
//! Declarations may appear anywhere in the file.

use std::collections::HashMap;

use super::syntax::{Formula, KnowledgeBase, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Slash,
    Not,
    And,
    Or,
    Implies,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '/' => Some(Tok::Slash),
            '~' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, column });
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token {
                tok: Tok::Implies,
                column,
            });
            i += 2;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '?' || is_ident_char(c) {
            let start = i;
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            if text == "?" {
                return Err(parse_err(line_no, column, "`?` must be followed by a name"));
            }
            out.push(Token {
                tok: Tok::Ident(text),
                column,
            });
        } else {
            return Err(parse_err(line_no, column, &format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn parse_err(line: usize, column: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column,
        message: message.to_string(),
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_column: usize,
    arities: &'a HashMap<String, usize>,
    bound: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn error(&self, message: &str) -> Error {
        parse_err(self.line, self.column(), message)
    }

    fn located(&self, column: usize, source: Error) -> Error {
        Error::Located {
            line: self.line,
            column,
            source: Box::new(source),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize)> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, column))
            }
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            if kw == "forall" || kw == "exists" {
                return self.quantified();
            }
        }
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> Result<Formula> {
        let (kw, _) = self.ident("quantifier")?;
        let mut vars = vec![self.ident("variable name")?.0];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            vars.push(self.ident("variable name")?.0);
        }
        self.expect(Tok::Colon, "`:` after quantified variables")?;
        let depth = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.formula();
        self.bound.truncate(depth);
        let body = body?;
        Ok(if kw == "forall" {
            Formula::forall(vars, body)
        } else {
            Formula::exists(vars, body)
        })
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(kw)) if kw == "forall" || kw == "exists" => self.quantified(),
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.error("expected a formula")),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let (name, column) = self.ident("predicate name")?;
        self.expect(Tok::LParen, "`(` after predicate name")?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`)` closing the argument list")?;
        match self.arities.get(&name) {
            None => Err(self.located(column, Error::UnknownPredicate(name))),
            Some(&a) if a != args.len() => Err(self.located(
                column,
                Error::ArityMismatch {
                    name,
                    expected: a,
                    got: args.len(),
                },
            )),
            Some(_) => Ok(Formula::Atom { predicate: name, args }),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let (name, column) = self.ident("term")?;
        if self.bound.contains(&name) {
            Ok(Term::Var(name))
        } else if name.starts_with('?') {
            Err(self.located(column, Error::UnboundVariable(name)))
        } else {
            Ok(Term::Const(name))
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn parse_declaration(tokens: &[Token], line: usize) -> Result<(String, usize)> {
    let bad = |col: usize| parse_err(line, col, "declaration must look like `pred Name/arity`");
    match tokens {
        [_, Token { tok: Tok::Ident(name), .. }, Token { tok: Tok::Slash, .. }, Token {
            tok: Tok::Ident(arity),
            column,
        }] => {
            let arity: usize = arity.parse().map_err(|_| bad(*column))?;
            if arity == 0 {
                return Err(parse_err(line, *column, "arity must be at least 1"));
            }
            Ok((name.clone(), arity))
        }
        _ => Err(bad(tokens.get(1).map_or(1, |t| t.column))),
    }
}

/// Parses a whole KB file.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase> {
    let mut kb = KnowledgeBase::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = strip_comment(raw);
        let tokens = lex(content, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        if matches!(&tokens[0].tok, Tok::Ident(kw) if kw == "pred") {
            let (name, arity) = parse_declaration(&tokens, line_no)?;
            kb.declare(name, arity).map_err(|e| Error::Located {
                line: line_no,
                column: 1,
                source: Box::new(e),
            })?;
        } else {
            lines.push((line_no, content.chars().count() + 1, tokens));
        }
    }
    let arities: HashMap<String, usize> = kb
        .predicates()
        .iter()
        .map(|p| (p.name.clone(), p.arity))
        .collect();
    for (line, end_column, tokens) in lines {
        let mut p = Parser {
            tokens,
            pos: 0,
            line,
            end_column,
            arities: &arities,
            bound: Vec::new(),
        };
        let f = p.formula()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        kb.add(f).map_err(|e| Error::Located {
            line,
            column: 1,
            source: Box::new(e),
        })?;
    }
    Ok(kb)
}

/// Parses one formula against the declarations of `kb`. Free `?`-variables are
/// allowed here, for evaluation with explicit bindings.
pub fn parse_formula(kb: &KnowledgeBase, text: &str, free: &[&str]) -> Result<Formula> {
    let arities = kb
        .predicates()
        .iter()
        .map(|p| (p.name.clone(), p.arity))
        .collect();
    let mut p = Parser {
        tokens: lex(text, 1)?,
        pos: 0,
        line: 1,
        end_column: text.chars().count() + 1,
        arities: &arities,
        bound: free.iter().map(|s| s.to_string()).collect(),
    };
    let f = p.formula()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}
