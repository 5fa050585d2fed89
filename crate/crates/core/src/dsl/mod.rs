//! Text format for series and set systems.
//!
//! ```text
//! # binary trees
//! T = x * (1 + T^2);
//! ```
//!
//! Statements end in `;`. `mode sets;` switches equations to the set form
//! `T = {1} | {1} + {2}*T;`. `vars A, B;` fixes the variable order, which
//! otherwise follows the left-hand sides. `set J = 4 + 3*N;` names an index
//! set for later use.

mod lexer;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::epset::EpSet;
use crate::index::{Enumerated, IndexSet};
use crate::pseries::{Construction, Expr, PsSystem};
use crate::setsys::{GammaTerm, SetSystem};
use crate::{RatExpr, RatSystem, Rational, Span};

use lexer::{Tok, Token};

pub use printer::{print_expr, print_index, print_series, print_set_equation, print_sets};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownName,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Series,
    Sets,
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Series(RatSystem),
    Sets(SetSystem),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub system: System,
    /// Named sets from `set` declarations.
    pub sets: BTreeMap<String, IndexSet>,
    /// Position of each variable's equation.
    pub spans: Vec<Span>,
    /// Some index set is only known by enumeration (`Primes`).
    pub enumerated: bool,
}

impl Document {
    pub fn mode(&self) -> Mode {
        match self.system {
            System::Series(_) => Mode::Series,
            System::Sets(_) => Mode::Sets,
        }
    }

    pub fn variables(&self) -> &[String] {
        match &self.system {
            System::Series(s) => s.variables(),
            System::Sets(s) => s.variables(),
        }
    }
}

const KEYWORDS: &[&str] = &["set", "vars", "mode", "x", "N", "P", "Even", "PosEven", "Odd", "Primes", "Seq", "MSet", "Cycle", "DCycle"];

fn builtin(name: &str) -> Option<IndexSet> {
    Some(match name {
        "N" => EpSet::naturals().into(),
        "P" => EpSet::positives().into(),
        "Even" => EpSet::evens().into(),
        "PosEven" => EpSet::positive_evens().into(),
        "Odd" => EpSet::odds().into(),
        "Primes" => IndexSet::Enumerated(Enumerated::Primes),
        _ => return None,
    })
}

fn construction(name: &str) -> Option<Construction> {
    Some(match name {
        "Seq" => Construction::Seq,
        "MSet" => Construction::MSet,
        "Cycle" => Construction::Cycle,
        "DCycle" => Construction::DCycle,
        _ => return None,
    })
}

fn uses_enumerated(e: &RatExpr) -> bool {
    match e {
        Expr::Const(_) | Expr::X | Expr::Var(_) => false,
        Expr::Sum(v) | Expr::Product(v) => v.iter().any(uses_enumerated),
        Expr::Pow(b, _) => uses_enumerated(b),
        Expr::Construct { index, arg, .. } => {
            matches!(index, Some(IndexSet::Enumerated(_))) || uses_enumerated(arg)
        }
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let tokens = lexer::lex(text)?;
    Parser { tokens, pos: 0, sets: BTreeMap::new(), vars: Vec::new(), declared: false }.document()
}

/// Parses an index-set expression such as `{1,2} | 4+3*N`.
pub fn parse_index(text: &str) -> Result<IndexSet, ParseError> {
    let tokens = lexer::lex(text)?;
    let mut p = Parser { tokens, pos: 0, sets: BTreeMap::new(), vars: Vec::new(), declared: false };
    let s = p.set_expr()?;
    p.expect_eof()?;
    Ok(s)
}

enum Raw {
    Series(RatExpr),
    Sets(Vec<GammaTerm>),
}

// In equation bodies, set-valued pieces and variable references.
enum Factor {
    Set(IndexSet),
    Var(IndexSet, usize),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    sets: BTreeMap<String, IndexSet>,
    vars: Vec<String>,
    declared: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind, message: impl Into<String>, span: Span) -> Result<T, ParseError> {
        Err(ParseError { kind, message: message.into(), span })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Number(s) => format!("`{}`", s),
            Tok::Punct(c) => format!("`{}`", c),
            Tok::Eof => "end of input".into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            return Ok(());
        }
        let t = self.peek().clone();
        self.err(ParseErrorKind::Syntax, format!("expected `{}`, found {}", c, Self::describe(&t)), self.span())
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => {
                let m = format!("unexpected {}", Self::describe(t));
                self.err(ParseErrorKind::Syntax, m, self.span())
            }
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        let span = self.span();
        match self.bump().tok {
            Tok::Ident(s) => Ok((s, span)),
            t => self.err(ParseErrorKind::Syntax, format!("expected a name, found {}", Self::describe(&t)), span),
        }
    }

    fn number(&mut self) -> Result<BigInt, ParseError> {
        let span = self.span();
        match self.bump().tok {
            Tok::Number(s) => Ok(s.parse().expect("digits")),
            t => self.err(ParseErrorKind::Syntax, format!("expected a number, found {}", Self::describe(&t)), span),
        }
    }

    fn small(&mut self) -> Result<u64, ParseError> {
        let span = self.span();
        let n = self.number()?;
        u64::try_from(&n).or_else(|_| self.err(ParseErrorKind::Invalid, format!("{} is too large", n), span))
    }

    fn fresh_name(&self, name: &str, span: Span) -> Result<(), ParseError> {
        if KEYWORDS.contains(&name) {
            return self.err(ParseErrorKind::Invalid, format!("`{}` is reserved", name), span);
        }
        if self.sets.contains_key(name) {
            return self.err(ParseErrorKind::Invalid, format!("`{}` is already a set", name), span);
        }
        Ok(())
    }

    fn document(mut self) -> Result<Document, ParseError> {
        let mut mode: Option<Mode> = None;
        let mut raw: Vec<(String, Span, Raw)> = Vec::new();
        loop {
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(k) if k == "mode" && *self.peek_at(1) != Tok::Punct('=') => {
                    self.bump();
                    if mode.is_some() || !raw.is_empty() {
                        return self.err(ParseErrorKind::Invalid, "`mode` must come once, before any equation", span);
                    }
                    let (m, ms) = self.ident()?;
                    mode = Some(match m.as_str() {
                        "series" => Mode::Series,
                        "sets" => Mode::Sets,
                        _ => return self.err(ParseErrorKind::Invalid, format!("unknown mode `{}`", m), ms),
                    });
                    self.expect(';')?;
                }
                Tok::Ident(k) if k == "vars" && *self.peek_at(1) != Tok::Punct('=') => {
                    self.bump();
                    if self.declared || !raw.is_empty() {
                        return self.err(ParseErrorKind::Invalid, "`vars` must come once, before any equation", span);
                    }
                    self.declared = true;
                    loop {
                        let (v, vs) = self.ident()?;
                        self.fresh_name(&v, vs)?;
                        if self.vars.contains(&v) {
                            return self.err(ParseErrorKind::Invalid, format!("`{}` declared twice", v), vs);
                        }
                        self.vars.push(v);
                        if !self.eat(',') {
                            break;
                        }
                    }
                    self.expect(';')?;
                }
                Tok::Ident(k) if k == "set" && *self.peek_at(1) != Tok::Punct('=') => {
                    self.bump();
                    let (name, ns) = self.ident()?;
                    self.fresh_name(&name, ns)?;
                    if self.vars.contains(&name) {
                        return self.err(ParseErrorKind::Invalid, format!("`{}` is already a variable", name), ns);
                    }
                    self.expect('=')?;
                    let s = self.set_expr()?;
                    self.expect(';')?;
                    self.sets.insert(name, s);
                }
                Tok::Ident(_) => {
                    if !self.declared && raw.is_empty() {
                        self.collect_lhs();
                    }
                    let (name, ns) = self.ident()?;
                    if !self.vars.contains(&name) {
                        return self.err(ParseErrorKind::UnknownName, format!("`{}` is not a declared variable", name), ns);
                    }
                    if raw.iter().any(|(n, _, _)| *n == name) {
                        return self.err(ParseErrorKind::Invalid, format!("second equation for `{}`", name), ns);
                    }
                    self.expect('=')?;
                    let body = match mode.unwrap_or(Mode::Series) {
                        Mode::Series => Raw::Series(self.series_expr()?),
                        Mode::Sets => Raw::Sets(self.set_equation()?),
                    };
                    self.expect(';')?;
                    raw.push((name, ns, body));
                }
                t => {
                    let m = format!("expected a statement, found {}", Self::describe(&t));
                    return self.err(ParseErrorKind::Syntax, m, span);
                }
            }
        }
        if self.vars.is_empty() {
            return self.err(ParseErrorKind::Invalid, "no equations", self.span());
        }
        let mut ordered = Vec::new();
        let mut spans = Vec::new();
        for v in &self.vars {
            match raw.iter().position(|(n, _, _)| n == v) {
                Some(i) => {
                    let (_, s, _) = &raw[i];
                    spans.push(*s);
                    ordered.push(i);
                }
                None => return self.err(ParseErrorKind::Invalid, format!("no equation for `{}`", v), self.span()),
            }
        }
        let mut bodies: Vec<Option<Raw>> = raw.into_iter().map(|(_, _, b)| Some(b)).collect();
        let bodies: Vec<Raw> = ordered.iter().map(|&i| bodies[i].take().unwrap()).collect();
        let invalid = |m: String| ParseError { kind: ParseErrorKind::Invalid, message: m, span: spans[0] };
        let system = match mode.unwrap_or(Mode::Series) {
            Mode::Series => {
                let eqs = bodies.into_iter().map(|b| match b {
                    Raw::Series(e) => e,
                    Raw::Sets(_) => unreachable!(),
                });
                System::Series(PsSystem::new(self.vars.clone(), eqs.collect()).map_err(|e| invalid(e.to_string()))?)
            }
            Mode::Sets => {
                let eqs = bodies.into_iter().map(|b| match b {
                    Raw::Sets(t) => t,
                    Raw::Series(_) => unreachable!(),
                });
                let sp = spans.iter().map(|s| Some(*s)).collect();
                System::Sets(
                    SetSystem::with_spans(self.vars.clone(), eqs.collect(), sp).map_err(|e| invalid(e.to_string()))?,
                )
            }
        };
        let enumerated = match &system {
            System::Series(s) => s.equations().iter().any(uses_enumerated),
            System::Sets(s) => s.uses_enumerated(),
        };
        Ok(Document { system, sets: self.sets, spans, enumerated })
    }

    // Without a `vars` line, variables are the left-hand sides in order.
    fn collect_lhs(&mut self) {
        let mut depth = 0i32;
        let mut at_start = true;
        for i in self.pos..self.tokens.len() {
            match &self.tokens[i].tok {
                Tok::Ident(n)
                    if at_start
                        && depth == 0
                        && self.tokens.get(i + 1).map(|t| &t.tok) == Some(&Tok::Punct('='))
                        && !KEYWORDS.contains(&n.as_str())
                        && !self.sets.contains_key(n)
                        && !self.vars.contains(n) =>
                {
                    self.vars.push(n.clone());
                }
                _ => {}
            }
            match &self.tokens[i].tok {
                Tok::Punct('(' | '{' | '[') => depth += 1,
                Tok::Punct(')' | '}' | ']') => depth -= 1,
                _ => {}
            }
            at_start = matches!(self.tokens[i].tok, Tok::Punct(';'));
        }
    }

    // set_expr := set_sum { "|" set_sum }
    fn set_expr(&mut self) -> Result<IndexSet, ParseError> {
        let start = self.span();
        let mut acc = self.set_sum()?;
        while self.eat('|') {
            let rhs = self.set_sum()?;
            acc = IndexSet::Periodic(self.periodic(&acc, start)?.union(&self.periodic(&rhs, start)?));
        }
        Ok(acc)
    }

    fn set_sum(&mut self) -> Result<IndexSet, ParseError> {
        let start = self.span();
        let mut acc = self.set_atom()?;
        while self.eat('+') {
            let rhs = self.set_atom()?;
            acc = IndexSet::Periodic(self.periodic(&acc, start)?.sum(&self.periodic(&rhs, start)?));
        }
        Ok(acc)
    }

    fn periodic(&self, s: &IndexSet, span: Span) -> Result<EpSet, ParseError> {
        match s {
            IndexSet::Periodic(p) => Ok(p.clone()),
            IndexSet::Enumerated(e) => {
                self.err(ParseErrorKind::Invalid, format!("{} cannot be combined with other sets", e.name()), span)
            }
        }
    }

    // `n*S` scales S unless S is a variable, which makes it an exponent.
    fn set_atom(&mut self) -> Result<IndexSet, ParseError> {
        if let (Tok::Number(_), Tok::Punct('*')) = (self.peek(), self.peek_at(1)) {
            let exponent = matches!(self.peek_at(2), Tok::Ident(n) if self.vars.contains(n));
            if !exponent {
                let n = self.small()?;
                self.bump();
                let span = self.span();
                let inner = self.set_atom()?;
                return Ok(IndexSet::Periodic(self.periodic(&inner, span)?.scalar_mul(n)));
            }
        }
        self.set_primary()
    }

    fn set_primary(&mut self) -> Result<IndexSet, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(_) => Ok(EpSet::singleton(self.small()?).into()),
            Tok::Punct('{') => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat('}') {
                    loop {
                        items.push(self.small()?);
                        if !self.eat(',') {
                            break;
                        }
                    }
                    self.expect('}')?;
                }
                Ok(EpSet::finite(items).into())
            }
            Tok::Punct('(') => {
                self.bump();
                let s = self.set_expr()?;
                self.expect(')')?;
                Ok(s)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(s) = builtin(&name).or_else(|| self.sets.get(&name).cloned()) {
                    return Ok(s);
                }
                self.err(ParseErrorKind::UnknownName, format!("unknown set `{}`", name), span)
            }
            t => self.err(ParseErrorKind::Syntax, format!("expected a set, found {}", Self::describe(&t)), span),
        }
    }

    // set_equation := set_term { "|" set_term }
    fn set_equation(&mut self) -> Result<Vec<GammaTerm>, ParseError> {
        let mut terms = Vec::new();
        loop {
            if let Some(t) = self.set_term()? {
                terms.push(t);
            }
            if !self.eat('|') {
                break;
            }
        }
        Ok(terms)
    }

    // None for a term with an empty base, which contributes nothing.
    fn set_term(&mut self) -> Result<Option<GammaTerm>, ParseError> {
        let k = self.vars.len();
        let mut base = EpSet::zero();
        let mut exps: Vec<IndexSet> = vec![IndexSet::absent(); k];
        loop {
            let span = self.span();
            match self.set_factor()? {
                Factor::Set(s) => base = base.sum(&self.periodic(&s, span)?),
                Factor::Var(e, j) => {
                    exps[j] = if exps[j].is_absent() {
                        e
                    } else {
                        let a = self.periodic(&exps[j], span)?;
                        IndexSet::Periodic(a.sum(&self.periodic(&e, span)?))
                    };
                }
            }
            if !self.eat('+') {
                break;
            }
        }
        if base.is_empty() {
            return Ok(None);
        }
        if let Some(j) = exps.iter().position(IndexSet::is_empty) {
            return self.err(ParseErrorKind::Invalid, format!("empty exponent set on `{}`", self.vars[j]), self.span());
        }
        Ok(Some(GammaTerm { base, exponents: exps }))
    }

    fn set_factor(&mut self) -> Result<Factor, ParseError> {
        if let Tok::Ident(n) = self.peek() {
            if let Some(j) = self.vars.iter().position(|v| v == n) {
                self.bump();
                return Ok(Factor::Var(IndexSet::single(1), j));
            }
        }
        let s = self.set_atom()?;
        if *self.peek() == Tok::Punct('*') {
            self.bump();
            let (n, span) = self.ident()?;
            return match self.vars.iter().position(|v| *v == n) {
                Some(j) => Ok(Factor::Var(s, j)),
                None => self.err(ParseErrorKind::UnknownName, format!("`{}` is not a variable", n), span),
            };
        }
        Ok(Factor::Set(s))
    }

    // series := product { "+" product }
    fn series_expr(&mut self) -> Result<RatExpr, ParseError> {
        let mut terms = vec![self.series_product()?];
        while self.eat('+') {
            terms.push(self.series_product()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn series_product(&mut self) -> Result<RatExpr, ParseError> {
        let mut factors = vec![self.series_power()?];
        while self.eat('*') {
            factors.push(self.series_power()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn series_power(&mut self) -> Result<RatExpr, ParseError> {
        let base = self.series_primary()?;
        if self.eat('^') {
            let span = self.span();
            let n = self.small()?;
            let n = u32::try_from(n).or_else(|_| self.err(ParseErrorKind::Invalid, "exponent too large", span))?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn series_primary(&mut self) -> Result<RatExpr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(_) => {
                let num = self.number()?;
                let mut den = BigInt::from(1);
                if self.eat('/') {
                    let ds = self.span();
                    den = self.number()?;
                    if den.is_zero() {
                        return self.err(ParseErrorKind::Invalid, "zero denominator", ds);
                    }
                }
                Ok(Expr::Const(Rational::new(num, den)))
            }
            Tok::Punct('-') => self.err(ParseErrorKind::Invalid, "coefficients must be nonnegative", span),
            Tok::Punct('(') => {
                self.bump();
                let e = self.series_expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "x" {
                    return Ok(Expr::X);
                }
                if let Some(j) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(j));
                }
                if let Some(kind) = construction(&name) {
                    let index = if self.eat('[') {
                        let s = self.set_expr()?;
                        self.expect(']')?;
                        Some(s)
                    } else {
                        None
                    };
                    self.expect('(')?;
                    let arg = self.series_expr()?;
                    self.expect(')')?;
                    return Ok(Expr::construct(kind, index, arg));
                }
                self.err(ParseErrorKind::UnknownName, format!("unknown name `{}`", name), span)
            }
            t => self.err(ParseErrorKind::Syntax, format!("expected a term, found {}", Self::describe(&t)), span),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_series() {
        let d = parse("# trees\nT = x * (1 + T^2);\n").unwrap();
        let System::Series(s) = &d.system else { panic!() };
        assert_eq!(s.variables(), ["T"]);
        let back = parse(&print_series(s)).unwrap();
        assert_eq!(back.system, d.system);
    }

    #[test]
    fn set_mode() {
        let d = parse("mode sets;\nT = {1} | {1} + {2}*T;").unwrap();
        let System::Sets(s) = &d.system else { panic!() };
        assert_eq!(s.equations()[0].len(), 2);
        assert_eq!(print_set_equation(s, 0), "T = {1} | {1} + {2}*T;");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("T = x * (1 + T^2;").unwrap_err();
        assert_eq!(e.span, Span { line: 1, column: 17 });
        let e = parse("vars A;\nA = x + B;").unwrap_err();
        assert_eq!((e.kind, e.span), (ParseErrorKind::UnknownName, Span { line: 2, column: 9 }));
        let e = parse("A = x + -1;").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Invalid);
    }

    #[test]
    fn index_sets() {
        assert_eq!(parse_index("4 + 3*N").unwrap(), EpSet::progression(4, 3).into());
        assert_eq!(parse_index("{1,2} | 4+3*N").unwrap().to_string(), "{1,2} | 4+3*N");
        assert!(parse_index("Primes | {1}").is_err());
    }
}
