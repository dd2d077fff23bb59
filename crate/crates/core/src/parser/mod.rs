//! Reader for `.hyrql` source files.
//!
//! ```text
//! file     ::= item*
//! item     ::= "type" IDENT "=" ctor ("|" ctor)* ";"
//!            | "let" IDENT [":" type] "=" term ";"
//!            | "main" term [";"]
//! ctor     ::= IDENT ["(" type ("," type)* ")"]
//! type     ::= btype [("-o" | "=>" | "<->") type]
//! btype    ::= "Qbit" | "()" | IDENT | "[" type "]" | "(" type ")" | "(" type ("," type)+ ")"
//! term     ::= weighted (("+" | "-") weighted)*
//! weighted ::= amp "*" cons | "-" weighted | cons
//! cons     ::= app ["::" cons]
//! app      ::= arg+
//! arg      ::= CONS1 arg | CONSn "(" term ("," term)* ")" | atom
//! atom     ::= IDENT | NUMBER | "|0>" | "|1>" | "()" | "[" [term ("," term)*] "]"
//!            | "(" term ")" | "(" term ("," term)+ ")"
//!            | "\" IDENT+ "." term | "letrec" IDENT IDENT+ "=" term
//!            | "unit" arg | "shape" arg
//!            | "qcase" term "{" "0" "->" term "," "1" "->" term [","] "}"
//!            | "match" term "{" branch ("," branch)* [","] "}"
//!            | "@orthogonal" (qcase | "(" term ")")
//! branch   ::= pattern "->" term
//! pattern  ::= IDENT "::" IDENT | "(" IDENT "," IDENT ")" | "()" | "[]" | "0"
//!            | CONS ["(" IDENT ("," IDENT)* ")" | IDENT]
//! amp      ::= aterm (("+" | "-") aterm)*
//! aterm    ::= afactor (("*" | "/") afactor)*
//! afactor  ::= "-" afactor | NUMBER | "i" | "sqrt2" | "(" amp ")"
//! ```
//!
//! Numerals in term position stand for `S^n 0`. Definitions are inlined at
//! their use sites and every binder receives a fresh internal name.

pub mod lexer;
pub mod pretty;

use std::collections::BTreeMap;

use num_traits::One;
use thiserror::Error;

use crate::ast::{cons, fresh, Branch, Name, Registry, RegistryError, Term, Type};
use crate::scalar::Rational;
use crate::{Amplitude, BigRational};

pub use lexer::Pos;
use lexer::{lex, Tok, Token};
pub use pretty::{pretty, pretty_type};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnknownConstructor,
    Arity,
    Amplitude,
    Declaration,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
    pub msg: String,
}

#[derive(Debug, Clone)]
pub struct Definition {
    pub name: String,
    pub ty: Option<Type>,
    pub term: Term,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub registry: Registry,
    pub definitions: Vec<Definition>,
    pub main: Option<Term>,
}

impl SourceFile {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    /// Parses `text` as a term that may mention this file's definitions.
    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        let mut p = Parser::new(text, self.registry.clone())?;
        for d in &self.definitions {
            p.defs.insert(d.name.clone(), d.term.clone());
        }
        let t = p.term()?;
        p.expect_eof()?;
        Ok(t)
    }

    /// Parses a juxtaposed argument list `v1 v2 ..`.
    pub fn parse_args(&self, text: &str) -> Result<Vec<Term>, ParseError> {
        let mut p = Parser::new(text, self.registry.clone())?;
        for d in &self.definitions {
            p.defs.insert(d.name.clone(), d.term.clone());
        }
        let mut out = Vec::new();
        while p.starts_arg() {
            out.push(p.arg()?);
        }
        p.expect_eof()?;
        Ok(out)
    }
}

pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    parse_with(text, Registry::new())
}

pub fn parse_with(text: &str, registry: Registry) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(text, registry)?;
    p.file()
}

/// Parses a single term against `registry`.
pub fn parse_term(text: &str, registry: &Registry) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, registry.clone())?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_type(text: &str, registry: &Registry) -> Result<Type, ParseError> {
    let mut p = Parser::new(text, registry.clone())?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_amplitude(text: &str) -> Result<Amplitude, ParseError> {
    let mut p = Parser::new(text, Registry::new())?;
    let pos = p.pos();
    match p.amp()? {
        Some(a) => {
            p.expect_eof()?;
            Ok(a)
        }
        None => Err(ParseError {
            pos,
            kind: ParseErrorKind::Amplitude,
            msg: "expected an amplitude".into(),
        }),
    }
}

/// Nat literals above this bound are rejected rather than unfolded.
const MAX_NUMERAL: usize = 100_000;

pub(crate) struct Parser {
    toks: Vec<Token>,
    idx: usize,
    pub(crate) registry: Registry,
    defs: BTreeMap<String, Term>,
    scope: Vec<(String, Name)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(text: &str, registry: Registry) -> PResult<Self> {
        let toks = lex(text).map_err(|(pos, msg)| ParseError {
            pos,
            kind: ParseErrorKind::Lexical,
            msg,
        })?;
        Ok(Parser {
            toks,
            idx: 0,
            registry,
            defs: BTreeMap::new(),
            scope: Vec::new(),
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn mark(&self) -> usize {
        self.idx
    }

    pub(crate) fn reset(&mut self, mark: usize) {
        self.idx = mark;
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn err<T>(&self, kind: ParseErrorKind, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            pos: self.pos(),
            kind,
            msg: msg.into(),
        })
    }

    pub(crate) fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(
                ParseErrorKind::Syntax,
                format!("expected {t}, found {}", self.peek()),
            )
        }
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        self.expect(Tok::Eof)
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected an identifier, found {other}"),
            ),
        }
    }

    fn binder_name(&mut self) -> PResult<String> {
        let pos = self.pos();
        let name = self.ident()?;
        if self.registry.is_constructor(&name) || is_keyword(&name) {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::Syntax,
                msg: format!("`{name}` cannot be used as a variable"),
            });
        }
        Ok(name)
    }

    fn file(&mut self) -> PResult<SourceFile> {
        let mut definitions: Vec<Definition> = Vec::new();
        let mut main = None;
        loop {
            if self.eat(&Tok::Eof) || *self.peek() == Tok::Eof {
                break;
            }
            if self.is_kw("type") {
                self.bump();
                self.type_decl()?;
            } else if self.is_kw("let") {
                self.bump();
                let pos = self.pos();
                let name = self.binder_name()?;
                if self.defs.contains_key(&name) {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Declaration,
                        msg: format!("`{name}` is already defined"),
                    });
                }
                let ty = if self.eat(&Tok::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                self.expect(Tok::Eq)?;
                let term = self.term()?;
                self.expect(Tok::Semi)?;
                self.defs.insert(name.clone(), term.clone());
                definitions.push(Definition { name, ty, term });
            } else if self.is_kw("main") {
                self.bump();
                if main.is_some() {
                    return self.err(ParseErrorKind::Declaration, "duplicate `main`");
                }
                main = Some(self.term()?);
                self.eat(&Tok::Semi);
            } else {
                return self.err(
                    ParseErrorKind::Syntax,
                    format!("expected `type`, `let` or `main`, found {}", self.peek()),
                );
            }
        }
        Ok(SourceFile {
            registry: self.registry.clone(),
            definitions,
            main,
        })
    }

    pub(crate) fn type_decl(&mut self) -> PResult<()> {
        let pos = self.pos();
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let mut ctors = Vec::new();
        loop {
            let c = self.ident()?;
            let mut args = Vec::new();
            if self.eat(&Tok::LParen) {
                loop {
                    args.push(self.ty_allowing(&name)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            ctors.push((c, args));
            if !self.eat(&Tok::Pipe) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        self.registry
            .declare(&name, ctors)
            .map_err(|e: RegistryError| ParseError {
                pos,
                kind: ParseErrorKind::Declaration,
                msg: e.to_string(),
            })
    }

    pub(crate) fn ty(&mut self) -> PResult<Type> {
        self.ty_allowing("")
    }

    fn ty_allowing(&mut self, pending: &str) -> PResult<Type> {
        let lhs = self.btype(pending)?;
        let kind = match self.peek() {
            Tok::Lolli => crate::ast::ArrowKind::Linear,
            Tok::FatArrow => crate::ast::ArrowKind::Classical,
            Tok::Biarrow => crate::ast::ArrowKind::Unitary,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.ty_allowing(pending)?;
        Ok(Type::arrow(kind, lhs, rhs))
    }

    fn btype(&mut self, pending: &str) -> PResult<Type> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) if s == "Qbit" => Ok(Type::Qbit),
            Tok::Ident(s) if s == "()" => Ok(Type::Unit),
            Tok::Ident(s) => {
                if s == pending || self.registry.type_decl(&s).is_some() {
                    Ok(Type::Named(s))
                } else {
                    Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Declaration,
                        msg: format!("unknown type `{s}`"),
                    })
                }
            }
            Tok::LBracket => {
                let t = self.ty_allowing(pending)?;
                self.expect(Tok::RBracket)?;
                Ok(Type::list(t))
            }
            Tok::LParen => {
                if self.eat(&Tok::RParen) {
                    return Ok(Type::Unit);
                }
                let mut items = vec![self.ty_allowing(pending)?];
                while self.eat(&Tok::Comma) {
                    items.push(self.ty_allowing(pending)?);
                }
                self.expect(Tok::RParen)?;
                Ok(right_nest(items, Type::tensor))
            }
            other => Err(ParseError {
                pos,
                kind: ParseErrorKind::Syntax,
                msg: format!("expected a type, found {other}"),
            }),
        }
    }

    // ---- amplitudes -------------------------------------------------------

    /// Speculatively reads an amplitude expression. `Ok(None)` means the
    /// input does not start with one and nothing was consumed.
    pub(crate) fn amp(&mut self) -> PResult<Option<Amplitude>> {
        let save = self.idx;
        let Some(mut acc) = self.aterm()? else {
            self.idx = save;
            return Ok(None);
        };
        loop {
            let before = self.idx;
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            match self.aterm()? {
                Some(t) => {
                    if neg {
                        acc -= t
                    } else {
                        acc += t
                    }
                }
                None => {
                    self.idx = before;
                    break;
                }
            }
        }
        Ok(Some(acc))
    }

    fn aterm(&mut self) -> PResult<Option<Amplitude>> {
        let Some(mut acc) = self.afactor()? else {
            return Ok(None);
        };
        loop {
            let before = self.idx;
            let div = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            match self.afactor()? {
                Some(f) => {
                    if div {
                        acc = acc.checked_div(&f).map_err(|_| ParseError {
                            pos,
                            kind: ParseErrorKind::Amplitude,
                            msg: "division by zero in amplitude".into(),
                        })?;
                    } else {
                        acc *= f;
                    }
                }
                None => {
                    self.idx = before;
                    break;
                }
            }
        }
        Ok(Some(acc))
    }

    fn afactor(&mut self) -> PResult<Option<Amplitude>> {
        let save = self.idx;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                match self.afactor()? {
                    Some(a) => Ok(Some(-a)),
                    None => {
                        self.idx = save;
                        Ok(None)
                    }
                }
            }
            Tok::Number(d) => {
                self.bump();
                let r = BigRational::from_decimal(&d).expect("lexer yields digits");
                Ok(Some(Amplitude::from_rational(r)))
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Ok(Some(Amplitude::i()))
            }
            Tok::Ident(s) if s == "sqrt2" => {
                self.bump();
                Ok(Some(Amplitude::sqrt2()))
            }
            Tok::Ident(s) if is_unsupported_constant(&s) => Err(ParseError {
                pos,
                kind: ParseErrorKind::Amplitude,
                msg: format!("amplitude `{s}` lies outside Q(ζ8); only i and sqrt2 are available"),
            }),
            Tok::LParen => {
                self.bump();
                match self.amp()? {
                    Some(a) if *self.peek() == Tok::RParen => {
                        self.bump();
                        Ok(Some(a))
                    }
                    _ => {
                        self.idx = save;
                        Ok(None)
                    }
                }
            }
            _ => Ok(None),
        }
    }

    // ---- terms ------------------------------------------------------------

    pub(crate) fn term(&mut self) -> PResult<Term> {
        let (first_amp, first) = self.weighted()?;
        let mut items = vec![(first_amp.clone(), first)];
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let (a, t) = self.weighted()?;
            let a = a.unwrap_or_else(Amplitude::one);
            items.push((Some(if neg { -a } else { a }), t));
        }
        if items.len() == 1 && items[0].0.is_none() {
            return Ok(items.pop().expect("one item").1);
        }
        Ok(Term::sum(
            items
                .into_iter()
                .map(|(a, t)| (a.unwrap_or_else(Amplitude::one), t))
                .collect(),
        ))
    }

    fn weighted(&mut self) -> PResult<(Option<Amplitude>, Term)> {
        let save = self.idx;
        // `(a)*t` is how amplitudes print; prefer that reading
        if *self.peek() == Tok::LParen {
            if let Some(a) = self.afactor()? {
                if self.eat(&Tok::Star) {
                    let t = self.cons_level()?;
                    return Ok((Some(a), t));
                }
            }
            self.idx = save;
        }
        if let Some(a) = self.amp()? {
            if self.eat(&Tok::Star) {
                let t = self.cons_level()?;
                return Ok((Some(a), t));
            }
        }
        // `(a)*0`: the numeral is the term, not a factor
        self.idx = save;
        if let Some(a) = self.afactor()? {
            if self.eat(&Tok::Star) {
                let t = self.cons_level()?;
                return Ok((Some(a), t));
            }
        }
        self.idx = save;
        if self.eat(&Tok::Minus) {
            let (a, t) = self.weighted()?;
            return Ok((Some(-a.unwrap_or_else(Amplitude::one)), t));
        }
        Ok((None, self.cons_level()?))
    }

    fn cons_level(&mut self) -> PResult<Term> {
        let head = self.app()?;
        if self.eat(&Tok::DoubleColon) {
            let tail = self.cons_level()?;
            return Ok(Term::Cons(cons::CONS.into(), vec![head, tail]));
        }
        Ok(head)
    }

    fn starts_arg(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !matches!(s.as_str(), "let" | "type" | "main"),
            Tok::Number(_)
            | Tok::Ket0
            | Tok::Ket1
            | Tok::KetPlus
            | Tok::KetMinus
            | Tok::LParen
            | Tok::LBracket
            | Tok::Backslash
            | Tok::At => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut head = self.arg()?;
        while self.starts_arg() {
            let a = self.arg()?;
            head = Term::app(head, a);
        }
        Ok(head)
    }

    fn arg(&mut self) -> PResult<Term> {
        if let Tok::Ident(s) = self.peek().clone() {
            if let Some(n) = self.registry.arity(&s) {
                self.bump();
                return match n {
                    0 => Ok(Term::Cons(s, vec![])),
                    1 => {
                        if !self.starts_arg() {
                            return self.err(
                                ParseErrorKind::Arity,
                                format!("constructor `{s}` expects 1 argument"),
                            );
                        }
                        let a = self.arg()?;
                        Ok(Term::Cons(s, vec![a]))
                    }
                    _ => {
                        if *self.peek() != Tok::LParen {
                            return self.err(
                                ParseErrorKind::Arity,
                                format!("constructor `{s}` expects {n} arguments"),
                            );
                        }
                        self.bump();
                        let mut args = vec![self.term()?];
                        while self.eat(&Tok::Comma) {
                            args.push(self.term()?);
                        }
                        self.expect(Tok::RParen)?;
                        if args.len() != n {
                            return self.err(
                                ParseErrorKind::Arity,
                                format!(
                                    "constructor `{s}` expects {n} arguments, got {}",
                                    args.len()
                                ),
                            );
                        }
                        Ok(Term::Cons(s, args))
                    }
                };
            }
            if s == "unit" || s == "shape" {
                self.bump();
                let a = self.arg()?;
                return Ok(if s == "unit" {
                    Term::unit(a)
                } else {
                    Term::shape(a)
                });
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ket0 => {
                self.bump();
                Ok(Term::Ket0)
            }
            Tok::Ket1 => {
                self.bump();
                Ok(Term::Ket1)
            }
            Tok::KetPlus => {
                self.bump();
                Ok(Term::plus())
            }
            Tok::KetMinus => {
                self.bump();
                Ok(Term::minus())
            }
            Tok::Number(d) => {
                self.bump();
                match d.parse::<usize>() {
                    Ok(n) if n <= MAX_NUMERAL => Ok(Term::nat(n)),
                    _ => Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Syntax,
                        msg: format!("numeral {d} is too large"),
                    }),
                }
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Term::unit_value());
                }
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                Ok(right_nest(items, Term::pair))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    items.push(self.term()?);
                    while self.eat(&Tok::Comma) {
                        items.push(self.term()?);
                    }
                    self.expect(Tok::RBracket)?;
                }
                Ok(Term::list(items))
            }
            Tok::Backslash => {
                self.bump();
                let mut names = vec![self.binder_name()?];
                while let Tok::Ident(_) = self.peek() {
                    names.push(self.binder_name()?);
                }
                self.expect(Tok::Dot)?;
                self.lambdas(&names)
            }
            Tok::At => {
                self.bump();
                let kw = self.ident()?;
                if kw != "orthogonal" {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Syntax,
                        msg: format!("unknown annotation `@{kw}`"),
                    });
                }
                let t = self.atom()?;
                match t {
                    Term::QCase {
                        scrut, zero, one, ..
                    } => Ok(Term::QCase {
                        scrut,
                        zero,
                        one,
                        assume_orthogonal: true,
                    }),
                    Term::Sum(items, _) => Ok(Term::Sum(items, true)),
                    _ => Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Syntax,
                        msg: "`@orthogonal` applies to a qcase or a superposition".into(),
                    }),
                }
            }
            Tok::Ident(s) => match s.as_str() {
                "letrec" => {
                    self.bump();
                    let f = self.binder_name()?;
                    let mut names = vec![self.binder_name()?];
                    while let Tok::Ident(_) = self.peek() {
                        names.push(self.binder_name()?);
                    }
                    self.expect(Tok::Eq)?;
                    let fi = fresh(&f);
                    let xi = fresh(&names[0]);
                    self.scope.push((f, fi.clone()));
                    self.scope.push((names[0].clone(), xi.clone()));
                    let body = self.lambdas(&names[1..]);
                    self.scope.pop();
                    self.scope.pop();
                    Ok(Term::LetRec(fi, xi, Box::new(body?)))
                }
                "qcase" => {
                    self.bump();
                    let scrut = self.term()?;
                    self.expect(Tok::LBrace)?;
                    self.branch_label("0")?;
                    let zero = self.term()?;
                    self.expect(Tok::Comma)?;
                    self.branch_label("1")?;
                    let one = self.term()?;
                    self.eat(&Tok::Comma);
                    self.expect(Tok::RBrace)?;
                    Ok(Term::qcase(scrut, zero, one))
                }
                "match" => {
                    self.bump();
                    let scrut = self.term()?;
                    self.expect(Tok::LBrace)?;
                    let mut branches = Vec::new();
                    loop {
                        if *self.peek() == Tok::RBrace {
                            break;
                        }
                        branches.push(self.branch()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace)?;
                    if branches.is_empty() {
                        return Err(ParseError {
                            pos,
                            kind: ParseErrorKind::Syntax,
                            msg: "match needs at least one branch".into(),
                        });
                    }
                    Ok(Term::Match(Box::new(scrut), branches))
                }
                "let" | "type" | "main" | "unit" | "shape" => self.err(
                    ParseErrorKind::Syntax,
                    format!("unexpected keyword `{s}`"),
                ),
                _ => {
                    self.bump();
                    Ok(self.resolve(&s))
                }
            },
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected a term, found {other}"),
            ),
        }
    }

    fn branch_label(&mut self, label: &str) -> PResult<()> {
        match self.peek().clone() {
            Tok::Number(d) if d == label => {
                self.bump();
                self.expect(Tok::Arrow)
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected qcase branch `{label} ->`, found {other}"),
            ),
        }
    }

    fn lambdas(&mut self, names: &[String]) -> PResult<Term> {
        if names.is_empty() {
            return self.term();
        }
        let xi = fresh(&names[0]);
        self.scope.push((names[0].clone(), xi.clone()));
        let body = self.lambdas(&names[1..]);
        self.scope.pop();
        Ok(Term::Lambda(xi, Box::new(body?)))
    }

    fn resolve(&self, name: &str) -> Term {
        if let Some((_, internal)) = self.scope.iter().rev().find(|(u, _)| u == name) {
            return Term::Var(internal.clone());
        }
        if let Some(t) = self.defs.get(name) {
            return t.freshen();
        }
        Term::Var(name.to_string())
    }

    fn branch(&mut self) -> PResult<Branch> {
        let (c, vars) = self.pattern()?;
        self.expect(Tok::Arrow)?;
        let internal: Vec<Name> = vars.iter().map(|v| fresh(v)).collect();
        for (u, i) in vars.iter().zip(&internal) {
            self.scope.push((u.clone(), i.clone()));
        }
        let body = self.term();
        for _ in &vars {
            self.scope.pop();
        }
        Ok(Branch {
            cons: c,
            vars: internal,
            body: body?,
        })
    }

    fn pattern(&mut self) -> PResult<(String, Vec<String>)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok((cons::UNIT.into(), vec![]));
                }
                let a = self.binder_name()?;
                self.expect(Tok::Comma)?;
                let b = self.binder_name()?;
                self.expect(Tok::RParen)?;
                Ok((cons::PAIR.into(), vec![a, b]))
            }
            Tok::LBracket => {
                self.bump();
                self.expect(Tok::RBracket)?;
                Ok((cons::NIL.into(), vec![]))
            }
            Tok::Number(d) if d == "0" => {
                self.bump();
                Ok((cons::ZERO.into(), vec![]))
            }
            Tok::Ident(s) => {
                if let Some(n) = self.registry.arity(&s) {
                    self.bump();
                    let mut vars = Vec::new();
                    if n > 0 {
                        if self.eat(&Tok::LParen) {
                            vars.push(self.binder_name()?);
                            while self.eat(&Tok::Comma) {
                                vars.push(self.binder_name()?);
                            }
                            self.expect(Tok::RParen)?;
                        } else if n == 1 {
                            vars.push(self.binder_name()?);
                        }
                    }
                    if vars.len() != n {
                        return Err(ParseError {
                            pos,
                            kind: ParseErrorKind::Arity,
                            msg: format!(
                                "pattern `{s}` binds {} variables, constructor has arity {n}",
                                vars.len()
                            ),
                        });
                    }
                    Ok((s, vars))
                } else if *self.peek_at(1) == Tok::DoubleColon {
                    let h = self.binder_name()?;
                    self.bump();
                    let t = self.binder_name()?;
                    Ok((cons::CONS.into(), vec![h, t]))
                } else {
                    Err(ParseError {
                        pos,
                        kind: ParseErrorKind::UnknownConstructor,
                        msg: format!("unknown constructor `{s}` in pattern"),
                    })
                }
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected a pattern, found {other}"),
            ),
        }
    }
}

fn right_nest<T>(mut items: Vec<T>, pair: impl Fn(T, T) -> T) -> T {
    let mut acc = items.pop().expect("nonempty");
    while let Some(x) = items.pop() {
        acc = pair(x, acc);
    }
    acc
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "let" | "type" | "main" | "letrec" | "qcase" | "match" | "unit" | "shape" | "sqrt2"
    )
}

fn is_unsupported_constant(s: &str) -> bool {
    (s.starts_with("sqrt") && s[4..].chars().all(|c| c.is_ascii_digit()) && s.len() > 4)
        || matches!(s, "pi" | "e" | "cbrt2")
}

impl From<RegistryError> for ParseError {
    fn from(e: RegistryError) -> Self {
        ParseError {
            pos: Pos::default(),
            kind: ParseErrorKind::Declaration,
            msg: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Registry {
        Registry::new()
    }

    #[test]
    fn ket() {
        assert_eq!(parse_term("|0>", &reg()).unwrap(), Term::Ket0);
    }

    #[test]
    fn hadamard() {
        let t = parse_term(
            "unit (\\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> })",
            &reg(),
        )
        .unwrap();
        let expected = Term::unit(Term::lam(
            "x",
            Term::qcase(Term::var("x"), Term::plus(), Term::minus()),
        ));
        assert!(t.alpha_eq(&expected), "{t:?}");
    }

    #[test]
    fn len() {
        let t = parse_term(
            "letrec f x = match x { [] -> 0, h :: t -> S (f t) }",
            &reg(),
        )
        .unwrap();
        let expected = Term::letrec(
            "f",
            "x",
            Term::Match(
                Box::new(Term::var("x")),
                vec![
                    Branch {
                        cons: "[]".into(),
                        vars: vec![],
                        body: Term::nat(0),
                    },
                    Branch {
                        cons: "::".into(),
                        vars: vec!["h".into(), "t".into()],
                        body: Term::cons("S", vec![Term::app(Term::var("f"), Term::var("t"))]),
                    },
                ],
            ),
        );
        assert!(t.alpha_eq(&expected));
    }

    #[test]
    fn amplitudes() {
        assert_eq!(parse_amplitude("1/sqrt2").unwrap(), Amplitude::inv_sqrt2());
        assert_eq!(parse_amplitude("-1/sqrt2").unwrap(), -Amplitude::inv_sqrt2());
        assert_eq!(
            parse_amplitude("i/2").unwrap(),
            Amplitude::i() * Amplitude::from_ratio(1, 2)
        );
        assert_eq!(
            parse_amplitude("(1 + i)/sqrt2").unwrap(),
            Amplitude::zeta()
        );
        let e = parse_term("sqrt3 * |0>", &reg()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Amplitude);
        let e = parse_term("(1/0) * |0>", &reg()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Amplitude);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term("match x { foo -> |0> }", &reg()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownConstructor);
        assert_eq!(e.pos, Pos { line: 1, col: 11 });
        let e = parse("type p = pr(Qbit, Qbit);\nlet x = pr(|0>);").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        assert_eq!(e.pos.line, 2);
    }

    #[test]
    fn definitions_are_inlined() {
        let f = parse("let id = \\x. x;\nmain id |0>;").unwrap();
        let main = f.main.unwrap();
        assert!(main.alpha_eq(&Term::app(Term::lam("y", Term::var("y")), Term::Ket0)));
    }

    #[test]
    fn types() {
        let t = parse_type("(Qbit <-> Qbit) => [bit] -o (Qbit, nat)", &reg()).unwrap();
        assert_eq!(
            t,
            Type::cls(
                Type::uni(Type::Qbit, Type::Qbit),
                Type::lin(Type::list(Type::bit()), Type::tensor(Type::Qbit, Type::nat()))
            )
        );
    }

    #[test]
    fn user_types() {
        let f = parse("type color = red | green | mix(color, color);\nmain mix(red, green);").unwrap();
        assert!(f.registry.is_constructor("mix"));
        assert!(f.registry.is_constructor("mix~"));
        let e = parse("type bad = b(Qbit, bit);").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Declaration);
    }
}
