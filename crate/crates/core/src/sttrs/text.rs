//! The `.trs` text format.
//!
//! ```text
//! type color = Red | Green;
//! sym had : Qbit -> Qbit;
//! had(|0>) -> (1/sqrt2)*|0> + (1/sqrt2)*|1>;
//! shape(a*|0> + b*|1>) -> ();
//! ```
//!
//! Closed naturals print as numerals and closed lists with `[a, b]`.
//! Printing then reading gives back the same system.

use std::fmt::{self, Write as _};

use num_traits::One;

use super::{Rule, SType, STerm, Schema, Sttrs, KET0, KET1, SHAPE, UNIT};
use crate::ast::{cons, Registry, Type};
use crate::parser::lexer::{lex, Tok};
use crate::parser::{ParseError, ParseErrorKind, Parser};
use crate::Amplitude;

pub type TrsError = ParseError;

impl fmt::Display for STerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            STerm::Sum(items) => {
                if items.is_empty() {
                    return f.write_str("(0)*()");
                }
                for (i, (a, t)) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "({a})*")?;
                    write_atomic(f, t)?;
                }
                Ok(())
            }
            _ => write_cons_level(f, self),
        }
    }
}

fn is_infix_cons(t: &STerm) -> bool {
    matches!(t.spine(), (STerm::Con(c), [_, _]) if c == cons::CONS) && t.as_list().is_none()
}

fn write_cons_level(f: &mut fmt::Formatter<'_>, t: &STerm) -> fmt::Result {
    if is_infix_cons(t) {
        let args = t.spine().1;
        if matches!(args[0], STerm::Sum(_)) || is_infix_cons(&args[0]) {
            write!(f, "({})", args[0])?;
        } else {
            write_cons_level(f, &args[0])?;
        }
        f.write_str(" :: ")?;
        return match &args[1] {
            STerm::Sum(_) => write!(f, "({})", args[1]),
            tail => write_cons_level(f, tail),
        };
    }
    write_atomic(f, t)
}

fn write_atomic(f: &mut fmt::Formatter<'_>, t: &STerm) -> fmt::Result {
    if let Some(n) = t.as_nat() {
        return write!(f, "{n}");
    }
    if let Some(items) = t.as_list() {
        if !items.is_empty() {
            f.write_char('[')?;
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            return f.write_char(']');
        }
    }
    match t {
        STerm::Var(x) | STerm::Fun(x) | STerm::Con(x) => f.write_str(x),
        STerm::Sum(_) => write!(f, "({t})"),
        STerm::App(..) if is_infix_cons(t) => write!(f, "({t})"),
        STerm::App(h, args) => {
            if let (STerm::Con(c), [a, b]) = (&**h, args.as_slice()) {
                if c == cons::PAIR {
                    return write!(f, "({a}, {b})");
                }
            }
            write!(f, "{h}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_char(')')
        }
    }
}

/// Renders a system: user types, symbol declarations, rules, schemas.
pub fn print_trs(sys: &Sttrs) -> String {
    let mut out = String::new();
    for d in sys.registry.user_decls() {
        let ctors: Vec<String> = d
            .constructors
            .iter()
            .map(|(c, args)| {
                if args.is_empty() {
                    c.clone()
                } else {
                    let a: Vec<String> = args.iter().map(Type::to_string).collect();
                    format!("{c}({})", a.join(", "))
                }
            })
            .collect();
        let _ = writeln!(out, "type {} = {};", d.name, ctors.join(" | "));
    }
    for (f, t) in &sys.symbols {
        let _ = writeln!(out, "sym {f} : {t};");
    }
    for r in &sys.rules {
        let _ = writeln!(out, "{r};");
    }
    for s in &sys.schemas {
        let _ = writeln!(out, "{s};");
    }
    out
}

pub fn parse_trs(text: &str) -> Result<Sttrs, TrsError> {
    parse_trs_with(text, Registry::new())
}

/// Reads a system whose types extend `registry`.
pub fn parse_trs_with(text: &str, registry: Registry) -> Result<Sttrs, TrsError> {
    let mut p = Parser::new(text, registry)?;
    let schemas: Vec<(Schema, Vec<Tok>)> = [Schema::ShapeQubitSum, Schema::ShapeSum]
        .into_iter()
        .map(|s| {
            let toks = lex(&format!("{s};")).expect("schema text lexes");
            (s, toks.into_iter().map(|t| t.tok).filter(|t| *t != Tok::Eof).collect())
        })
        .collect();
    let mut sys = Sttrs::new(Registry::new());
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "type" && matches!(p.peek_at(1), Tok::Ident(_)) => {
                p.bump();
                p.type_decl()?;
            }
            Tok::Ident(kw) if kw == "sym" && matches!(p.peek_at(1), Tok::Ident(_)) => {
                p.bump();
                let pos = p.pos();
                let f = p.ident()?;
                p.expect(Tok::Colon)?;
                let t = stype(&mut p)?;
                p.expect(Tok::Semi)?;
                if sys.symbols.insert(f.clone(), t).is_some() {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::Declaration,
                        msg: format!("symbol `{f}` is declared twice"),
                    });
                }
            }
            _ => {
                if let Some(s) = schemas.iter().find_map(|(s, toks)| {
                    (0..toks.len()).all(|k| *p.peek_at(k) == toks[k]).then_some((*s, toks.len()))
                }) {
                    for _ in 0..s.1 {
                        p.bump();
                    }
                    if !sys.schemas.contains(&s.0) {
                        sys.schemas.push(s.0);
                    }
                    continue;
                }
                let lhs = Reader { p: &mut p, sys: &sys }.lhs()?;
                p.expect(Tok::Arrow)?;
                let rhs = Reader { p: &mut p, sys: &sys }.sum()?;
                p.expect(Tok::Semi)?;
                sys.rules.push(Rule::new(lhs, rhs));
            }
        }
    }
    sys.registry = p.registry.clone();
    Ok(sys)
}

/// Reads a term against the symbols and constructors of `sys`.
pub fn parse_sterm(text: &str, sys: &Sttrs) -> Result<STerm, TrsError> {
    let mut p = Parser::new(text, sys.registry.clone())?;
    let t = Reader { p: &mut p, sys }.sum()?;
    p.expect_eof()?;
    Ok(t)
}

fn stype(p: &mut Parser) -> Result<SType, TrsError> {
    let mut args = vec![sfactor(p)?];
    while matches!(p.peek(), Tok::Ident(x) if x == "x") {
        p.bump();
        args.push(sfactor(p)?);
    }
    if p.eat(&Tok::Arrow) {
        let res = stype(p)?;
        return Ok(SType::Arrow(args, Box::new(res)));
    }
    if args.len() > 1 {
        return p.err(ParseErrorKind::Syntax, "expected `->` after argument types");
    }
    Ok(args.pop().expect("one factor"))
}

fn sfactor(p: &mut Parser) -> Result<SType, TrsError> {
    if *p.peek() == Tok::LParen && paren_has_arrow(p) {
        p.bump();
        let t = stype(p)?;
        p.expect(Tok::RParen)?;
        return Ok(t);
    }
    Ok(SType::Data(p.ty()?))
}

/// Whether the parenthesis at the cursor encloses an STTRS arrow.
fn paren_has_arrow(p: &Parser) -> bool {
    let mut depth = 0usize;
    let mut k = 0;
    loop {
        match p.peek_at(k) {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth == 0 {
                    return false;
                }
            }
            Tok::Arrow if depth == 1 => return true,
            Tok::Eof | Tok::Semi => return false,
            _ => {}
        }
        k += 1;
    }
}

struct Reader<'p, 's> {
    p: &'p mut Parser,
    sys: &'s Sttrs,
}

impl Reader<'_, '_> {
    fn classify(&self, x: &str) -> STerm {
        if x == UNIT || x == SHAPE || self.sys.symbols.contains_key(x) {
            STerm::fun(x)
        } else if self.p.registry.is_constructor(x) {
            STerm::con(x)
        } else {
            STerm::var(x)
        }
    }

    /// A left-hand side: the root identifier is always a function symbol.
    fn lhs(&mut self) -> Result<STerm, TrsError> {
        let f = self.p.ident()?;
        let args = if *self.p.peek() == Tok::LParen {
            self.args()?
        } else {
            Vec::new()
        };
        Ok(STerm::app(STerm::fun(f), args))
    }

    fn args(&mut self) -> Result<Vec<STerm>, TrsError> {
        self.p.expect(Tok::LParen)?;
        let mut out = vec![self.sum()?];
        while self.p.eat(&Tok::Comma) {
            out.push(self.sum()?);
        }
        self.p.expect(Tok::RParen)?;
        Ok(out)
    }

    fn sum(&mut self) -> Result<STerm, TrsError> {
        let first = self.weighted()?;
        if !matches!(self.p.peek(), Tok::Plus | Tok::Minus) {
            return Ok(match first {
                (Some(a), t) => STerm::Sum(vec![(a, t)]),
                (None, t) => t,
            });
        }
        let mut items = vec![(first.0.unwrap_or_else(Amplitude::one), first.1)];
        loop {
            let neg = match self.p.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.p.bump();
            let (a, t) = self.weighted()?;
            let a = a.unwrap_or_else(Amplitude::one);
            items.push((if neg { -a } else { a }, t));
        }
        Ok(STerm::Sum(items))
    }

    fn weighted(&mut self) -> Result<(Option<Amplitude>, STerm), TrsError> {
        let m = self.p.mark();
        if let Some(a) = self.p.amp()? {
            if self.p.eat(&Tok::Star) {
                return Ok((Some(a), self.atom()?));
            }
            self.p.reset(m);
        }
        Ok((None, self.cons_level()?))
    }

    fn cons_level(&mut self) -> Result<STerm, TrsError> {
        let head = self.atom()?;
        if self.p.eat(&Tok::DoubleColon) {
            let tail = self.cons_level()?;
            return Ok(STerm::cons(cons::CONS, vec![head, tail]));
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<STerm, TrsError> {
        let m = self.p.mark();
        match self.p.bump() {
            Tok::Ket0 => Ok(STerm::con(KET0)),
            Tok::Ket1 => Ok(STerm::con(KET1)),
            tok @ (Tok::KetPlus | Tok::KetMinus) => {
                let h = Amplitude::inv_sqrt2();
                let b = if tok == Tok::KetMinus { -h.clone() } else { h.clone() };
                Ok(STerm::Sum(vec![(h, STerm::ket(false)), (b, STerm::ket(true))]))
            }
            Tok::Number(d) => match d.parse::<usize>() {
                Ok(n) if n <= 100_000 => Ok(STerm::nat(n)),
                _ => self.p.err(ParseErrorKind::Syntax, format!("numeral `{d}` is too large")),
            },
            Tok::Ident(x) => {
                let head = self.classify(&x);
                if *self.p.peek() == Tok::LParen {
                    let args = self.args()?;
                    return Ok(STerm::app(head, args));
                }
                Ok(head)
            }
            Tok::LParen => {
                let first = self.sum()?;
                if self.p.eat(&Tok::Comma) {
                    let second = self.sum()?;
                    self.p.expect(Tok::RParen)?;
                    return Ok(STerm::cons(cons::PAIR, vec![first, second]));
                }
                self.p.expect(Tok::RParen)?;
                Ok(first)
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                if !self.p.eat(&Tok::RBracket) {
                    items.push(self.sum()?);
                    while self.p.eat(&Tok::Comma) {
                        items.push(self.sum()?);
                    }
                    self.p.expect(Tok::RBracket)?;
                }
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(STerm::con(cons::NIL), |acc, x| STerm::cons(cons::CONS, vec![x, acc])))
            }
            other => {
                self.p.reset(m);
                self.p.err(ParseErrorKind::Syntax, format!("expected a term, found {other}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "type color = Red | Mix(color, Qbit);\n\
        sym ack : nat x nat -> nat;\n\
        sym map : (Qbit -> Qbit) x [Qbit] -> [Qbit];\n\
        sym paint : color -> color;\n\
        ack(0, n) -> S(n);\n\
        ack(S(m), 0) -> ack(m, 1);\n\
        ack(S(m), S(n)) -> ack(m, ack(S(m), n));\n\
        map(f, []) -> [];\n\
        map(f, h :: t) -> f(h) :: map(f, t);\n\
        paint(Red) -> Mix(Red, (1/sqrt2)*|0> + (-1/sqrt2)*|1>);\n\
        paint(Mix(c, q)) -> Mix(c, q);\n\
        shape(a*|0> + b*|1>) -> ();\n";

    #[test]
    fn round_trip() {
        let s = parse_trs(SRC).unwrap();
        let text = print_trs(&s);
        let again = parse_trs(&text).unwrap();
        assert_eq!(s, again);
        assert_eq!(print_trs(&again), text);
        assert_eq!(s.schemas, vec![Schema::ShapeQubitSum]);
        assert!(matches!(s.symbols["map"], SType::Arrow(ref a, _) if matches!(a[0], SType::Arrow(..))));
    }

    #[test]
    fn classification() {
        let s = parse_trs(SRC).unwrap();
        let r = &s.rules[4];
        assert_eq!(r.lhs.spine().1[0], STerm::var("f"));
        assert_eq!(r.symbol(), Some("map"));
        assert_eq!(s.rules[1].rhs.spine().1[1], STerm::nat(1));
    }

    #[test]
    fn nested_sums_and_lists_print_back() {
        let s = parse_trs("sym g : [Qbit] -> [Qbit];\n").unwrap();
        for src in [
            "(1/2)*((1/sqrt2)*|0> + (1/sqrt2)*|1>) + (1/2)*|1>",
            "((1)*|0>) :: x :: []",
            "[(1/sqrt2)*|0> + (i)*|1>, |0>]",
            "g((1 + i)*|1>)",
        ] {
            let t = parse_sterm(src, &s).unwrap();
            let printed = t.to_string();
            assert_eq!(parse_sterm(&printed, &s).unwrap(), t, "{src} -> {printed}");
        }
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_trs("sym f : nat -> nat;\nf(x) -> ;\n").unwrap_err();
        assert_eq!(e.pos.line, 2);
    }
}
