//! Printing terms back to concrete syntax that the parser accepts.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{base_name, cons, Name, Term, Type};

const LOW: u8 = 0;
const CONS: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

/// Renders `t`, replacing internal binder names by readable ones.
pub fn pretty(t: &Term) -> String {
    let mut p = Printer::default();
    for x in t.free_vars() {
        let d = display_free(&x);
        p.taken.insert(d.clone());
        p.names.insert(x, d);
    }
    let mut out = String::new();
    p.term(t, LOW, &mut out);
    out
}

pub fn pretty_type(t: &Type) -> String {
    t.to_string()
}

fn display_free(x: &str) -> String {
    match x.split_once('#') {
        Some((b, n)) => format!("{b}_{n}"),
        None => x.to_string(),
    }
}

#[derive(Default)]
struct Printer {
    names: BTreeMap<Name, String>,
    taken: BTreeSet<String>,
}

impl Printer {
    fn bind(&mut self, x: &Name) -> (String, Option<String>) {
        let base = base_name(x);
        let base = if base.is_empty() { "x" } else { base };
        let mut d = base.to_string();
        let mut k = 1;
        while self.taken.contains(&d) || is_reserved(&d) {
            d = format!("{base}{k}");
            k += 1;
        }
        self.taken.insert(d.clone());
        let prev = self.names.insert(x.clone(), d.clone());
        (d, prev)
    }

    fn unbind(&mut self, x: &Name, d: &str, prev: Option<String>) {
        self.taken.remove(d);
        match prev {
            Some(p) => {
                self.names.insert(x.clone(), p);
            }
            None => {
                self.names.remove(x);
            }
        }
    }

    fn name(&self, x: &Name) -> String {
        self.names.get(x).cloned().unwrap_or_else(|| display_free(x))
    }

    fn term(&mut self, t: &Term, prec: u8, out: &mut String) {
        let need = level(t) < prec;
        if need {
            out.push('(');
        }
        self.body(t, out);
        if need {
            out.push(')');
        }
    }

    fn body(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Var(x) => out.push_str(&self.name(x)),
            Term::Ket0 => out.push_str("|0>"),
            Term::Ket1 => out.push_str("|1>"),
            Term::QCase {
                scrut,
                zero,
                one,
                assume_orthogonal,
            } => {
                if *assume_orthogonal {
                    out.push_str("@orthogonal ");
                }
                out.push_str("qcase ");
                self.term(scrut, LOW, out);
                out.push_str(" { 0 -> ");
                self.term(zero, LOW, out);
                out.push_str(", 1 -> ");
                self.term(one, LOW, out);
                out.push_str(" }");
            }
            Term::Cons(c, args) => self.constructor(t, c, args, out),
            Term::Match(s, branches) => {
                out.push_str("match ");
                self.term(s, LOW, out);
                out.push_str(" { ");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let bound: Vec<_> = b.vars.iter().map(|v| (v, self.bind(v))).collect();
                    let ds: Vec<&str> = bound.iter().map(|(_, (d, _))| d.as_str()).collect();
                    out.push_str(&pattern(&b.cons, &ds));
                    out.push_str(" -> ");
                    self.term(&b.body, LOW, out);
                    for (v, (d, prev)) in bound.into_iter().rev() {
                        self.unbind(v, &d, prev);
                    }
                }
                out.push_str(" }");
            }
            Term::Lambda(x, body) => {
                let (d, prev) = self.bind(x);
                out.push('\\');
                out.push_str(&d);
                out.push_str(". ");
                self.term(body, LOW, out);
                self.unbind(x, &d, prev);
            }
            Term::LetRec(f, x, body) => {
                let (df, pf) = self.bind(f);
                let (dx, px) = self.bind(x);
                out.push_str(&format!("letrec {df} {dx} = "));
                self.term(body, LOW, out);
                self.unbind(x, &dx, px);
                self.unbind(f, &df, pf);
            }
            Term::Unit(inner) => {
                out.push_str("unit ");
                self.term(inner, ATOM, out);
            }
            Term::Shape(inner) => {
                out.push_str("shape ");
                self.term(inner, ATOM, out);
            }
            Term::App(f, a) => {
                self.term(f, APP, out);
                out.push(' ');
                self.term(a, ATOM, out);
            }
            Term::Sum(items, annotated) => {
                if *annotated {
                    out.push_str("@orthogonal (");
                }
                for (i, (a, s)) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push('(');
                    out.push_str(&a.to_string());
                    out.push_str(")*");
                    self.term(s, CONS, out);
                }
                if *annotated {
                    out.push(')');
                }
            }
        }
    }

    fn constructor(&mut self, t: &Term, c: &str, args: &[Term], out: &mut String) {
        if let Some(n) = t.as_nat() {
            out.push_str(&n.to_string());
            return;
        }
        if let Some(items) = t.as_list() {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.term(x, LOW, out);
            }
            out.push(']');
            return;
        }
        match (c, args) {
            (cons::CONS, [h, tl]) => {
                self.term(h, APP, out);
                out.push_str(" :: ");
                self.term(tl, CONS, out);
            }
            (cons::PAIR, [a, b]) => {
                out.push('(');
                self.term(a, LOW, out);
                out.push_str(", ");
                self.term(b, LOW, out);
                out.push(')');
            }
            (_, []) => out.push_str(c),
            (_, [a]) => {
                out.push_str(c);
                out.push(' ');
                self.term(a, ATOM, out);
            }
            _ => {
                out.push_str(c);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.term(a, LOW, out);
                }
                out.push(')');
            }
        }
    }
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Lambda(..) | Term::LetRec(..) => LOW,
        Term::Sum(_, true) => ATOM,
        Term::Sum(..) => LOW,
        Term::App(..) | Term::Unit(_) | Term::Shape(_) => APP,
        Term::Cons(c, args) => {
            if t.as_nat().is_some() || t.as_list().is_some() {
                ATOM
            } else if c == cons::CONS {
                CONS
            } else if args.len() == 1 {
                APP
            } else {
                ATOM
            }
        }
        _ => ATOM,
    }
}

/// Concrete syntax of a match pattern.
pub fn pattern(c: &str, vars: &[&str]) -> String {
    match (c, vars) {
        (cons::CONS, [h, t]) => format!("{h} :: {t}"),
        (cons::PAIR, [a, b]) => format!("({a}, {b})"),
        (_, []) => c.to_string(),
        _ => format!("{c}({})", vars.join(", ")),
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "let" | "type" | "main" | "letrec" | "qcase" | "match" | "unit" | "shape" | "sqrt2" | "i"
            | "S" | "b0" | "b1"
    )
}
