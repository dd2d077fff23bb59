//! Rewriting terms into the admissible fragment.
//!
//! ```text
//! a ::= x | |0> | |1> | c(a, ..) | Σ α·a | shape a | f
//! f ::= x | (\x. s) closed | (letrec g x = s) closed | unit a | f a
//! s ::= a | qcase x {s, s} | match x {..} | \x. s
//! ```
//!
//! and no variable is scrutinized twice.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{base_name, fresh, Branch, Name, Term};

/// An admissible term with the same behaviour on closed arguments.
pub fn to_admissible(t: &Term) -> Term {
    let t = t.freshen();
    let mut cx = Adm { scrutinized: BTreeSet::new() };
    cx.a(&t).freshen()
}

type Rebuild = Box<dyn Fn(&BTreeMap<Name, Term>) -> Term>;

struct Adm {
    scrutinized: BTreeSet<Name>,
}

fn renamed(xs: &[Name]) -> (Vec<Name>, BTreeMap<Name, Term>) {
    let fresh_xs: Vec<Name> = xs.iter().map(|x| fresh(base_name(x))).collect();
    let sigma = xs
        .iter()
        .zip(&fresh_xs)
        .map(|(x, y)| (x.clone(), Term::var(y.clone())))
        .collect();
    (fresh_xs, sigma)
}

fn lams(xs: &[Name], body: Term) -> Term {
    xs.iter().rev().fold(body, |b, x| Term::lam(x.clone(), b))
}

impl Adm {
    fn a(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(_) | Term::Ket0 | Term::Ket1 => t.clone(),
            Term::Cons(c, args) => Term::Cons(c.clone(), args.iter().map(|x| self.a(x)).collect()),
            Term::Sum(items, ann) => Term::Sum(
                items.iter().map(|(al, x)| (al.clone(), self.a(x))).collect(),
                *ann,
            ),
            Term::Shape(b) => Term::shape(self.a(b)),
            Term::Unit(b) => Term::unit(self.a(b)),
            Term::App(f, x) => Term::app(self.a(f), self.a(x)),
            Term::Lambda(..) | Term::LetRec(..) => self.close(t),
            Term::QCase { .. } | Term::Match(..) => self.lift(t),
        }
    }

    fn s(&mut self, t: &Term) -> Term {
        match t {
            Term::Lambda(x, b) => Term::lam(x.clone(), self.s(b)),
            Term::QCase { scrut, zero, one, assume_orthogonal } => match &**scrut {
                Term::Var(x) if self.scrutinized.insert(x.clone()) => Term::QCase {
                    scrut: scrut.clone(),
                    zero: Box::new(self.s(zero)),
                    one: Box::new(self.s(one)),
                    assume_orthogonal: *assume_orthogonal,
                },
                _ => self.lift(t),
            },
            Term::Match(scrut, bs) => match &**scrut {
                Term::Var(x) if self.scrutinized.insert(x.clone()) => Term::Match(
                    scrut.clone(),
                    bs.iter()
                        .map(|b| Branch { cons: b.cons.clone(), vars: b.vars.clone(), body: self.s(&b.body) })
                        .collect(),
                ),
                _ => self.lift(t),
            },
            _ => self.a(t),
        }
    }

    /// Closed abstractions stay; open ones take their free variables as
    /// extra leading parameters.
    fn close(&mut self, t: &Term) -> Term {
        let fv: Vec<Name> = t.free_vars().into_iter().collect();
        match t {
            Term::Lambda(x, body) if fv.is_empty() => Term::lam(x.clone(), self.s(body)),
            Term::LetRec(f, x, body) if fv.is_empty() => Term::letrec(f.clone(), x.clone(), self.s(body)),
            Term::Lambda(x, body) => {
                let (ys, sigma) = renamed(&fv);
                let inner = lams(&ys, Term::lam(x.clone(), body.substitute(&sigma)));
                let closed = self.close(&inner);
                Term::apps(closed, fv.into_iter().map(Term::var))
            }
            Term::LetRec(f, x, body) => {
                let (ys, mut sigma) = renamed(&fv);
                let g = fresh(base_name(f));
                sigma.insert(f.clone(), Term::apps(Term::var(g.clone()), ys.iter().cloned().map(Term::var)));
                let body = body.substitute(&sigma);
                let chain = lams(&ys[1..], Term::lam(x.clone(), body));
                let rec = Term::letrec(g, ys[0].clone(), self.s(&chain));
                Term::apps(rec, fv.into_iter().map(Term::var))
            }
            _ => unreachable!("close on a non-abstraction"),
        }
    }

    /// `qcase s {..}` becomes `(\z. \xs. qcase z {..}) s xs`, and likewise
    /// for `match`.
    fn lift(&mut self, t: &Term) -> Term {
        let z = fresh("z");
        let (scrut, inner_fv, build): (&Term, BTreeSet<Name>, Rebuild) = match t {
            Term::QCase { scrut, zero, one, assume_orthogonal } => {
                let fv = zero.free_vars().union(&one.free_vars()).cloned().collect();
                let (zero, one, ann, z) = ((**zero).clone(), (**one).clone(), *assume_orthogonal, z.clone());
                (
                    scrut,
                    fv,
                    Box::new(move |sigma| Term::QCase {
                        scrut: Box::new(Term::var(z.clone())),
                        zero: Box::new(zero.substitute(sigma)),
                        one: Box::new(one.substitute(sigma)),
                        assume_orthogonal: ann,
                    }),
                )
            }
            Term::Match(scrut, bs) => {
                let mut fv = BTreeSet::new();
                for b in bs {
                    let mut v = b.body.free_vars();
                    for x in &b.vars {
                        v.remove(x);
                    }
                    fv.extend(v);
                }
                let (bs, z) = (bs.clone(), z.clone());
                (
                    scrut,
                    fv,
                    Box::new(move |sigma| {
                        Term::Match(
                            Box::new(Term::var(z.clone())),
                            bs.iter()
                                .map(|b| Branch { cons: b.cons.clone(), vars: b.vars.clone(), body: b.body.substitute(sigma) })
                                .collect(),
                        )
                    }),
                )
            }
            _ => unreachable!("lift on a non-case"),
        };
        let xs: Vec<Name> = inner_fv.into_iter().collect();
        let (ys, sigma) = renamed(&xs);
        let lam = Term::lam(z, lams(&ys, build(&sigma)));
        let head = self.a(&lam);
        let arg = self.a(scrut);
        Term::apps(Term::app(head, arg), xs.into_iter().map(Term::var))
    }
}

/// Checks the admissible grammar, closedness and single scrutiny.
pub fn check_admissible(t: &Term) -> Result<(), String> {
    if !t.is_closed() {
        return Err("term is not closed".into());
    }
    let mut seen = BTreeSet::new();
    ga(t, &mut seen)
}

fn ga(t: &Term, seen: &mut BTreeSet<Name>) -> Result<(), String> {
    match t {
        Term::Var(_) | Term::Ket0 | Term::Ket1 => Ok(()),
        Term::Cons(_, args) => args.iter().try_for_each(|x| ga(x, seen)),
        Term::Sum(items, _) => items.iter().try_for_each(|(_, x)| ga(x, seen)),
        Term::Shape(b) => ga(b, seen),
        _ => gf(t, seen),
    }
}

fn gf(t: &Term, seen: &mut BTreeSet<Name>) -> Result<(), String> {
    let pretty = || crate::parser::pretty(t);
    match t {
        Term::Var(_) => Ok(()),
        Term::Lambda(_, b) | Term::LetRec(_, _, b) => {
            if !t.is_closed() {
                return Err(format!("abstraction `{}` is not closed", pretty()));
            }
            gs(b, seen)
        }
        Term::Unit(b) => ga(b, seen),
        Term::App(f, x) => {
            gf(f, seen)?;
            ga(x, seen)
        }
        _ => Err(format!("`{}` is not allowed here", pretty())),
    }
}

fn gs(t: &Term, seen: &mut BTreeSet<Name>) -> Result<(), String> {
    let mut scrut = |s: &Term| match s {
        Term::Var(x) if seen.insert(x.clone()) => Ok(()),
        Term::Var(x) => Err(format!("`{x}` is scrutinized twice")),
        _ => Err(format!("scrutinee `{}` is not a variable", crate::parser::pretty(s))),
    };
    match t {
        Term::QCase { scrut: s, zero, one, .. } => {
            scrut(s)?;
            gs(zero, seen)?;
            gs(one, seen)
        }
        Term::Match(s, bs) => {
            scrut(s)?;
            bs.iter().try_for_each(|b| gs(&b.body, seen))
        }
        Term::Lambda(_, b) => gs(b, seen),
        _ => ga(t, seen),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Registry;
    use crate::corpus;
    use crate::eval;

    fn term(src: &str) -> Term {
        crate::parser::parse_term(src, &Registry::new()).unwrap()
    }

    #[test]
    fn corpus_definitions_become_admissible() {
        for p in corpus::PROGRAMS {
            let f = corpus::load(p.name);
            for d in &f.definitions {
                let s = to_admissible(&d.term);
                check_admissible(&s).unwrap_or_else(|e| panic!("{}/{}: {e}", p.name, d.name));
            }
        }
    }

    #[test]
    fn already_admissible_terms_are_kept() {
        let t = term(r"\x. qcase x { 0 -> |1>, 1 -> |0> }");
        assert!(to_admissible(&t).alpha_eq(&t));
    }

    #[test]
    fn non_variable_scrutinee_is_lifted() {
        let t = term(r"\y. qcase (\q. q) y { 0 -> y, 1 -> |0> }");
        assert!(check_admissible(&t).is_err());
        let s = to_admissible(&t);
        check_admissible(&s).unwrap();
    }

    #[test]
    fn open_abstractions_are_closed() {
        let t = term(r"\x. \y. (\z. (x, z)) y");
        let s = to_admissible(&t);
        check_admissible(&s).unwrap();
        let t = term(r"\n. (letrec f m = match m { 0 -> n, S k -> S (f k) }) 2");
        let s = to_admissible(&t);
        check_admissible(&s).unwrap();
        let a = eval::run(&Term::app(t, Term::nat(3)), 1000).1;
        let b = eval::run(&Term::app(s, Term::nat(3)), 1000).1;
        assert_eq!(a, b);
        assert_eq!(a.as_nat(), Some(5));
    }

    #[test]
    fn repeated_scrutiny_is_lifted() {
        let t = term(r"\x. match x { 0 -> 0, S k -> match x { 0 -> 0, S j -> j } }");
        assert!(check_admissible(&t).is_err());
        let s = to_admissible(&t);
        check_admissible(&s).unwrap();
        for n in 0..4 {
            let a = eval::run(&Term::app(t.clone(), Term::nat(n)), 1000).1;
            let b = eval::run(&Term::app(s.clone(), Term::nat(n)), 1000).1;
            assert_eq!(a, b);
        }
    }
}
