//! The equivalence on terms, canonical forms and the quantity function.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::ast::{Branch, Term};
use crate::Amplitude;

/// A superposition of pairwise non-equivalent pure terms with nonzero
/// amplitudes, sorted by the α-normalized structural order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    items: Vec<(Amplitude, Term)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Canonical {
    Form(CanonicalForm),
    /// Every amplitude cancelled: the term is equivalent to `0·t'`.
    ZeroTerm,
}

impl CanonicalForm {
    pub fn items(&self) -> &[(Amplitude, Term)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `Σ αᵢ·pᵢ` as a term, even when there is a single component.
    pub fn to_term(&self) -> Term {
        Term::Sum(self.items.clone(), false)
    }

    /// Like [`to_term`](Self::to_term) but `1·p` becomes `p`.
    pub fn collapse(&self) -> Term {
        match self.items.as_slice() {
            [(a, p)] if a.is_one() => p.clone(),
            _ => self.to_term(),
        }
    }

    pub fn is_value(&self) -> bool {
        self.items.iter().all(|(_, p)| p.is_value())
    }
}

impl Canonical {
    pub fn form(&self) -> Option<&CanonicalForm> {
        match self {
            Canonical::Form(f) => Some(f),
            Canonical::ZeroTerm => None,
        }
    }

    /// A term representing this result; zero becomes `0·|0>`.
    pub fn to_term(&self) -> Term {
        match self {
            Canonical::Form(f) => f.collapse(),
            Canonical::ZeroTerm => zero_term(),
        }
    }
}

/// The representative chosen for the class of zero terms.
pub fn zero_term() -> Term {
    Term::Sum(vec![(Amplitude::zero(), Term::Ket0)], false)
}

/// Splits `t` into weighted pure terms by the linearity rules for sums,
/// qcase and match scrutinees, and constructor arguments. Components are
/// neither merged nor filtered.
pub fn decompose(t: &Term) -> Vec<(Amplitude, Term)> {
    match t {
        Term::Sum(items, _) => items
            .iter()
            .flat_map(|(a, s)| {
                decompose(s)
                    .into_iter()
                    .map(move |(b, p)| (a.clone() * b, p))
            })
            .collect(),
        Term::QCase {
            scrut,
            zero,
            one,
            assume_orthogonal,
        } => decompose(scrut)
            .into_iter()
            .map(|(a, p)| {
                (
                    a,
                    Term::QCase {
                        scrut: Box::new(p),
                        zero: zero.clone(),
                        one: one.clone(),
                        assume_orthogonal: *assume_orthogonal,
                    },
                )
            })
            .collect(),
        Term::Match(s, branches) => decompose(s)
            .into_iter()
            .map(|(a, p)| (a, Term::Match(Box::new(p), branches.clone())))
            .collect(),
        Term::Cons(c, args) => {
            let mut acc: Vec<(Amplitude, Vec<Term>)> = vec![(Amplitude::one(), Vec::new())];
            for arg in args {
                let parts = decompose(arg);
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for (a, prefix) in &acc {
                    for (b, p) in &parts {
                        let mut v = prefix.clone();
                        v.push(p.clone());
                        next.push((a.clone() * b.clone(), v));
                    }
                }
                acc = next;
            }
            acc.into_iter()
                .map(|(a, v)| (a, Term::Cons(c.clone(), v)))
                .collect()
        }
        _ => vec![(Amplitude::one(), t.clone())],
    }
}

pub fn canonicalize(t: &Term) -> Canonical {
    let mut merged: BTreeMap<Term, (Amplitude, Term)> = BTreeMap::new();
    for (a, p) in decompose(t) {
        let k = pure_key(&p);
        match merged.get_mut(&k) {
            Some(e) => e.0 += a,
            None => {
                merged.insert(k, (a, p));
            }
        }
    }
    let items: Vec<_> = merged
        .into_values()
        .filter(|(a, _)| !a.is_zero())
        .collect();
    if items.is_empty() {
        Canonical::ZeroTerm
    } else {
        Canonical::Form(CanonicalForm { items })
    }
}

/// Sort and merge key of a pure term: α-normalized, with the subterms
/// reachable through equivalence contexts replaced by their normal forms.
pub fn pure_key(p: &Term) -> Term {
    normalize_pure(p).alpha_key()
}

/// A fixed representative of the ≡-class of `t`.
pub fn normalize(t: &Term) -> Term {
    match canonicalize(t) {
        Canonical::ZeroTerm => zero_term(),
        Canonical::Form(f) => match f.items.as_slice() {
            [(a, p)] if a.is_one() => normalize_pure(p),
            items => Term::Sum(
                items
                    .iter()
                    .map(|(a, p)| (a.clone(), normalize_pure(p)))
                    .collect(),
                false,
            ),
        },
    }
}

fn normalize_pure(p: &Term) -> Term {
    match p {
        Term::App(f, a) => Term::app(normalize(f), normalize(a)),
        Term::Shape(s) => Term::shape(normalize(s)),
        Term::QCase {
            scrut,
            zero,
            one,
            assume_orthogonal,
        } => Term::QCase {
            scrut: Box::new(normalize_pure(scrut)),
            zero: zero.clone(),
            one: one.clone(),
            assume_orthogonal: *assume_orthogonal,
        },
        Term::Match(s, br) => Term::Match(Box::new(normalize_pure(s)), br.clone()),
        Term::Cons(c, args) => Term::Cons(c.clone(), args.iter().map(normalize_pure).collect()),
        _ => p.clone(),
    }
}

pub fn equiv(s: &Term, t: &Term) -> bool {
    normalize(s).alpha_key() == normalize(t).alpha_key()
}

fn kron_eq(s: &Term, t: &Term) -> Amplitude {
    if equiv(s, t) {
        Amplitude::one()
    } else {
        Amplitude::zero()
    }
}

fn delta(b: bool) -> Amplitude {
    if b {
        Amplitude::one()
    } else {
        Amplitude::zero()
    }
}

const HOLE: &str = "\u{25c7}";

fn same_qcase_branches(p: &Term, t: &Term) -> bool {
    let strip = |x: &Term| match x {
        Term::QCase { zero, one, .. } => Term::qcase(Term::var(HOLE), (**zero).clone(), (**one).clone()),
        _ => unreachable!(),
    };
    strip(p).alpha_eq(&strip(t))
}

fn same_match_branches(bp: &[Branch], bt: &[Branch]) -> bool {
    let wrap = |b: &[Branch]| Term::Match(Box::new(Term::var(HOLE)), b.to_vec());
    wrap(bp).alpha_eq(&wrap(bt))
}

/// The amplitude of the pure term `p` inside `t`.
pub fn quantity(p: &Term, t: &Term) -> Amplitude {
    match t {
        Term::Var(_) | Term::Ket0 | Term::Ket1 => delta(p == t),
        Term::Lambda(..) | Term::LetRec(..) | Term::Unit(_) => delta(p.alpha_eq(t)),
        Term::QCase { scrut, .. } => match p {
            Term::QCase { scrut: ps, .. } if same_qcase_branches(p, t) => quantity(ps, scrut),
            _ => Amplitude::zero(),
        },
        Term::Match(s, branches) => match p {
            Term::Match(ps, pb) if same_match_branches(pb, branches) => quantity(ps, s),
            _ => Amplitude::zero(),
        },
        Term::Cons(c, args) => match p {
            Term::Cons(pc, pargs) if pc == c && pargs.len() == args.len() => pargs
                .iter()
                .zip(args)
                .map(|(pi, ti)| quantity(pi, ti))
                .product(),
            _ => Amplitude::zero(),
        },
        Term::App(t1, t2) => match p {
            Term::App(p1, p2) => kron_eq(p1, t1) * kron_eq(p2, t2),
            _ => Amplitude::zero(),
        },
        Term::Shape(s) => match p {
            Term::Shape(ps) => kron_eq(ps, s),
            _ => Amplitude::zero(),
        },
        Term::Sum(items, _) => items
            .iter()
            .map(|(a, ti)| a.clone() * quantity(p, ti))
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> Amplitude {
        Amplitude::inv_sqrt2()
    }

    #[test]
    fn cancellation() {
        let t = Term::sum(vec![
            (h(), Term::Ket0),
            (-h(), Term::Ket0),
            (Amplitude::one(), Term::Ket1),
        ]);
        let c = canonicalize(&t);
        assert_eq!(c.form().unwrap().items(), &[(Amplitude::one(), Term::Ket1)]);
    }

    #[test]
    fn all_cancel() {
        let t = Term::sum(vec![(h(), Term::Ket0), (-h(), Term::Ket0)]);
        assert_eq!(canonicalize(&t), Canonical::ZeroTerm);
    }

    #[test]
    fn constructor_linearity() {
        let t = Term::cons("S", vec![Term::plus()]);
        let c = canonicalize(&t);
        let items = c.form().unwrap().items();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0], (h(), Term::cons("S", vec![Term::Ket0])));
        assert_eq!(items[1], (h(), Term::cons("S", vec![Term::Ket1])));
    }

    #[test]
    fn commutativity_and_nesting() {
        let a = Term::sum(vec![(h(), Term::Ket1), (h(), Term::Ket0)]);
        assert!(equiv(&a, &Term::plus()));
        let nested = Term::sum(vec![(
            Amplitude::sqrt2(),
            Term::sum(vec![(Amplitude::from_ratio(1, 2), Term::Ket0), (Amplitude::from_ratio(1, 2), Term::Ket1)]),
        )]);
        assert!(equiv(&nested, &Term::plus()));
        assert!(!equiv(&Term::Ket0, &Term::Ket1));
    }

    #[test]
    fn quantity_examples() {
        assert_eq!(quantity(&Term::Ket0, &Term::plus()), h());
        assert_eq!(quantity(&Term::Ket1, &Term::minus()), -h());
        let p = Term::qcase(Term::Ket0, Term::Ket1, Term::Ket0);
        assert_eq!(quantity(&p, &p), Amplitude::one());
        let app = Term::app(Term::var("f"), Term::plus());
        let app2 = Term::app(
            Term::var("f"),
            Term::sum(vec![(h(), Term::Ket1), (h(), Term::Ket0)]),
        );
        assert_eq!(quantity(&app, &app2), Amplitude::one());
    }
}
