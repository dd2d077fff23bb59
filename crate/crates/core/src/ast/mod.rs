//! Terms, names and the structural operations every other module builds on.

pub mod types;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Zero};

use crate::Amplitude;

pub use types::{
    shadow_constructor, ArrowKind, ConsInfo, EnumerationError, Family, Registry, RegistryError, Type,
    TypeDecl,
};

pub type Name = String;

/// Constructor symbols that every registry knows about.
pub mod cons {
    pub const UNIT: &str = "()";
    pub const NIL: &str = "[]";
    pub const CONS: &str = "::";
    pub const PAIR: &str = "(,)";
    pub const ZERO: &str = "0";
    pub const SUCC: &str = "S";
    pub const BIT0: &str = "b0";
    pub const BIT1: &str = "b1";
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// Strips the `#n` suffix that [`fresh`] appends.
pub fn base_name(name: &str) -> &str {
    name.split('#').next().unwrap_or(name)
}

/// A name never returned before, derived from `base`.
pub fn fresh(base: &str) -> Name {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    format!("{}#{n}", base_name(base))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub cons: String,
    pub vars: Vec<Name>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Ket0,
    Ket1,
    QCase {
        scrut: Box<Term>,
        zero: Box<Term>,
        one: Box<Term>,
        /// Set by the `@orthogonal` source annotation; ignored by evaluation.
        assume_orthogonal: bool,
    },
    Cons(String, Vec<Term>),
    Match(Box<Term>, Vec<Branch>),
    Lambda(Name, Box<Term>),
    LetRec(Name, Name, Box<Term>),
    Unit(Box<Term>),
    App(Box<Term>, Box<Term>),
    Sum(Vec<(Amplitude, Term)>, bool),
    Shape(Box<Term>),
}

impl Term {
    pub fn var(x: impl Into<Name>) -> Term {
        Term::Var(x.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(x: impl Into<Name>, body: Term) -> Term {
        Term::Lambda(x.into(), Box::new(body))
    }

    pub fn letrec(f: impl Into<Name>, x: impl Into<Name>, body: Term) -> Term {
        Term::LetRec(f.into(), x.into(), Box::new(body))
    }

    pub fn qcase(scrut: Term, zero: Term, one: Term) -> Term {
        Term::QCase {
            scrut: Box::new(scrut),
            zero: Box::new(zero),
            one: Box::new(one),
            assume_orthogonal: false,
        }
    }

    pub fn unit(t: Term) -> Term {
        Term::Unit(Box::new(t))
    }

    pub fn shape(t: Term) -> Term {
        Term::Shape(Box::new(t))
    }

    pub fn sum(items: Vec<(Amplitude, Term)>) -> Term {
        Term::Sum(items, false)
    }

    pub fn cons(c: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Cons(c.into(), args)
    }

    pub fn unit_value() -> Term {
        Term::Cons(cons::UNIT.into(), vec![])
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Cons(cons::PAIR.into(), vec![a, b])
    }

    pub fn nat(n: usize) -> Term {
        (0..n).fold(Term::Cons(cons::ZERO.into(), vec![]), |acc, _| {
            Term::Cons(cons::SUCC.into(), vec![acc])
        })
    }

    pub fn bit(b: bool) -> Term {
        Term::Cons(if b { cons::BIT1 } else { cons::BIT0 }.into(), vec![])
    }

    pub fn list(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::Cons(cons::NIL.into(), vec![]), |acc, h| {
                Term::Cons(cons::CONS.into(), vec![h, acc])
            })
    }

    /// `1/√2·|0⟩ + 1/√2·|1⟩`
    pub fn plus() -> Term {
        let h = Amplitude::inv_sqrt2();
        Term::sum(vec![(h.clone(), Term::Ket0), (h, Term::Ket1)])
    }

    /// `1/√2·|0⟩ − 1/√2·|1⟩`
    pub fn minus() -> Term {
        let h = Amplitude::inv_sqrt2();
        Term::sum(vec![(h.clone(), Term::Ket0), (-h, Term::Ket1)])
    }

    /// Reads back `S^n 0` as `n`.
    pub fn as_nat(&self) -> Option<usize> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Cons(c, args) if c == cons::ZERO && args.is_empty() => return Some(n),
                Term::Cons(c, args) if c == cons::SUCC && args.len() == 1 => {
                    n += 1;
                    cur = &args[0];
                }
                _ => return None,
            }
        }
    }

    /// Reads back a `::`-spine terminated by `[]`.
    pub fn as_list(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Cons(c, args) if c == cons::NIL && args.is_empty() => return Some(out),
                Term::Cons(c, args) if c == cons::CONS && args.len() == 2 => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Splits `f a1 … an` into `(f, [a1, …, an])`.
    pub fn unspine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Direct subterms, in a fixed order shared with typing annotations.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Ket0 | Term::Ket1 => vec![],
            Term::QCase { scrut, zero, one, .. } => vec![scrut, zero, one],
            Term::Cons(_, args) => args.iter().collect(),
            Term::Match(s, bs) => {
                let mut v: Vec<&Term> = vec![s];
                v.extend(bs.iter().map(|b| &b.body));
                v
            }
            Term::Lambda(_, b) | Term::LetRec(_, _, b) | Term::Unit(b) | Term::Shape(b) => vec![b],
            Term::App(f, a) => vec![f, a],
            Term::Sum(items, _) => items.iter().map(|(_, t)| t).collect(),
        }
    }

    /// Rebuilds the node with each child replaced by `f(child)`.
    pub fn map_children(&self, mut f: impl FnMut(&Term) -> Term) -> Term {
        match self {
            Term::Var(_) | Term::Ket0 | Term::Ket1 => self.clone(),
            Term::QCase {
                scrut,
                zero,
                one,
                assume_orthogonal,
            } => Term::QCase {
                scrut: Box::new(f(scrut)),
                zero: Box::new(f(zero)),
                one: Box::new(f(one)),
                assume_orthogonal: *assume_orthogonal,
            },
            Term::Cons(c, args) => Term::Cons(c.clone(), args.iter().map(f).collect()),
            Term::Match(s, bs) => {
                let s = f(s);
                Term::Match(
                    Box::new(s),
                    bs.iter()
                        .map(|b| Branch {
                            cons: b.cons.clone(),
                            vars: b.vars.clone(),
                            body: f(&b.body),
                        })
                        .collect(),
                )
            }
            Term::Lambda(x, b) => Term::Lambda(x.clone(), Box::new(f(b))),
            Term::LetRec(g, x, b) => Term::LetRec(g.clone(), x.clone(), Box::new(f(b))),
            Term::Unit(b) => Term::Unit(Box::new(f(b))),
            Term::Shape(b) => Term::Shape(Box::new(f(b))),
            Term::App(a, b) => {
                let a = f(a);
                Term::App(Box::new(a), Box::new(f(b)))
            }
            Term::Sum(items, ann) => Term::Sum(
                items.iter().map(|(a, t)| (a.clone(), f(t))).collect(),
                *ann,
            ),
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_)
            | Term::Ket0
            | Term::Ket1
            | Term::Lambda(..)
            | Term::LetRec(..)
            | Term::Unit(_) => true,
            Term::Cons(_, args) => args.iter().all(Term::is_value),
            Term::Sum(items, _) => !items.is_empty() && items.iter().all(|(_, t)| t.is_value()),
            _ => false,
        }
    }

    /// Membership in the pure-term grammar: no superposition at a position
    /// where the equivalence could distribute it.
    pub fn is_pure(&self) -> bool {
        match self {
            Term::Var(_)
            | Term::Ket0
            | Term::Ket1
            | Term::Lambda(..)
            | Term::LetRec(..)
            | Term::Unit(_)
            | Term::App(..)
            | Term::Shape(_) => true,
            Term::QCase { scrut, .. } => scrut.is_pure(),
            Term::Match(s, _) => s.is_pure(),
            Term::Cons(_, args) => args.iter().all(Term::is_pure),
            Term::Sum(..) => false,
        }
    }

    /// Binder-insensitive representative: bound names are replaced by
    /// positional names and annotations are dropped, so two terms are
    /// α-equivalent exactly when their keys are equal.
    pub fn alpha_key(&self) -> Term {
        let mut env = HashMap::new();
        let mut counter = 0usize;
        key_of(self, &mut env, &mut counter)
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_key() == other.alpha_key()
    }

    /// A copy whose bound names are all new.
    pub fn freshen(&self) -> Term {
        freshen_with(self, &mut HashMap::new())
    }

    /// Capture-avoiding simultaneous substitution. Inserted terms are
    /// freshened so that no binder name occurs twice in the result.
    pub fn substitute(&self, sigma: &BTreeMap<Name, Term>) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        subst(self, sigma)
    }

    pub fn subst1(&self, x: &str, v: &Term) -> Term {
        let mut sigma = BTreeMap::new();
        sigma.insert(x.to_string(), v.clone());
        self.substitute(&sigma)
    }

    /// True when no subterm is a superposition.
    pub fn is_sum_free(&self) -> bool {
        !matches!(self, Term::Sum(..)) && self.children().iter().all(|c| c.is_sum_free())
    }

    /// Names bound anywhere in the term.
    pub fn bound_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        collect_bound(self, &mut out);
        out
    }
}

fn collect_bound(t: &Term, out: &mut Vec<Name>) {
    match t {
        Term::Lambda(x, _) => out.push(x.clone()),
        Term::LetRec(f, x, _) => {
            out.push(f.clone());
            out.push(x.clone());
        }
        Term::Match(_, bs) => {
            for b in bs {
                out.extend(b.vars.iter().cloned());
            }
        }
        _ => {}
    }
    for c in t.children() {
        collect_bound(c, out);
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Lambda(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::LetRec(f, x, b) => {
            bound.push(f.clone());
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
            bound.pop();
        }
        Term::Match(s, bs) => {
            collect_free(s, bound, out);
            for b in bs {
                let n = b.vars.len();
                bound.extend(b.vars.iter().cloned());
                collect_free(&b.body, bound, out);
                bound.truncate(bound.len() - n);
            }
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn key_of(t: &Term, env: &mut HashMap<Name, Vec<Name>>, counter: &mut usize) -> Term {
    let bind = |x: &Name, env: &mut HashMap<Name, Vec<Name>>, counter: &mut usize| {
        let k = format!("#{counter}");
        *counter += 1;
        env.entry(x.clone()).or_default().push(k.clone());
        k
    };
    fn unbind(x: &Name, env: &mut HashMap<Name, Vec<Name>>) {
        if let Some(v) = env.get_mut(x) {
            v.pop();
        }
    }
    match t {
        Term::Var(x) => Term::Var(
            env.get(x)
                .and_then(|v| v.last().cloned())
                .unwrap_or_else(|| x.clone()),
        ),
        Term::Lambda(x, b) => {
            let k = bind(x, env, counter);
            let body = key_of(b, env, counter);
            unbind(x, env);
            Term::Lambda(k, Box::new(body))
        }
        Term::LetRec(f, x, b) => {
            let kf = bind(f, env, counter);
            let kx = bind(x, env, counter);
            let body = key_of(b, env, counter);
            unbind(x, env);
            unbind(f, env);
            Term::LetRec(kf, kx, Box::new(body))
        }
        Term::Match(s, bs) => {
            let s = key_of(s, env, counter);
            let bs = bs
                .iter()
                .map(|b| {
                    let vars: Vec<Name> = b.vars.iter().map(|x| bind(x, env, counter)).collect();
                    let body = key_of(&b.body, env, counter);
                    for x in b.vars.iter().rev() {
                        unbind(x, env);
                    }
                    Branch {
                        cons: b.cons.clone(),
                        vars,
                        body,
                    }
                })
                .collect();
            Term::Match(Box::new(s), bs)
        }
        Term::QCase {
            scrut, zero, one, ..
        } => Term::QCase {
            scrut: Box::new(key_of(scrut, env, counter)),
            zero: Box::new(key_of(zero, env, counter)),
            one: Box::new(key_of(one, env, counter)),
            assume_orthogonal: false,
        },
        Term::Sum(items, _) => Term::Sum(
            items
                .iter()
                .map(|(a, t)| (a.clone(), key_of(t, env, counter)))
                .collect(),
            false,
        ),
        _ => t.map_children(|c| key_of(c, env, counter)),
    }
}

fn freshen_with(t: &Term, ren: &mut HashMap<Name, Name>) -> Term {
    match t {
        Term::Var(x) => Term::Var(ren.get(x).cloned().unwrap_or_else(|| x.clone())),
        Term::Lambda(x, b) => {
            let nx = fresh(x);
            let old = ren.insert(x.clone(), nx.clone());
            let body = freshen_with(b, ren);
            restore(ren, x, old);
            Term::Lambda(nx, Box::new(body))
        }
        Term::LetRec(f, x, b) => {
            let nf = fresh(f);
            let nx = fresh(x);
            let of = ren.insert(f.clone(), nf.clone());
            let ox = ren.insert(x.clone(), nx.clone());
            let body = freshen_with(b, ren);
            restore(ren, x, ox);
            restore(ren, f, of);
            Term::LetRec(nf, nx, Box::new(body))
        }
        Term::Match(s, bs) => {
            let s = freshen_with(s, ren);
            let bs = bs
                .iter()
                .map(|b| {
                    let vars: Vec<Name> = b.vars.iter().map(|x| fresh(x)).collect();
                    let olds: Vec<_> = b
                        .vars
                        .iter()
                        .zip(&vars)
                        .map(|(x, nx)| (x.clone(), ren.insert(x.clone(), nx.clone())))
                        .collect();
                    let body = freshen_with(&b.body, ren);
                    for (x, old) in olds.into_iter().rev() {
                        restore(ren, &x, old);
                    }
                    Branch {
                        cons: b.cons.clone(),
                        vars,
                        body,
                    }
                })
                .collect();
            Term::Match(Box::new(s), bs)
        }
        _ => t.map_children(|c| freshen_with(c, ren)),
    }
}

fn restore(ren: &mut HashMap<Name, Name>, x: &Name, old: Option<Name>) {
    match old {
        Some(o) => {
            ren.insert(x.clone(), o);
        }
        None => {
            ren.remove(x);
        }
    }
}

fn subst(t: &Term, sigma: &BTreeMap<Name, Term>) -> Term {
    match t {
        Term::Var(x) => match sigma.get(x) {
            Some(v) => v.freshen(),
            None => t.clone(),
        },
        Term::Lambda(x, b) => {
            let (binders, body) = under_binders(std::slice::from_ref(x), b, sigma);
            Term::Lambda(binders[0].clone(), Box::new(body))
        }
        Term::LetRec(f, x, b) => {
            let (binders, body) = under_binders(&[f.clone(), x.clone()], b, sigma);
            Term::LetRec(binders[0].clone(), binders[1].clone(), Box::new(body))
        }
        Term::Match(s, bs) => {
            let s = subst(s, sigma);
            let bs = bs
                .iter()
                .map(|b| {
                    let (vars, body) = under_binders(&b.vars, &b.body, sigma);
                    Branch {
                        cons: b.cons.clone(),
                        vars,
                        body,
                    }
                })
                .collect();
            Term::Match(Box::new(s), bs)
        }
        _ => t.map_children(|c| subst(c, sigma)),
    }
}

/// Substitutes under `binders`, renaming any binder that would capture a
/// free variable of the inserted terms.
fn under_binders(
    binders: &[Name],
    body: &Term,
    sigma: &BTreeMap<Name, Term>,
) -> (Vec<Name>, Term) {
    let mut inner: BTreeMap<Name, Term> = sigma
        .iter()
        .filter(|(k, _)| !binders.contains(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (binders.to_vec(), body.clone());
    }
    let range_fv: BTreeSet<Name> = inner.values().flat_map(|v| v.free_vars()).collect();
    let mut out = Vec::with_capacity(binders.len());
    for b in binders {
        if range_fv.contains(b) {
            let nb = fresh(b);
            inner.insert(b.clone(), Term::Var(nb.clone()));
            out.push(nb);
        } else {
            out.push(b.clone());
        }
    }
    (out, subst(body, &inner))
}

/// `α·t` flattened into a list of weighted components.
pub fn scale_items(alpha: &Amplitude, t: &Term) -> Vec<(Amplitude, Term)> {
    match t {
        Term::Sum(items, _) => items
            .iter()
            .flat_map(|(b, s)| scale_items(&(alpha.clone() * b.clone()), s))
            .collect(),
        _ => vec![(alpha.clone(), t.clone())],
    }
}

/// Flattens nested sums and merges α-equal components, dropping those
/// whose amplitude cancels. Constructor and case linearity are not applied.
pub fn flatten_sum(t: &Term) -> Vec<(Amplitude, Term)> {
    let mut out: Vec<(Amplitude, Term, Term)> = Vec::new();
    for (a, s) in scale_items(&Amplitude::one(), t) {
        let k = s.alpha_key();
        if let Some(e) = out.iter_mut().find(|e| e.2 == k) {
            e.0 += a;
        } else {
            out.push((a, s, k));
        }
    }
    out.into_iter()
        .filter(|(a, _, _)| !a.is_zero())
        .map(|(a, s, _)| (a, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_respects_shadowing() {
        let t = Term::lam("x", Term::var("x"));
        let r = t.subst1("x", &Term::Ket0);
        assert!(r.alpha_eq(&t));
    }

    #[test]
    fn substitution_into_qcase() {
        let t = Term::qcase(Term::var("x"), Term::Ket0, Term::Ket1);
        let r = t.subst1("x", &Term::Ket0);
        assert_eq!(r, Term::qcase(Term::Ket0, Term::Ket0, Term::Ket1));
    }

    #[test]
    fn substitution_avoids_capture() {
        // (λy. x y){y/x} must not capture the inserted y
        let t = Term::lam("y", Term::app(Term::var("x"), Term::var("y")));
        let r = t.subst1("x", &Term::var("y"));
        match &r {
            Term::Lambda(b, body) => {
                assert_ne!(b, "y");
                assert_eq!(**body, Term::app(Term::var("y"), Term::var(b.clone())));
            }
            _ => panic!("expected a lambda"),
        }
    }

    #[test]
    fn fix_style_substitution() {
        let body = Term::app(Term::var("f"), Term::var("x"));
        let rec = Term::letrec("f", "x", body.clone());
        let mut s = BTreeMap::new();
        s.insert("f".to_string(), rec.clone());
        s.insert("x".to_string(), Term::Ket1);
        let r = body.substitute(&s);
        assert!(r.alpha_eq(&Term::app(rec, Term::Ket1)));
    }

    #[test]
    fn alpha_keys_identify_renamings() {
        let a = Term::lam("x", Term::lam("y", Term::app(Term::var("x"), Term::var("y"))));
        let b = Term::lam("p", Term::lam("q", Term::app(Term::var("p"), Term::var("q"))));
        let c = Term::lam("p", Term::lam("q", Term::app(Term::var("q"), Term::var("p"))));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
        assert!(a.freshen().alpha_eq(&a));
    }

    #[test]
    fn free_variables() {
        let t = Term::lam("x", Term::app(Term::var("x"), Term::var("z")));
        assert_eq!(t.free_vars().into_iter().collect::<Vec<_>>(), vec!["z"]);
    }

    #[test]
    fn values_and_pure_terms() {
        assert!(Term::plus().is_value());
        assert!(!Term::plus().is_pure());
        assert!(Term::list(vec![Term::plus()]).is_value());
        assert!(!Term::list(vec![Term::plus()]).is_pure());
        assert!(Term::app(Term::var("f"), Term::plus()).is_pure());
        assert_eq!(Term::nat(3).as_nat(), Some(3));
    }
}
