//! Call-by-value rewriting modulo the superposition equivalence.
//!
//! A term is first brought to a sum of pure components by distributing
//! superpositions through constructors and ordinary function symbols.
//! Every component that is not a value then takes one step, and the results
//! are merged again. The reduction context evaluates arguments right to
//! left, so the redex is the rightmost innermost one.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{Rule, STerm, Schema, Sttrs, KET0, KET1, SHAPE, UNIT};
use crate::ast::cons;
use crate::Amplitude;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteError {
    /// A component is neither a value nor a redex.
    Stuck { term: String, component: String, reason: String },
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::Stuck { term, component, reason } => {
                write!(f, "stuck at `{component}` in `{term}`: {reason}")
            }
        }
    }
}

impl std::error::Error for RewriteError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    To(STerm),
    AtValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteStatus {
    Value,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub steps: usize,
    pub term: STerm,
    pub status: RewriteStatus,
    /// Intermediate terms, when requested.
    pub trace: Vec<STerm>,
}

/// A rule set indexed by head symbol.
pub struct Rewriter<'a> {
    sys: &'a Sttrs,
    rules: BTreeMap<&'a str, Vec<&'a Rule>>,
    arity: BTreeMap<&'a str, usize>,
    constants: BTreeMap<&'a str, &'a STerm>,
}

impl<'a> Rewriter<'a> {
    pub fn new(sys: &'a Sttrs) -> Self {
        let mut rules: BTreeMap<&str, Vec<&Rule>> = BTreeMap::new();
        let mut arity = BTreeMap::new();
        let mut constants = BTreeMap::new();
        for r in &sys.rules {
            if let Some(f) = r.symbol() {
                rules.entry(f).or_default().push(r);
                arity.entry(f).or_insert(r.arity());
                if r.arity() == 0 {
                    constants.insert(f, &r.rhs);
                }
            }
        }
        for (f, t) in &sys.symbols {
            arity.entry(f.as_str()).or_insert(t.arity());
        }
        arity.insert(UNIT, 2);
        arity.insert(SHAPE, 1);
        Rewriter { sys, rules, arity, constants }
    }

    fn arity_of(&self, f: &str) -> usize {
        self.arity.get(f).copied().unwrap_or(0)
    }

    pub fn is_value(&self, t: &STerm) -> bool {
        match t {
            STerm::Var(_) | STerm::Con(_) => true,
            STerm::Fun(f) => !self.constants.contains_key(f.as_str()),
            STerm::Sum(items) => items.iter().all(|(_, s)| self.is_value(s)),
            STerm::App(h, args) => {
                let head_ok = match &**h {
                    STerm::Con(_) => true,
                    STerm::Fun(f) => args.len() < self.arity_of(f),
                    _ => false,
                };
                head_ok && args.iter().all(|a| self.is_value(a))
            }
        }
    }

    /// One step of the whole term.
    pub fn step(&self, t: &STerm) -> Result<Step, RewriteError> {
        if self.is_value(t) {
            return Ok(Step::AtValue);
        }
        let comps = decompose(t);
        let mut out = Vec::new();
        for (a, c) in comps {
            if self.is_value(&c) {
                out.push((a, c));
                continue;
            }
            let next = self.pure_step(&c).map_err(|(component, reason)| RewriteError::Stuck {
                term: t.to_string(),
                component,
                reason,
            })?;
            out.extend(scale(&a, decompose(&next)));
        }
        Ok(Step::To(rebuild(merge(out))))
    }

    /// One step of a component whose sums sit only under `shape`, `unit`
    /// or variable heads.
    fn pure_step(&self, t: &STerm) -> Result<STerm, (String, String)> {
        let stuck = |reason: &str| Err((t.to_string(), reason.to_string()));
        match t {
            STerm::Fun(f) => match self.constants.get(f.as_str()) {
                Some(r) => Ok((*r).clone()),
                None => stuck("not a redex"),
            },
            STerm::Sum(_) => match self.step(t) {
                Ok(Step::To(s)) => Ok(s),
                Ok(Step::AtValue) => stuck("not a redex"),
                Err(RewriteError::Stuck { component, reason, .. }) => Err((component, reason)),
            },
            STerm::App(h, args) => {
                if let Some(i) = args.iter().rposition(|a| !self.is_value(a)) {
                    let inner = self.pure_step(&args[i])?;
                    let mut args = args.clone();
                    args[i] = inner;
                    return Ok(STerm::app((**h).clone(), args));
                }
                match &**h {
                    STerm::Fun(f) if f == SHAPE && matches!(args[0], STerm::Sum(_)) => {
                        self.shape_schema(&args[0])
                            .map(|r| STerm::app(r, args[1..].to_vec()))
                            .ok_or_else(|| (t.to_string(), "no shape schema applies".into()))
                    }
                    STerm::Fun(f) => self.fire(f, args).ok_or_else(|| {
                        (t.to_string(), format!("no rule for `{f}` matches"))
                    }),
                    STerm::Var(x) => stuck(&format!("free variable `{x}` in head position")),
                    STerm::Con(_) => stuck("not a redex"),
                    _ => stuck("malformed application"),
                }
            }
            STerm::Var(x) => stuck(&format!("free variable `{x}`")),
            STerm::Con(_) => stuck("not a redex"),
        }
    }

    fn fire(&self, f: &str, args: &[STerm]) -> Option<STerm> {
        let rules = self.rules.get(f)?;
        for r in rules {
            let k = r.arity();
            if args.len() < k {
                continue;
            }
            let mut sigma = BTreeMap::new();
            let pats = r.lhs.spine().1;
            if pats.iter().zip(args).all(|(p, v)| matches(p, v, &mut sigma)) {
                return Some(STerm::app(r.rhs.substitute(&sigma), args[k..].to_vec()));
            }
        }
        None
    }

    fn shape_schema(&self, arg: &STerm) -> Option<STerm> {
        let comps = merge(decompose(arg));
        let kets = comps
            .iter()
            .all(|(_, c)| matches!(c, STerm::Con(k) if k == KET0 || k == KET1));
        if kets && self.sys.schemas.contains(&Schema::ShapeQubitSum) {
            return Some(STerm::con(cons::UNIT));
        }
        if self.sys.schemas.contains(&Schema::ShapeSum) {
            let (_, first) = comps.into_iter().next()?;
            return Some(STerm::app(STerm::fun(SHAPE), vec![first]));
        }
        None
    }

    pub fn run(&self, t: &STerm, fuel: usize, keep_trace: bool) -> Result<Run, RewriteError> {
        let mut cur = normalize(t);
        let mut trace = Vec::new();
        if keep_trace {
            trace.push(cur.clone());
        }
        for steps in 0..=fuel {
            match self.step(&cur)? {
                Step::AtValue => {
                    return Ok(Run { steps, term: cur, status: RewriteStatus::Value, trace })
                }
                Step::To(_) if steps == fuel => break,
                Step::To(next) => {
                    cur = next;
                    if keep_trace {
                        trace.push(cur.clone());
                    }
                }
            }
        }
        Ok(Run { steps: fuel, term: cur, status: RewriteStatus::FuelExhausted, trace })
    }
}

fn matches(p: &STerm, v: &STerm, sigma: &mut BTreeMap<String, STerm>) -> bool {
    match (p, v) {
        (STerm::Var(x), _) => {
            sigma.insert(x.clone(), v.clone());
            true
        }
        (STerm::Con(a), STerm::Con(b)) => a == b,
        (STerm::App(h1, a1), STerm::App(h2, a2)) => {
            h1 == h2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(p, v)| matches(p, v, sigma))
        }
        _ => false,
    }
}

fn scale(a: &Amplitude, items: Vec<(Amplitude, STerm)>) -> Vec<(Amplitude, STerm)> {
    items.into_iter().map(|(b, t)| (a.clone() * b, t)).collect()
}

/// Distributes sums through constructors and function symbols other than
/// `shape` and `unit`. Arguments of those two are normalized in place.
pub fn decompose(t: &STerm) -> Vec<(Amplitude, STerm)> {
    match t {
        STerm::Sum(items) => items
            .iter()
            .flat_map(|(a, s)| scale(a, decompose(s)))
            .collect(),
        STerm::App(h, args) => {
            let opaque = match &**h {
                STerm::Fun(f) => f == SHAPE || f == UNIT,
                STerm::Var(_) => true,
                _ => false,
            };
            if opaque {
                let args = args.iter().map(normalize).collect();
                return vec![(Amplitude::one(), STerm::app((**h).clone(), args))];
            }
            let mut acc: Vec<(Amplitude, Vec<STerm>)> = vec![(Amplitude::one(), Vec::new())];
            for a in args {
                let parts = merge(decompose(a));
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for (c, prefix) in &acc {
                    for (d, p) in &parts {
                        let mut v = prefix.clone();
                        v.push(p.clone());
                        next.push((c.clone() * d.clone(), v));
                    }
                }
                acc = next;
            }
            acc.into_iter()
                .map(|(c, v)| (c, STerm::app((**h).clone(), v)))
                .collect()
        }
        _ => vec![(Amplitude::one(), t.clone())],
    }
}

/// Adds up equal components, drops zero ones and sorts the rest.
pub fn merge(items: Vec<(Amplitude, STerm)>) -> Vec<(Amplitude, STerm)> {
    let mut acc: BTreeMap<STerm, Amplitude> = BTreeMap::new();
    for (a, t) in items {
        let e = acc.entry(t).or_insert_with(Amplitude::zero);
        *e += a;
    }
    acc.into_iter()
        .filter(|(_, a)| !a.is_zero())
        .map(|(t, a)| (a, t))
        .collect()
}

fn rebuild(items: Vec<(Amplitude, STerm)>) -> STerm {
    if items.len() == 1 && items[0].0.is_one() {
        return items.into_iter().next().expect("one component").1;
    }
    STerm::Sum(items)
}

/// The canonical representative of `t` under the superposition equivalence.
/// An empty superposition is kept as an empty sum.
pub fn normalize(t: &STerm) -> STerm {
    rebuild(merge(decompose(t)))
}

pub fn rewrite_step(sys: &Sttrs, t: &STerm) -> Result<Step, RewriteError> {
    Rewriter::new(sys).step(&normalize(t))
}

pub fn rewrite_star(sys: &Sttrs, t: &STerm, fuel: usize) -> Result<Run, RewriteError> {
    Rewriter::new(sys).run(t, fuel, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sttrs::parse_trs;

    const HAD: &str = "sym had : Qbit -> Qbit;\n\
        had(|0>) -> (1/sqrt2)*|0> + (1/sqrt2)*|1>;\n\
        had(|1>) -> (1/sqrt2)*|0> + (-1/sqrt2)*|1>;\n";

    const ACK: &str = "sym ack : nat x nat -> nat;\n\
        ack(0, n) -> S(n);\n\
        ack(S(m), 0) -> ack(m, 1);\n\
        ack(S(m), S(n)) -> ack(m, ack(S(m), n));\n";

    fn plus() -> STerm {
        let h = Amplitude::inv_sqrt2();
        STerm::Sum(vec![(h.clone(), STerm::ket(false)), (h, STerm::ket(true))])
    }

    #[test]
    fn hadamard_one_step() {
        let s = parse_trs(HAD).unwrap();
        let t = STerm::app(STerm::fun("had"), vec![STerm::ket(false)]);
        assert_eq!(rewrite_step(&s, &t).unwrap(), Step::To(plus()));
        let run = rewrite_star(&s, &t, 10).unwrap();
        assert_eq!((run.steps, run.status), (1, RewriteStatus::Value));
    }

    #[test]
    fn interference() {
        let s = parse_trs(HAD).unwrap();
        let h = Amplitude::inv_sqrt2();
        let had = |k| STerm::app(STerm::fun("had"), vec![STerm::ket(k)]);
        let t = STerm::Sum(vec![(h.clone(), had(false)), (h, had(true))]);
        let run = rewrite_star(&s, &t, 10).unwrap();
        assert_eq!(run.term, STerm::ket(false));
        assert_eq!(run.steps, 1);
    }

    fn ackermann(m: usize, n: usize) -> usize {
        match (m, n) {
            (0, n) => n + 1,
            (m, 0) => ackermann(m - 1, 1),
            (m, n) => ackermann(m - 1, ackermann(m, n - 1)),
        }
    }

    #[test]
    fn ackermann_values() {
        let s = parse_trs(ACK).unwrap();
        for m in 0..=2 {
            for n in 0..=3 {
                let t = STerm::app(STerm::fun("ack"), vec![STerm::nat(m), STerm::nat(n)]);
                let run = rewrite_star(&s, &t, 100_000).unwrap();
                assert_eq!(run.term.as_nat(), Some(ackermann(m, n)), "ack({m},{n})");
            }
        }
    }

    #[test]
    fn superposed_argument_distributes() {
        let s = parse_trs(HAD).unwrap();
        let t = STerm::app(STerm::fun("had"), vec![plus()]);
        let run = rewrite_star(&s, &t, 10).unwrap();
        assert_eq!(run.term, STerm::ket(false));
    }

    #[test]
    fn library_rules() {
        let mut s = parse_trs(HAD).unwrap();
        s.install_library();
        let t = STerm::app(STerm::fun(UNIT), vec![STerm::fun("had"), STerm::ket(true)]);
        let run = rewrite_star(&s, &t, 10).unwrap();
        assert_eq!(run.steps, 2);
        let l = STerm::cons(cons::CONS, vec![plus(), STerm::con(cons::NIL)]);
        let t = STerm::app(STerm::fun(SHAPE), vec![l]);
        let run = rewrite_star(&s, &t, 10).unwrap();
        assert_eq!(
            run.term,
            STerm::cons(cons::CONS, vec![STerm::con(cons::UNIT), STerm::con(cons::NIL)])
        );
    }

    #[test]
    fn stuck_is_reported() {
        let s = parse_trs("sym f : nat -> nat;\nf(0) -> 0;\n").unwrap();
        let t = STerm::app(STerm::fun("f"), vec![STerm::nat(1)]);
        assert!(matches!(rewrite_star(&s, &t, 10), Err(RewriteError::Stuck { .. })));
    }

    #[test]
    fn fuel_runs_out() {
        let s = parse_trs("sym f : nat -> nat;\nf(x) -> f(x);\n").unwrap();
        let t = STerm::app(STerm::fun("f"), vec![STerm::nat(0)]);
        let run = rewrite_star(&s, &t, 7).unwrap();
        assert_eq!((run.steps, run.status), (7, RewriteStatus::FuelExhausted));
    }
}
