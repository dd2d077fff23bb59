//! Call-by-value small-step evaluation.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{shadow_constructor, Term};
use crate::canonical::{canonicalize, pure_key, Canonical};
use crate::parser::pretty;
use crate::Amplitude;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Qcase0,
    Qcase1,
    Match,
    Lbd,
    Fix,
    Unit,
    Can,
    Shape0,
    Shape1,
    ShapeC,
    ShapeS,
    Equiv,
    Ctx,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Qcase0 => "Qcase0",
            Rule::Qcase1 => "Qcase1",
            Rule::Match => "Match",
            Rule::Lbd => "Lbd",
            Rule::Fix => "Fix",
            Rule::Unit => "Unit",
            Rule::Can => "Can",
            Rule::Shape0 => "Shape0",
            Rule::Shape1 => "Shape1",
            Rule::ShapeC => "Shape_c",
            Rule::ShapeS => "Shape_s",
            Rule::Equiv => "Equiv",
            Rule::Ctx => "Ctx",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// One top-level derivation; the rule is the one applied at the redex.
    Next(Term, Rule),
    AtValue,
    Stuck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Value,
    Stuck,
    FuelExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: Rule,
    #[serde(serialize_with = "ser_term")]
    pub term: Term,
}

fn ser_term<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&pretty(t))
}

#[derive(Debug, Clone, Serialize)]
pub struct StepTrace {
    pub entries: Vec<TraceEntry>,
    pub steps: usize,
    pub status: Status,
}

impl StepTrace {
    pub fn rules(&self) -> Vec<Rule> {
        self.entries.iter().map(|e| e.rule).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.entries).expect("trace serializes")
    }
}

/// Chooses which non-value components advance under (Can). The default
/// strategy advances all of them.
pub type Selector<'a> = &'a mut dyn FnMut(usize) -> bool;

pub fn step(t: &Term) -> Step {
    step_sel(t, &mut None)
}

/// Like [`step`], but (Can) only advances the components the selector
/// accepts (at least one non-value component always advances).
pub fn step_selected(t: &Term, sel: Selector<'_>) -> Step {
    step_sel(t, &mut Some(sel))
}

fn step_sel(t: &Term, sel: &mut Option<Selector<'_>>) -> Step {
    if t.is_value() {
        return Step::AtValue;
    }
    if t.is_pure() {
        return step_pure(t, sel);
    }
    let form = match canonicalize(t) {
        Canonical::ZeroTerm => return Step::Stuck,
        Canonical::Form(f) => f,
    };
    if form.is_value() {
        // cancelling components leave a value behind
        return Step::Next(form.collapse(), Rule::Can);
    }
    if let [(a, p)] = form.items() {
        if num_traits::One::is_one(a) {
            return step_pure(p, sel);
        }
    }
    let pending: Vec<usize> = form
        .items()
        .iter()
        .enumerate()
        .filter(|(_, (_, p))| !p.is_value())
        .map(|(i, _)| i)
        .collect();
    let mut chosen: Vec<usize> = match sel {
        Some(f) => pending.iter().copied().filter(|&i| f(i)).collect(),
        None => pending.clone(),
    };
    if chosen.is_empty() {
        chosen.push(pending[0]);
    }
    let mut out = Vec::with_capacity(form.len());
    for (i, (a, p)) in form.items().iter().enumerate() {
        if chosen.contains(&i) {
            match step_sel(p, sel) {
                Step::Next(q, _) => out.push((a.clone(), q)),
                _ => return Step::Stuck,
            }
        } else {
            out.push((a.clone(), p.clone()));
        }
    }
    Step::Next(Term::Sum(out, false), Rule::Can)
}

fn wrap(r: Step, f: impl FnOnce(Term) -> Term) -> Step {
    match r {
        Step::Next(t, rule) => Step::Next(f(t), rule),
        other => other,
    }
}

fn step_pure(t: &Term, sel: &mut Option<Selector<'_>>) -> Step {
    match t {
        Term::Var(_) | Term::Ket0 | Term::Ket1 | Term::Lambda(..) | Term::LetRec(..) | Term::Unit(_) => {
            Step::AtValue
        }
        Term::QCase {
            scrut,
            zero,
            one,
            assume_orthogonal,
        } => {
            if scrut.is_value() {
                return match **scrut {
                    Term::Ket0 => Step::Next((**zero).clone(), Rule::Qcase0),
                    Term::Ket1 => Step::Next((**one).clone(), Rule::Qcase1),
                    _ => Step::Stuck,
                };
            }
            wrap(step_sel(scrut, sel), |s| Term::QCase {
                scrut: Box::new(s),
                zero: zero.clone(),
                one: one.clone(),
                assume_orthogonal: *assume_orthogonal,
            })
        }
        Term::Match(s, branches) => {
            if s.is_value() {
                let Term::Cons(c, vs) = &**s else {
                    return Step::Stuck;
                };
                let Some(b) = branches.iter().find(|b| &b.cons == c) else {
                    return Step::Stuck;
                };
                if b.vars.len() != vs.len() {
                    return Step::Stuck;
                }
                let sigma = b.vars.iter().cloned().zip(vs.iter().cloned()).collect();
                return Step::Next(b.body.substitute(&sigma), Rule::Match);
            }
            wrap(step_sel(s, sel), |s2| Term::Match(Box::new(s2), branches.clone()))
        }
        Term::Cons(c, args) => {
            let Some(i) = args.iter().rposition(|a| !a.is_value()) else {
                return Step::AtValue;
            };
            wrap(step_sel(&args[i], sel), |a| {
                let mut v = args.clone();
                v[i] = a;
                Term::Cons(c.clone(), v)
            })
        }
        Term::App(f, a) => {
            if !a.is_value() {
                return wrap(step_sel(a, sel), |a2| Term::App(f.clone(), Box::new(a2)));
            }
            if !f.is_value() {
                return wrap(step_sel(f, sel), |f2| Term::App(Box::new(f2), a.clone()));
            }
            match &**f {
                Term::Lambda(x, body) => Step::Next(body.subst1(x, a), Rule::Lbd),
                Term::LetRec(g, x, body) => {
                    let mut sigma = std::collections::BTreeMap::new();
                    sigma.insert(g.clone(), (**f).clone());
                    sigma.insert(x.clone(), (**a).clone());
                    Step::Next(body.substitute(&sigma), Rule::Fix)
                }
                Term::Unit(u) => Step::Next(Term::App(u.clone(), a.clone()), Rule::Unit),
                _ => Step::Stuck,
            }
        }
        Term::Shape(s) => {
            if !s.is_value() {
                return wrap(step_sel(s, sel), Term::shape);
            }
            shape_value(s)
        }
        Term::Sum(..) => step_sel(t, sel),
    }
}

fn shape_value(v: &Term) -> Step {
    match v {
        Term::Ket0 => Step::Next(Term::unit_value(), Rule::Shape0),
        Term::Ket1 => Step::Next(Term::unit_value(), Rule::Shape1),
        Term::Cons(c, vs) => Step::Next(
            Term::Cons(
                shadow_constructor(c),
                vs.iter().map(|x| Term::shape(x.clone())).collect(),
            ),
            Rule::ShapeC,
        ),
        Term::Sum(..) => match canonicalize(v) {
            Canonical::ZeroTerm => Step::Stuck,
            Canonical::Form(f) => match f.items() {
                [(a, p)] if num_traits::One::is_one(a) => shape_value(p),
                items => Step::Next(Term::shape(items[0].1.clone()), Rule::ShapeS),
            },
        },
        _ => Step::Stuck,
    }
}

/// Runs `t` for at most `fuel` steps, recording every intermediate term.
pub fn reduce(t: &Term, fuel: usize) -> (StepTrace, Term) {
    reduce_impl(t, fuel, true)
}

/// [`reduce`] without recording intermediate terms.
pub fn run(t: &Term, fuel: usize) -> (StepTrace, Term) {
    reduce_impl(t, fuel, false)
}

fn reduce_impl(t: &Term, fuel: usize, record: bool) -> (StepTrace, Term) {
    let mut cur = t.clone();
    let mut entries = Vec::new();
    let mut steps = 0;
    let status = loop {
        match step(&cur) {
            Step::AtValue => break Status::Value,
            Step::Stuck => break Status::Stuck,
            Step::Next(next, rule) => {
                if steps == fuel {
                    break Status::FuelExhausted;
                }
                steps += 1;
                if record {
                    entries.push(TraceEntry {
                        step: steps,
                        rule,
                        term: next.clone(),
                    });
                }
                cur = next;
            }
        }
    };
    let last = if status == Status::Value {
        canonicalize(&cur).to_term()
    } else {
        cur
    };
    (
        StepTrace {
            entries,
            steps,
            status,
        },
        last,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InnerProductError {
    #[error("evaluation did not reach a value within {0} steps")]
    NotTerminated(usize),
    #[error("evaluation got stuck on {0}")]
    Stuck(String),
}

/// Evaluates `t` to a value and returns its canonical components.
pub fn value_components(t: &Term, fuel: usize) -> Result<Vec<(Amplitude, Term)>, InnerProductError> {
    let (trace, v) = run(t, fuel);
    match trace.status {
        Status::Value => Ok(match canonicalize(&v) {
            Canonical::ZeroTerm => Vec::new(),
            Canonical::Form(f) => f.items().to_vec(),
        }),
        Status::FuelExhausted => Err(InnerProductError::NotTerminated(fuel)),
        Status::Stuck => Err(InnerProductError::Stuck(pretty(&v))),
    }
}

/// `Σᵢⱼ αᵢ β̄ⱼ δ(vᵢ, wⱼ)` over the canonical values of `s` and `t`.
pub fn inner_product(s: &Term, t: &Term, fuel: usize) -> Result<Amplitude, InnerProductError> {
    let a = value_components(s, fuel)?;
    let b = value_components(t, fuel)?;
    Ok(inner_product_of(&a, &b))
}

pub fn inner_product_of(a: &[(Amplitude, Term)], b: &[(Amplitude, Term)]) -> Amplitude {
    let bk: Vec<_> = b.iter().map(|(beta, w)| (beta, pure_key(w))).collect();
    let mut acc = <Amplitude as num_traits::Zero>::zero();
    for (alpha, v) in a {
        let k = pure_key(v);
        for (beta, wk) in &bk {
            if *wk == k {
                acc += alpha.clone() * beta.conj();
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Registry;
    use crate::parser::parse_term;
    use num_traits::{One, Zero};

    const HAD: &str = "unit (\\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> })";

    fn p(s: &str) -> Term {
        parse_term(s, &Registry::new()).unwrap()
    }

    #[test]
    fn cancelled_argument_is_not_a_stop() {
        let t = p("(\\q. q) ((-1)*|1> + (1/2)*((\\y. y) |0>) + (-1/2)*((\\y. y) |0>))");
        let (trace, v) = run(&t, 100);
        assert_eq!(trace.status, Status::Value);
        assert!(v.alpha_eq(&p("(-1)*|1>")), "{}", crate::parser::pretty(&v));
    }

    #[test]
    fn hadamard_three_steps() {
        let (trace, v) = reduce(&p(&format!("{HAD} |0>")), 10);
        assert_eq!(trace.status, Status::Value);
        assert_eq!(trace.rules(), vec![Rule::Unit, Rule::Lbd, Rule::Qcase0]);
        assert!(crate::canonical::equiv(&v, &Term::plus()));
    }

    #[test]
    fn hadamard_inverse() {
        let (trace, v) = reduce(&p(&format!("{HAD} ({HAD} |0>)")), 50);
        assert_eq!(trace.status, Status::Value);
        assert_eq!(v, Term::Ket0);
    }

    #[test]
    fn shape_of_list() {
        let (_, v) = reduce(&p("shape [|0>, |1>, (1/sqrt2)*|0> + (1/sqrt2)*|1>]"), 100);
        assert_eq!(v, p("[(), (), ()]"));
    }

    #[test]
    fn divergence() {
        let (trace, _) = reduce(&p("(letrec f x = f x) |0>"), 50);
        assert_eq!(trace.status, Status::FuelExhausted);
        assert_eq!(trace.steps, 50);
    }

    #[test]
    fn inner_products() {
        let plus = Term::plus();
        let minus = Term::minus();
        assert!(inner_product(&plus, &minus, 10).unwrap().is_zero());
        assert!(inner_product(&plus, &plus, 10).unwrap().is_one());
        assert!(inner_product(&Term::Ket0, &Term::Ket1, 10).unwrap().is_zero());
    }

    #[test]
    fn stuck_on_open_terms() {
        assert_eq!(step(&p("qcase y { 0 -> |0>, 1 -> |1> }")), Step::Stuck);
    }
}
