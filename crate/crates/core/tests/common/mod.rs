//! Generators and checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use hyrql::ast::{Registry, Term, Type};
use hyrql::canonical::{canonicalize, decompose, equiv, normalize, pure_key, quantity, Canonical};
use hyrql::eval::{self, Status, Step};
use hyrql::parser::{self, pretty, SourceFile};
use hyrql::typecheck::{check, check_closed, CheckBudget, Context};
use hyrql::Amplitude;

pub const GATES: &str = r"
let had : Qbit <-> Qbit = unit (\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> });
let not : Qbit <-> Qbit = unit (\q. qcase q { 0 -> |1>, 1 -> |0> });
let s : Qbit <-> Qbit = unit (\x. qcase x { 0 -> |0>, 1 -> i*|1> });
let hn : Qbit -o Qbit = \x. had (not x);
let len : [bit] => nat = letrec f x = match x { [] -> 0, h :: t -> S (f t) };
let map : (Qbit <-> Qbit) => [Qbit] -o [Qbit] =
  letrec f phi = \x. match x { [] -> [], h :: t -> (phi h) :: ((f phi) t) };
let qs : (Qbit <-> Qbit) => (Qbit <-> Qbit) => (Qbit, Qbit) -o (Qbit, Qbit) =
  \f. \g. \x. match x { (c, t) -> @orthogonal qcase c { 0 -> (|0>, f (g t)), 1 -> (|1>, g (f t)) } };
let ack : nat => nat => nat =
  letrec f m = \n. match m { 0 -> S n, S m' -> match n { 0 -> f m' 1, S n' -> f m' (f (S m') n') } };
";

pub fn lib() -> &'static SourceFile {
    static LIB: OnceLock<SourceFile> = OnceLock::new();
    LIB.get_or_init(|| parser::parse(GATES).expect("gate library parses"))
}

pub fn term(src: &str) -> Term {
    lib().parse_term(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

pub fn budget() -> CheckBudget {
    CheckBudget::default()
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

// ---- generators ----

pub fn amp() -> impl Strategy<Value = Amplitude> {
    (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2, 1i64..=3).prop_map(|(a, b, c, d, den)| {
        Amplitude::new(
            hyrql::BigRational::new(a.into(), den.into()),
            hyrql::BigRational::new(b.into(), den.into()),
            hyrql::BigRational::new(c.into(), den.into()),
            hyrql::BigRational::new(d.into(), den.into()),
        )
    })
}

pub fn nonzero_amp() -> impl Strategy<Value = Amplitude> {
    amp().prop_filter("nonzero", |a| !a.is_zero())
}

/// Closed pure terms, values and redexes alike.
pub fn pure_pool() -> Vec<Term> {
    let mut v = vec![
        Term::Ket0,
        Term::Ket1,
        Term::pair(Term::Ket0, Term::Ket1),
        Term::pair(Term::Ket1, Term::Ket1),
        Term::nat(0),
        Term::nat(2),
        Term::bit(true),
        Term::list(vec![Term::Ket0, Term::Ket1]),
        Term::list(vec![]),
        Term::unit_value(),
    ];
    for src in ["had |0>", "not |1>", r"\x. x", "len [b1]"] {
        v.push(term(src));
    }
    v
}

pub fn pure_term() -> impl Strategy<Value = Term> {
    proptest::sample::select(pure_pool())
}

/// Superpositions over the pool, nested through sums and pairs.
pub fn superposition() -> impl Strategy<Value = Term> {
    let leaf = pure_term();
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            proptest::collection::vec((amp(), inner.clone()), 1..4).prop_map(Term::sum),
            (inner.clone(), inner).prop_map(|(a, b)| Term::pair(a, b)),
        ]
    })
}

pub fn qubit_basis() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Term::Ket0), Just(Term::Ket1)]
}

/// A chain of gates applied to a basis qubit.
pub fn gate_chain() -> impl Strategy<Value = Term> {
    (proptest::collection::vec(proptest::sample::select(vec!["had", "not", "s", "hn"]), 0..4), qubit_basis())
        .prop_map(|(gs, v)| gs.iter().fold(v, |acc, g| Term::app(term(g), acc)))
}

/// Closed well-typed programs from the library.
pub fn program() -> impl Strategy<Value = Term> {
    let bits = proptest::collection::vec(any::<bool>(), 0..4)
        .prop_map(|bs| Term::app(term("len"), Term::list(bs.into_iter().map(Term::bit).collect())));
    let kets = proptest::collection::vec(gate_chain(), 0..3)
        .prop_map(|ks| Term::apps(term("map"), [term("had"), Term::list(ks)]));
    let qs = (gate_chain(), gate_chain())
        .prop_map(|(a, b)| Term::apps(term("qs"), [term("had"), term("not"), Term::pair(a, b)]));
    let ack = (0usize..=1, 0usize..=2).prop_map(|(m, n)| Term::apps(term("ack"), [Term::nat(m), Term::nat(n)]));
    let sup = (gate_chain(), gate_chain()).prop_map(|(a, b)| {
        Term::sum(vec![
            (Amplitude::inv_sqrt2(), Term::app(term("had"), a)),
            (Amplitude::inv_sqrt2(), Term::app(term("had"), b)),
        ])
    });
    prop_oneof![gate_chain(), bits, kets, qs, ack, sup]
        .prop_filter("well typed", |t| check_closed(&lib().registry, t, None, &budget()).is_ok())
}

/// Choices consumed cyclically by a redex selector.
pub fn choices() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), 1..16)
}

// ---- checks ----

fn canon_eq(a: &Canonical, b: &Canonical) -> bool {
    match (a, b) {
        (Canonical::ZeroTerm, Canonical::ZeroTerm) => true,
        (Canonical::Form(x), Canonical::Form(y)) => {
            x.items().len() == y.items().len()
                && x.items().iter().zip(y.items()).all(|((a, p), (b, q))| a == b && pure_key(p) == pure_key(q))
        }
        _ => false,
    }
}

pub fn canonical_idempotent(t: &Term) -> Result<(), TestCaseError> {
    let c = canonicalize(t);
    let again = canonicalize(&c.to_term());
    if !canon_eq(&c, &again) {
        return fail(format!("not idempotent on {}", pretty(t)));
    }
    if let Canonical::Form(f) = &c {
        let keys: std::collections::BTreeSet<Term> = f.items().iter().map(|(_, p)| pure_key(p)).collect();
        if keys.len() != f.items().len() || f.items().iter().any(|(a, _)| a.is_zero()) {
            return fail(format!("duplicate or zero component in {}", pretty(&c.to_term())));
        }
    }
    Ok(())
}

/// Reordering the components and splitting one amplitude in two leaves
/// the canonical form unchanged.
pub fn canonical_unique(t: &Term, rot: usize, split: &Amplitude) -> Result<(), TestCaseError> {
    let mut items = decompose(t);
    let n = items.len();
    items.rotate_left(rot % n);
    let (a, p) = items[0].clone();
    items[0] = (a - split.clone(), p.clone());
    items.push((split.clone(), p));
    items.reverse();
    let u = Term::sum(items);
    if !canon_eq(&canonicalize(t), &canonicalize(&u)) {
        return fail(format!("{} and {} differ", pretty(t), pretty(&u)));
    }
    Ok(())
}

pub fn pure_is_own_form(p: &Term) -> Result<(), TestCaseError> {
    match canonicalize(p) {
        Canonical::Form(f) if f.items().len() == 1 && f.items()[0].0.is_one() => Ok(()),
        _ => fail(format!("pure {} is not its own canonical form", pretty(p))),
    }
}

pub fn quantity_laws(p: &Term, q: &Term, t: &Term) -> Result<(), TestCaseError> {
    if !quantity(p, p).is_one() {
        return fail(format!("θ_p(p) != 1 for {}", pretty(p)));
    }
    let kron = if equiv(p, q) { Amplitude::one() } else { Amplitude::zero() };
    if quantity(p, q) != kron {
        return fail(format!("θ_{}({}) is not Kronecker", pretty(p), pretty(q)));
    }
    let c = canonicalize(t);
    if quantity(p, t) != quantity(p, &c.to_term()) {
        return fail(format!("θ_{} changes under canonicalization of {}", pretty(p), pretty(t)));
    }
    if !quantity(p, t).is_zero() && c == Canonical::ZeroTerm {
        return fail(format!("{} has a nonzero quantity but is zero", pretty(t)));
    }
    Ok(())
}

/// Runs `t` with (Can) advancing the components picked by `choice`.
pub fn run_selected(t: &Term, choice: &[bool], fuel: usize) -> Option<(Vec<Term>, Term)> {
    let mut cur = t.clone();
    let mut seen = Vec::new();
    let mut k = 0usize;
    for _ in 0..fuel {
        let mut sel = |_: usize| {
            k += 1;
            choice[k % choice.len()]
        };
        match eval::step_selected(&cur, &mut sel) {
            Step::AtValue => return Some((seen, cur)),
            Step::Stuck => return None,
            Step::Next(n, _) => {
                seen.push(n.clone());
                cur = n;
            }
        }
    }
    None
}

pub fn confluent(t: &Term, choice: &[bool]) -> Result<(), TestCaseError> {
    let (trace, v) = eval::run(t, 10_000);
    if trace.status != Status::Value {
        return fail(format!("{} did not terminate", pretty(t)));
    }
    match run_selected(t, choice, 10_000) {
        Some((_, w)) if equiv(&v, &w) => Ok(()),
        Some((_, w)) => fail(format!("{}: {} vs {}", pretty(t), pretty(&v), pretty(&w))),
        None => fail(format!("{} stuck under a perturbed order", pretty(t))),
    }
}

/// Every term on the trace of `t` keeps the type of `t`.
pub fn subject_reduction(t: &Term) -> Result<(), TestCaseError> {
    let reg = &lib().registry;
    let ty = match check_closed(reg, t, None, &budget()) {
        Ok(typed) => typed.ty,
        Err(e) => return fail(format!("{} not typed: {e}", pretty(t))),
    };
    let (trace, _) = eval::reduce(t, 10_000);
    if trace.status != Status::Value {
        return fail(format!("{} did not terminate", pretty(t)));
    }
    for e in &trace.entries {
        if let Err(err) = check_closed(reg, &e.term, Some(&ty), &budget()) {
            return fail(format!("{} loses type {ty} at {}: {err}", pretty(t), pretty(&e.term)));
        }
        if has_zero_amplitude(&e.term) {
            return fail(format!("zero amplitude in {}", pretty(&e.term)));
        }
    }
    Ok(())
}

fn has_zero_amplitude(t: &Term) -> bool {
    match t {
        Term::Sum(items, _) => items.iter().any(|(a, x)| a.is_zero() || has_zero_amplitude(x)),
        _ => t.children().into_iter().any(has_zero_amplitude),
    }
}

pub fn unit_norm(t: &Term) -> Result<(), TestCaseError> {
    let ip = eval::inner_product(t, t, 1000).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    if !ip.is_one() {
        return fail(format!("<v,v> = {ip} for {}", pretty(t)));
    }
    Ok(())
}

pub fn plus_minus_orthogonal() -> Result<(), TestCaseError> {
    let ip = eval::inner_product(&Term::plus(), &Term::minus(), 100).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    if !ip.is_zero() {
        return fail(format!("<+|-> = {ip}"));
    }
    Ok(())
}

/// Linear functions with a finite basis on their domain.
pub fn linear_functions() -> Vec<(&'static str, Vec<Term>)> {
    let q = vec![Term::Ket0, Term::Ket1];
    let pairs: Vec<Term> = q.iter().flat_map(|a| q.iter().map(|b| Term::pair(a.clone(), b.clone()))).collect();
    let lists: Vec<Term> = pairs
        .iter()
        .map(|p| match p {
            Term::Cons(_, ab) => Term::list(ab.clone()),
            _ => unreachable!(),
        })
        .collect();
    vec![
        ("had", q.clone()),
        ("not", q.clone()),
        ("s", q.clone()),
        ("hn", q),
        ("qs had not", pairs),
        ("map had", lists),
    ]
}

pub fn linear(f: &str, basis: &[Term], amps: &[Amplitude]) -> Result<(), TestCaseError> {
    let ft = term(f);
    let items: Vec<(Amplitude, Term)> = basis.iter().cloned().zip(amps.iter().cloned()).map(|(v, a)| (a, v)).collect();
    let input = Term::sum(items.clone());
    let (tr, lhs) = eval::run(&Term::app(ft.clone(), input), 10_000);
    if tr.status != Status::Value {
        return fail(format!("{f} did not terminate"));
    }
    let mut rhs = Vec::new();
    for (a, v) in items {
        let (tr, out) = eval::run(&Term::app(ft.clone(), v), 10_000);
        if tr.status != Status::Value {
            return fail(format!("{f} did not terminate"));
        }
        rhs.push((a, out));
    }
    let rhs = Term::sum(rhs);
    if normalize(&lhs) != normalize(&rhs) {
        return fail(format!("{f}: {} vs {}", pretty(&lhs), pretty(&rhs)));
    }
    Ok(())
}

/// Judgments `Γ; Δ ⊢ t : T` known to hold.
pub fn judgments() -> Vec<(Context, Term, Type)> {
    let q = Type::Qbit;
    vec![
        (Context::new(), term("had"), Type::uni(q.clone(), q.clone())),
        (Context::new(), term("len"), Type::cls(Type::list(Type::bit()), Type::nat())),
        (Context::new().with_linear("q", q.clone()), term("had q"), q.clone()),
        (
            Context::new().with_classical("b", Type::bit()).with_linear("q", q.clone()),
            term("match b { b0 -> q, b1 -> not q }"),
            q.clone(),
        ),
        (Context::new().with_classical("n", Type::nat()), term("S n"), Type::nat()),
        (Context::new().with_linear("q", q.clone()), term("(q, shape q)"), Type::tensor(q.clone(), Type::Unit)),
        (Context::new(), term("qs had not"), Type::lin(Type::tensor(q.clone(), q.clone()), Type::tensor(q.clone(), q))),
    ]
}

pub fn classical_type() -> impl Strategy<Value = Type> {
    proptest::sample::select(vec![
        Type::nat(),
        Type::bit(),
        Type::Unit,
        Type::list(Type::bit()),
        Type::tensor(Type::bit(), Type::nat()),
        Type::cls(Type::nat(), Type::nat()),
    ])
}

pub fn weakening(i: usize, extra: &[Type]) -> Result<(), TestCaseError> {
    let js = judgments();
    let (ctx, t, ty) = &js[i % js.len()];
    let reg = &lib().registry;
    if let Err(e) = check(reg, ctx, t, Some(ty), &budget()) {
        return fail(format!("base judgment for {} fails: {e}", pretty(t)));
    }
    let mut wide = ctx.clone();
    for (k, x) in extra.iter().enumerate() {
        wide = wide.with_classical(format!("w{k}"), x.clone());
    }
    if let Err(e) = check(reg, &wide, t, Some(ty), &budget()) {
        return fail(format!("{} fails after weakening: {e}", pretty(t)));
    }
    Ok(())
}

pub fn env(pairs: &[(&str, Type)]) -> BTreeMap<String, Type> {
    pairs.iter().map(|(x, t)| (x.to_string(), t.clone())).collect()
}

pub fn registry() -> Registry {
    lib().registry.clone()
}
