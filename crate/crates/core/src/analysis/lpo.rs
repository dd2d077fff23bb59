//! Lexicographic path orders.
//!
//! Rules are read as first-order terms: an application with a variable head
//! becomes `@(x, args..)` and a superposition `+(t1, .., tn)` with the
//! amplitudes dropped. Constructors, `@` and `+` sit below every defined
//! symbol and are pairwise incomparable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::sttrs::{Rule, STerm, Sttrs};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Fo {
    Var(String),
    App(String, Vec<Fo>),
}

fn fo(t: &STerm) -> Fo {
    match t {
        STerm::Var(x) => Fo::Var(x.clone()),
        STerm::Fun(f) => Fo::App(f.clone(), vec![]),
        STerm::Con(c) => Fo::App(format!("'{c}"), vec![]),
        STerm::App(h, args) => {
            let args: Vec<Fo> = args.iter().map(fo).collect();
            match &**h {
                STerm::Fun(f) => Fo::App(f.clone(), args),
                STerm::Con(c) => Fo::App(format!("'{c}"), args),
                other => Fo::App("@".into(), std::iter::once(fo(other)).chain(args).collect()),
            }
        }
        STerm::Sum(items) => Fo::App("+".into(), items.iter().map(|(_, x)| fo(x)).collect()),
    }
}

fn occurs(x: &str, t: &Fo) -> bool {
    match t {
        Fo::Var(y) => x == y,
        Fo::App(_, args) => args.iter().any(|a| occurs(x, a)),
    }
}

/// A strict order on defined symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Precedence {
    /// `(f, g)` with `f > g`, transitively closed.
    pairs: BTreeSet<(String, String)>,
}

impl Precedence {
    /// The transitive closure of `pairs`; fails on a cycle.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Precedence, String> {
        let mut set: BTreeSet<(String, String)> = pairs.into_iter().collect();
        loop {
            let mut added = Vec::new();
            for (a, b) in &set {
                for (c, d) in &set {
                    if b == c && !set.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            set.extend(added);
        }
        if let Some((a, _)) = set.iter().find(|(a, b)| a == b) {
            return Err(format!("precedence is cyclic at `{a}`"));
        }
        Ok(Precedence { pairs: set })
    }

    /// Parses `f>g>h,k>g`.
    pub fn parse(text: &str) -> Result<Precedence, String> {
        let mut pairs = Vec::new();
        for chain in text.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let syms: Vec<&str> = chain.split('>').map(str::trim).collect();
            if syms.iter().any(|s| s.is_empty()) {
                return Err(format!("malformed precedence `{chain}`"));
            }
            for w in syms.windows(2) {
                pairs.push((w[0].to_string(), w[1].to_string()));
            }
        }
        Precedence::from_pairs(pairs)
    }

    /// `order[0] > order[1] > ..`.
    pub fn total(order: &[String]) -> Precedence {
        let mut pairs = BTreeSet::new();
        for (i, a) in order.iter().enumerate() {
            for b in &order[i + 1..] {
                pairs.insert((a.clone(), b.clone()));
            }
        }
        Precedence { pairs }
    }

    fn gt(&self, f: &str, g: &str, defined: &BTreeSet<String>) -> bool {
        if defined.contains(f) && !defined.contains(g) {
            return true;
        }
        self.pairs.contains(&(f.to_string(), g.to_string()))
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{a}>{b}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Why `s >lpo t` holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Why {
    /// `t` is a variable occurring in `s`.
    Var,
    /// Argument `index` of `s` is `t` or greater than it.
    Sub { index: usize, inner: Option<Box<Why>> },
    /// Head of `s` is above head of `t` and `s` dominates each argument.
    Prec { args: Vec<Why> },
    /// Same head; argument `index` decreases, earlier ones are equal and
    /// `s` dominates each argument of `t`.
    Lex { index: usize, decrease: Box<Why>, args: Vec<Why> },
}

struct Ctx<'a> {
    prec: &'a Precedence,
    defined: &'a BTreeSet<String>,
}

impl Ctx<'_> {
    fn gt(&self, s: &Fo, t: &Fo) -> Option<Why> {
        let Fo::App(f, ss) = s else { return None };
        if let Fo::Var(x) = t {
            return occurs(x, s).then_some(Why::Var);
        }
        for (i, si) in ss.iter().enumerate() {
            if si == t {
                return Some(Why::Sub { index: i, inner: None });
            }
            if let Some(w) = self.gt(si, t) {
                return Some(Why::Sub { index: i, inner: Some(Box::new(w)) });
            }
        }
        let Fo::App(g, ts) = t else { unreachable!() };
        let all = |this: &Self| ts.iter().map(|tj| this.gt(s, tj)).collect::<Option<Vec<_>>>();
        if f != g && self.prec.gt(f, g, self.defined) {
            return all(self).map(|args| Why::Prec { args });
        }
        if f == g && ss.len() == ts.len() {
            let i = ss.iter().zip(ts).position(|(a, b)| a != b)?;
            let decrease = self.gt(&ss[i], &ts[i])?;
            return all(self).map(|args| Why::Lex { index: i, decrease: Box::new(decrease), args });
        }
        None
    }

    /// Independent replay of a recorded derivation.
    fn check(&self, s: &Fo, t: &Fo, why: &Why) -> bool {
        let Fo::App(f, ss) = s else { return false };
        match why {
            Why::Var => matches!(t, Fo::Var(x) if occurs(x, s)),
            Why::Sub { index, inner } => match (ss.get(*index), inner) {
                (Some(si), None) => si == t,
                (Some(si), Some(w)) => self.check(si, t, w),
                _ => false,
            },
            Why::Prec { args } => match t {
                Fo::App(g, ts) => {
                    f != g
                        && self.prec.gt(f, g, self.defined)
                        && ts.len() == args.len()
                        && ts.iter().zip(args).all(|(tj, w)| self.check(s, tj, w))
                }
                _ => false,
            },
            Why::Lex { index, decrease, args } => match t {
                Fo::App(g, ts) => {
                    f == g
                        && ss.len() == ts.len()
                        && *index < ss.len()
                        && ss[..*index] == ts[..*index]
                        && self.check(&ss[*index], &ts[*index], decrease)
                        && ts.len() == args.len()
                        && ts.iter().zip(args).all(|(tj, w)| self.check(s, tj, w))
                }
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Oriented {
    pub rule: String,
    pub why: Why,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpoProof {
    pub precedence: Precedence,
    pub rules: Vec<Oriented>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpoFail {
    /// The first rule that could not be oriented.
    pub rule: String,
    pub reason: String,
}

/// How the precedence is obtained.
#[derive(Debug, Clone)]
pub enum PrecedenceMode {
    Given(Precedence),
    /// Try every total order of the defined symbols.
    Search,
}

/// Symbols in a precedence search beyond which the search is refused.
pub const MAX_SEARCH_SYMBOLS: usize = 8;

fn program(sys: &Sttrs) -> (Vec<&Rule>, BTreeSet<String>) {
    let rules: Vec<&Rule> = sys.program_rules().collect();
    let defined = sys.defined_symbols().into_iter().collect();
    (rules, defined)
}

fn orient(rules: &[&Rule], prec: &Precedence, defined: &BTreeSet<String>) -> Result<Vec<Oriented>, (usize, LpoFail)> {
    let cx = Ctx { prec, defined };
    let mut out = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        match cx.gt(&fo(&r.lhs), &fo(&r.rhs)) {
            Some(why) => out.push(Oriented { rule: r.to_string(), why }),
            None => {
                return Err((
                    i,
                    LpoFail { rule: r.to_string(), reason: format!("left-hand side is not above the right-hand side under `{prec}`") },
                ))
            }
        }
    }
    Ok(out)
}

/// Orients every program rule of `sys` by the LPO.
pub fn lpo_terminates(sys: &Sttrs, mode: &PrecedenceMode) -> Result<LpoProof, LpoFail> {
    let (rules, defined) = program(sys);
    match mode {
        PrecedenceMode::Given(prec) => {
            let rules = orient(&rules, prec, &defined).map_err(|(_, f)| f)?;
            Ok(LpoProof { precedence: prec.clone(), rules })
        }
        PrecedenceMode::Search => {
            let syms: Vec<String> = sys.defined_symbols();
            if syms.len() > MAX_SEARCH_SYMBOLS {
                return Err(LpoFail {
                    rule: String::new(),
                    reason: format!("{} symbols exceed the search limit of {MAX_SEARCH_SYMBOLS}", syms.len()),
                });
            }
            let mut best: Option<(usize, LpoFail)> = None;
            let mut order = syms.clone();
            let mut found = None;
            permutations(&mut order, 0, &mut |o| {
                let prec = Precedence::total(o);
                match orient(&rules, &prec, &defined) {
                    Ok(rs) => {
                        found = Some(LpoProof { precedence: prec, rules: rs });
                        true
                    }
                    Err((i, f)) => {
                        if best.as_ref().is_none_or(|(j, _)| i > *j) {
                            best = Some((i, f));
                        }
                        false
                    }
                }
            });
            match (found, best) {
                (Some(p), _) => Ok(p),
                (None, Some((_, f))) => Err(LpoFail { reason: "no precedence orients this rule together with the earlier ones".into(), ..f }),
                (None, None) => Ok(LpoProof { precedence: Precedence::default(), rules: vec![] }),
            }
        }
    }
}

/// Heap-free recursive enumeration; stops once `visit` returns true.
fn permutations(v: &mut Vec<String>, k: usize, visit: &mut dyn FnMut(&[String]) -> bool) -> bool {
    if k == v.len() {
        return visit(v);
    }
    for i in k..v.len() {
        v.swap(k, i);
        if permutations(v, k + 1, visit) {
            return true;
        }
        v.swap(k, i);
    }
    false
}

/// Re-checks a proof against `sys` without searching.
pub fn verify_proof(sys: &Sttrs, proof: &LpoProof) -> Result<(), String> {
    let (rules, defined) = program(sys);
    if rules.len() != proof.rules.len() {
        return Err(format!("proof covers {} rules, system has {}", proof.rules.len(), rules.len()));
    }
    let cx = Ctx { prec: &proof.precedence, defined: &defined };
    for (r, o) in rules.iter().zip(&proof.rules) {
        if r.to_string() != o.rule || !cx.check(&fo(&r.lhs), &fo(&r.rhs), &o.why) {
            return Err(format!("step for `{r}` does not replay"));
        }
    }
    Ok(())
}

/// Symbols mentioned by a precedence but absent from the system.
pub fn unknown_symbols(sys: &Sttrs, prec: &Precedence) -> Vec<String> {
    let known: BTreeMap<&str, ()> = sys.symbols.keys().map(|k| (k.as_str(), ())).collect();
    let mut out: Vec<String> = prec
        .pairs
        .iter()
        .flat_map(|(a, b)| [a, b])
        .filter(|s| !known.contains_key(s.as_str()))
        .cloned()
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sttrs::parse_trs;

    const ACK: &str = "sym ack : nat x nat -> nat;\n\
        ack(0, n) -> S(n);\n\
        ack(S(m), 0) -> ack(m, 1);\n\
        ack(S(m), S(n)) -> ack(m, ack(S(m), n));\n";

    #[test]
    fn ackermann_terminates() {
        let s = parse_trs(ACK).unwrap();
        let p = lpo_terminates(&s, &PrecedenceMode::Search).unwrap();
        verify_proof(&s, &p).unwrap();
        let p = lpo_terminates(&s, &PrecedenceMode::Given(Precedence::default())).unwrap();
        verify_proof(&s, &p).unwrap();
    }

    #[test]
    fn self_loop_fails() {
        let s = parse_trs("sym f : nat -> nat;\nf(x) -> f(x);\n").unwrap();
        let e = lpo_terminates(&s, &PrecedenceMode::Search).unwrap_err();
        assert_eq!(e.rule, "f(x) -> f(x)");
    }

    #[test]
    fn precedence_matters() {
        let s = parse_trs("sym f : nat -> nat;\nsym g : nat -> nat;\nf(S(x)) -> g(x);\ng(x) -> f(x);\n").unwrap();
        assert!(lpo_terminates(&s, &PrecedenceMode::Search).is_err());
        let s = parse_trs("sym f : nat -> nat;\nsym g : nat -> nat;\nf(S(x)) -> g(x);\ng(x) -> x;\n").unwrap();
        assert!(lpo_terminates(&s, &PrecedenceMode::Given(Precedence::parse("g>f").unwrap())).is_err());
        let p = lpo_terminates(&s, &PrecedenceMode::Given(Precedence::parse("f>g").unwrap())).unwrap();
        verify_proof(&s, &p).unwrap();
    }

    #[test]
    fn tampered_proof_is_rejected() {
        let s = parse_trs(ACK).unwrap();
        let mut p = lpo_terminates(&s, &PrecedenceMode::Search).unwrap();
        p.rules[1].why = Why::Var;
        assert!(verify_proof(&s, &p).is_err());
    }

    #[test]
    fn cyclic_precedence() {
        assert!(Precedence::parse("f>g>f").is_err());
    }
}
