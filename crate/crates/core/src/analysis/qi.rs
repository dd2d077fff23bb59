//! Quasi-interpretations.
//!
//! Each symbol is assigned a polynomial in its arguments. A rule `l -> r`
//! is accepted when `||l|| - ||r||` has no negative coefficient; otherwise
//! the inequality is only sampled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::sttrs::{Rule, STerm, Sttrs, SHAPE, UNIT};
use crate::BigRational;

/// Random points tried per rule.
pub const SAMPLES: usize = 10_000;

type Monomial = BTreeMap<String, u32>;

/// A polynomial over named size variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly(BTreeMap<Monomial, BigRational>);

impl Poly {
    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::default();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn var(x: &str) -> Poly {
        let mut p = Poly::default();
        p.add_term(Monomial::from([(x.to_string(), 1)]), BigRational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        let e = self.0.entry(m.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &o.0 {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &o.0 {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                let mut m = m1.clone();
                for (x, k) in m2 {
                    *m.entry(x.clone()).or_insert(0) += k;
                }
                p.add_term(m, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(BigRational::one()), |acc, _| acc.mul(self))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.values().all(|c| !c.is_negative())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.keys().flat_map(|m| m.keys().cloned()).collect()
    }

    pub fn eval(&self, point: &BTreeMap<String, BigInt>) -> BigRational {
        self.0
            .iter()
            .map(|(m, c)| {
                m.iter().fold(c.clone(), |acc, (x, k)| {
                    let v = point.get(x).cloned().unwrap_or_default();
                    acc * BigRational::from_integer(num_traits::pow(v, *k as usize))
                })
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> = m
                    .iter()
                    .map(|(x, k)| if *k == 1 { x.clone() } else { format!("{x}^{k}") })
                    .collect();
                match (mono.is_empty(), c.is_one()) {
                    (true, _) => c.to_string(),
                    (false, true) => mono.join("*"),
                    (false, false) => format!("{c}*{}", mono.join("*")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialSpec {
    pub coefficient: f64,
    /// Exponent of each argument, in order.
    pub powers: Vec<u32>,
}

/// The assignment of one symbol, as read from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Assignment {
    pub constant: f64,
    /// Linear coefficient of each argument.
    pub coefficients: Vec<f64>,
    pub monomials: Vec<MonomialSpec>,
}

fn rational(x: f64) -> Result<BigRational, String> {
    BigRational::from_float(x).ok_or_else(|| format!("`{x}` is not a finite number"))
}

impl Assignment {
    fn check(&self, sym: &str) -> Result<(), String> {
        let neg = self.constant < 0.0
            || self.coefficients.iter().any(|c| *c < 0.0)
            || self.monomials.iter().any(|m| m.coefficient < 0.0);
        if neg {
            return Err(format!("assignment of `{sym}` has a negative coefficient"));
        }
        Ok(())
    }

    fn is_additive(&self) -> bool {
        self.monomials.is_empty() && self.coefficients.iter().all(|c| *c == 1.0)
    }

    fn apply(&self, args: &[Poly]) -> Result<Poly, String> {
        let mut p = Poly::constant(rational(self.constant)?);
        for (c, a) in self.coefficients.iter().zip(args) {
            p = p.add(&Poly::constant(rational(*c)?).mul(a));
        }
        for m in &self.monomials {
            let mut q = Poly::constant(rational(m.coefficient)?);
            for (k, a) in m.powers.iter().zip(args) {
                q = q.mul(&a.pow(*k));
            }
            p = p.add(&q);
        }
        Ok(p)
    }

    fn width(&self) -> usize {
        self.coefficients
            .len()
            .max(self.monomials.iter().map(|m| m.powers.len()).max().unwrap_or(0))
    }
}

/// A quasi-interpretation; constructors not listed get `sum of args + 1`,
/// or `0` when nullary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuasiInterp(pub BTreeMap<String, Assignment>);

impl QuasiInterp {
    pub fn from_json(text: &str) -> Result<QuasiInterp, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn with(mut self, sym: &str, a: Assignment) -> QuasiInterp {
        self.0.insert(sym.to_string(), a);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum QiVerdict {
    Verified,
    /// These rules fail the coefficient test but no sample refutes them.
    NotRefuted { rules: Vec<String> },
    CounterRule { rule: String, witness: BTreeMap<String, String>, lhs: String, rhs: String },
    IllFormed { reason: String },
}

impl fmt::Display for QiVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QiVerdict::Verified => f.write_str("Verified"),
            QiVerdict::NotRefuted { rules } => write!(f, "not refuted (no coefficient proof for: {})", rules.join("; ")),
            QiVerdict::CounterRule { rule, witness, lhs, rhs } => {
                let w: Vec<String> = witness.iter().map(|(x, v)| format!("{x}={v}")).collect();
                let at = if w.is_empty() { "every argument".to_string() } else { w.join(", ") };
                write!(f, "CounterRule `{rule}` at {at}: {lhs} < {rhs}")
            }
            QiVerdict::IllFormed { reason } => write!(f, "ill-formed: {reason}"),
        }
    }
}

struct Interp<'a> {
    q: &'a QuasiInterp,
    sys: &'a Sttrs,
}

impl Interp<'_> {
    fn norm(&self, t: &STerm) -> Result<Poly, String> {
        match t {
            STerm::Var(x) => Ok(Poly::var(x)),
            STerm::Sum(items) => items.iter().try_fold(Poly::default(), |p, (_, x)| Ok(p.add(&self.norm(x)?))),
            STerm::App(h, args) => {
                let args: Vec<Poly> = args.iter().map(|a| self.norm(a)).collect::<Result<_, String>>()?;
                match &**h {
                    STerm::Fun(f) => self.symbol(f, &args, true),
                    STerm::Con(c) => self.symbol(c, &args, false),
                    other => Ok(args.iter().fold(self.norm(other)?, |p, a| p.add(a))),
                }
            }
            STerm::Fun(f) => self.symbol(f, &[], true),
            STerm::Con(c) => self.symbol(c, &[], false),
        }
    }

    fn symbol(&self, f: &str, args: &[Poly], is_fun: bool) -> Result<Poly, String> {
        let sum = |xs: &[Poly]| xs.iter().fold(Poly::default(), |p, a| p.add(a));
        if !is_fun {
            return match self.q.0.get(f) {
                Some(a) if a.coefficients.len() != args.len() || !a.monomials.is_empty() => {
                    Err(format!("constructor `{f}` needs one coefficient per argument"))
                }
                Some(a) => a.apply(args),
                None if args.is_empty() => Ok(Poly::default()),
                None => Ok(sum(args).add(&Poly::constant(BigRational::one()))),
            };
        }
        let arity = match f {
            UNIT => 2,
            SHAPE => 1,
            _ => self.sys.arity(f).unwrap_or(args.len()),
        };
        let (own, extra) = args.split_at(arity.min(args.len()));
        let mut full = own.to_vec();
        full.resize(arity, Poly::default());
        let base = match (self.q.0.get(f), f) {
            (Some(a), _) => {
                if a.width() > arity {
                    return Err(format!("assignment of `{f}` mentions {} arguments, arity is {arity}", a.width()));
                }
                a.apply(&full)?
            }
            (None, UNIT) | (None, SHAPE) => sum(&full),
            (None, _) => return Err(format!("no assignment for `{f}`")),
        };
        Ok(base.add(&sum(extra)))
    }
}

/// Checks `||l|| >= ||r||` for every program rule of `sys`.
pub fn qi_verify(sys: &Sttrs, q: &QuasiInterp) -> QiVerdict {
    qi_verify_seeded(sys, q, 0x5eed)
}

pub fn qi_verify_seeded(sys: &Sttrs, q: &QuasiInterp, seed: u64) -> QiVerdict {
    for (sym, a) in &q.0 {
        if let Err(reason) = a.check(sym) {
            return QiVerdict::IllFormed { reason };
        }
        if sys.is_constructor(sym) && !a.is_additive() {
            return QiVerdict::IllFormed { reason: format!("constructor `{sym}` must be additive") };
        }
    }
    let cx = Interp { q, sys };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut unproved = Vec::new();
    for r in sys.program_rules() {
        let (l, rhs) = match (cx.norm(&r.lhs), cx.norm(&r.rhs)) {
            (Ok(l), Ok(rhs)) => (l, rhs),
            (Err(reason), _) | (_, Err(reason)) => return QiVerdict::IllFormed { reason },
        };
        let diff = l.sub(&rhs);
        if let Some(w) = refute(&diff, &mut rng) {
            return counter(r, w, &l, &rhs);
        }
        if !diff.is_nonnegative() {
            unproved.push(r.to_string());
        }
    }
    if unproved.is_empty() {
        QiVerdict::Verified
    } else {
        QiVerdict::NotRefuted { rules: unproved }
    }
}

fn counter(r: &Rule, w: BTreeMap<String, BigInt>, l: &Poly, rhs: &Poly) -> QiVerdict {
    QiVerdict::CounterRule {
        rule: r.to_string(),
        lhs: l.eval(&w).to_string(),
        rhs: rhs.eval(&w).to_string(),
        witness: w.into_iter().map(|(x, v)| (x, v.to_string())).collect(),
    }
}

/// A point of ℕ^vars where `diff` is negative, if sampling finds one.
fn refute(diff: &Poly, rng: &mut StdRng) -> Option<BTreeMap<String, BigInt>> {
    let vars = diff.vars();
    for i in 0..SAMPLES {
        let bound: u64 = match i % 4 {
            0 => 2,
            1 => 10,
            2 => 100,
            _ => 100_000,
        };
        let point: BTreeMap<String, BigInt> = vars.iter().map(|x| (x.clone(), BigInt::from(rng.gen_range(0..=bound)))).collect();
        if diff.eval(&point).is_negative() {
            return Some(point);
        }
    }
    None
}

/// The interpretation of a rule's two sides.
pub fn rule_norms(sys: &Sttrs, q: &QuasiInterp, r: &Rule) -> Result<(Poly, Poly), String> {
    let cx = Interp { q, sys };
    Ok((cx.norm(&r.lhs)?, cx.norm(&r.rhs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sttrs::parse_trs;

    const LEN: &str = "sym len : [bit] -> nat;\nlen([]) -> 0;\nlen(h :: t) -> S(len(t));\n";

    fn linear(c: f64, cs: &[f64]) -> Assignment {
        Assignment { constant: c, coefficients: cs.to_vec(), monomials: vec![] }
    }

    fn len_interp() -> QuasiInterp {
        QuasiInterp::default()
            .with("0", linear(0.0, &[]))
            .with("S", linear(1.0, &[1.0]))
            .with("[]", linear(0.0, &[]))
            .with("::", linear(1.0, &[1.0, 1.0]))
            .with("len", linear(0.0, &[1.0]))
    }

    #[test]
    fn len_is_verified() {
        let s = parse_trs(LEN).unwrap();
        assert_eq!(qi_verify(&s, &len_interp()), QiVerdict::Verified);
    }

    #[test]
    fn negative_constant_is_rejected() {
        let s = parse_trs(LEN).unwrap();
        let q = len_interp().with("len", linear(-1.0, &[1.0]));
        assert!(matches!(qi_verify(&s, &q), QiVerdict::IllFormed { .. }));
    }

    #[test]
    fn too_small_is_refuted() {
        let s = parse_trs(LEN).unwrap();
        let q = len_interp().with("len", linear(2.0, &[0.0]));
        match qi_verify(&s, &q) {
            QiVerdict::CounterRule { rule, .. } => assert_eq!(rule, "len(h :: t) -> S(len(t))"),
            v => panic!("{v}"),
        }
    }

    #[test]
    fn map_is_verified() {
        let s = parse_trs("sym map : (nat -> nat) x [nat] -> [nat];\nmap(phi, []) -> [];\nmap(phi, h :: t) -> phi(h) :: map(phi, t);\n").unwrap();
        let map = Assignment {
            constant: 0.0,
            coefficients: vec![0.0, 1.0],
            monomials: vec![MonomialSpec { coefficient: 1.0, powers: vec![1, 1] }],
        };
        assert_eq!(qi_verify(&s, &QuasiInterp::default().with("map", map)), QiVerdict::Verified);
    }

    #[test]
    fn nonlinear_dominance_is_only_not_refuted() {
        let s = parse_trs("sym f : nat -> nat;\nsym g : nat -> nat;\nf(x) -> g(x);\n").unwrap();
        let q = QuasiInterp::default()
            .with("f", Assignment { monomials: vec![MonomialSpec { coefficient: 1.0, powers: vec![2] }], ..Default::default() })
            .with("g", linear(0.0, &[1.0]));
        assert!(matches!(qi_verify(&s, &q), QiVerdict::NotRefuted { .. }));
    }

    #[test]
    fn missing_symbol() {
        let s = parse_trs(LEN).unwrap();
        assert!(matches!(qi_verify(&s, &QuasiInterp::default()), QiVerdict::IllFormed { .. }));
    }

    #[test]
    fn json_schema() {
        let q = QuasiInterp::from_json(
            r#"{"len": {"constant": 0, "coefficients": [1]},
                "map": {"coefficients": [0, 1], "monomials": [{"coefficient": 1, "powers": [1, 1]}]}}"#,
        )
        .unwrap();
        assert_eq!(q.0["len"].coefficients, vec![1.0]);
        assert_eq!(q.0["map"].monomials[0].powers, vec![1, 1]);
    }

    #[test]
    fn poly_arithmetic() {
        let x = Poly::var("x");
        let y = Poly::var("y");
        let p = x.add(&y).pow(2).sub(&x.mul(&x)).sub(&y.mul(&y));
        let two = BigRational::from_integer(2.into());
        assert_eq!(p, Poly::constant(two).mul(&x).mul(&y));
    }
}
