//! Decision procedures for orthogonality and unitarity.
//!
//! Both predicates quantify over all closed values of the free variables.
//! They are decided by enumeration when every variable has a finite basic
//! type, and answer [`Verdict::Unknown`] otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::ast::{Name, Registry, Term, Type};
use crate::canonical::pure_key;
use crate::eval::{inner_product_of, run, value_components, InnerProductError, Status};
use crate::parser::pretty;
use crate::Amplitude;

/// Limits for one predicate query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckBudget {
    /// Evaluation fuel for each closed term the query evaluates.
    pub fuel: usize,
    /// Largest number of substitutions a query may enumerate.
    pub max_substitutions: usize,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            fuel: 1000,
            max_substitutions: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Unknown {
    InfiniteType { var: String, ty: String },
    FunctionType { var: String, ty: String },
    FuelExhausted { term: String, fuel: usize },
    TooManySubstitutions { limit: usize },
    Stuck { term: String },
}

impl Unknown {
    /// Whether a larger budget could settle the query.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Unknown::FuelExhausted { .. } | Unknown::TooManySubstitutions { .. }
        )
    }
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unknown::InfiniteType { var, ty } => {
                write!(f, "`{var}` ranges over the infinite type `{ty}`")
            }
            Unknown::FunctionType { var, ty } => {
                write!(f, "`{var}` has the function type `{ty}`")
            }
            Unknown::FuelExhausted { term, fuel } => {
                write!(f, "`{term}` did not reach a value within {fuel} steps")
            }
            Unknown::TooManySubstitutions { limit } => {
                write!(f, "more than {limit} substitutions to enumerate")
            }
            Unknown::Stuck { term } => write!(f, "evaluation got stuck on `{term}`"),
        }
    }
}

/// A closing substitution on which a predicate fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub substitution: Vec<(String, String)>,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.substitution.is_empty() {
            return f.write_str(&self.detail);
        }
        let s: Vec<_> = self
            .substitution
            .iter()
            .map(|(x, v)| format!("{x} := {v}"))
            .collect();
        write!(f, "{} under [{}]", self.detail, s.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No(Witness),
    Unknown(Unknown),
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }
}

fn display_var(x: &str) -> String {
    pretty(&Term::var(x))
}

/// Every closing substitution for `vars`, or the reason they cannot be listed.
fn substitutions(
    reg: &Registry,
    vars: &[(Name, Type)],
    budget: &CheckBudget,
) -> Result<Vec<BTreeMap<Name, Term>>, Unknown> {
    let mut out = vec![BTreeMap::new()];
    for (x, ty) in vars {
        if matches!(ty, Type::Arrow(..)) {
            return Err(Unknown::FunctionType {
                var: display_var(x),
                ty: ty.to_string(),
            });
        }
        if reg.depth(ty).is_none() {
            return Err(Unknown::InfiniteType {
                var: display_var(x),
                ty: ty.to_string(),
            });
        }
        let vals = reg.basis(ty, budget.max_substitutions).map_err(|_| {
            Unknown::TooManySubstitutions {
                limit: budget.max_substitutions,
            }
        })?;
        if out.len().saturating_mul(vals.len()) > budget.max_substitutions {
            return Err(Unknown::TooManySubstitutions {
                limit: budget.max_substitutions,
            });
        }
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for sigma in &out {
            for v in &vals {
                let mut s = sigma.clone();
                s.insert(x.clone(), v.clone());
                next.push(s);
            }
        }
        out = next;
    }
    Ok(out)
}

fn free_typed(
    terms: &[&Term],
    env: &BTreeMap<Name, Type>,
) -> Result<Vec<(Name, Type)>, Unknown> {
    let mut vars = std::collections::BTreeSet::new();
    for t in terms {
        vars.extend(t.free_vars());
    }
    vars.into_iter()
        .map(|x| match env.get(&x) {
            Some(ty) => Ok((x, ty.clone())),
            None => Err(Unknown::Stuck {
                term: format!("unbound variable {}", display_var(&x)),
            }),
        })
        .collect()
}

fn witness(sigma: &BTreeMap<Name, Term>, detail: String) -> Witness {
    Witness {
        substitution: sigma
            .iter()
            .map(|(x, v)| (display_var(x), pretty(v)))
            .collect(),
        detail,
    }
}

fn components(t: &Term, fuel: usize) -> Result<Vec<(Amplitude, Term)>, Unknown> {
    value_components(t, fuel).map_err(|e| match e {
        InnerProductError::NotTerminated(f) => Unknown::FuelExhausted {
            term: pretty(t),
            fuel: f,
        },
        InnerProductError::Stuck(s) => Unknown::Stuck { term: s },
    })
}

fn shape_key(t: &Term, fuel: usize) -> Result<Term, Unknown> {
    let (trace, v) = run(&Term::shape(t.clone()), fuel);
    match trace.status {
        Status::Value => Ok(pure_key(&v)),
        Status::FuelExhausted => Err(Unknown::FuelExhausted {
            term: pretty(t),
            fuel,
        }),
        Status::Stuck => Err(Unknown::Stuck { term: pretty(&v) }),
    }
}

/// `s ⊥ t`: for every closing substitution σ of their free variables,
/// `σ(s)` and `σ(t)` have equal shapes and inner product zero.
pub fn orthogonal(
    reg: &Registry,
    s: &Term,
    t: &Term,
    env: &BTreeMap<Name, Type>,
    budget: &CheckBudget,
) -> Verdict {
    let vars = match free_typed(&[s, t], env) {
        Ok(v) => v,
        Err(u) => return Verdict::Unknown(u),
    };
    let subs = match substitutions(reg, &vars, budget) {
        Ok(s) => s,
        Err(u) => return Verdict::Unknown(u),
    };
    for sigma in subs {
        let (ss, ts) = (s.substitute(&sigma), t.substitute(&sigma));
        let result = (|| {
            if shape_key(&ss, budget.fuel)? != shape_key(&ts, budget.fuel)? {
                return Ok(Some("the shapes differ".to_string()));
            }
            let a = components(&ss, budget.fuel)?;
            let b = components(&ts, budget.fuel)?;
            let ip = inner_product_of(&a, &b);
            Ok(if ip.is_zero() {
                None
            } else {
                Some(format!("the inner product is {ip}"))
            })
        })();
        match result {
            Ok(None) => {}
            Ok(Some(detail)) => return Verdict::No(witness(&sigma, detail)),
            Err(u) => return Verdict::Unknown(u),
        }
    }
    Verdict::Yes
}

/// A closed sum whose components share one shape and whose value has norm 1.
pub fn unit_closed(items: &[&Term], sum: &Term, budget: &CheckBudget) -> Verdict {
    let result = (|| {
        let mut keys = Vec::new();
        for s in items {
            let k = shape_key(s, budget.fuel)?;
            if keys.first().is_some_and(|f| *f != k) {
                return Ok(Some("the shapes differ".to_string()));
            }
            keys.push(k);
        }
        let c = components(sum, budget.fuel)?;
        let n = inner_product_of(&c, &c);
        Ok(if n.is_one() { None } else { Some(format!("the squared norm is {n}")) })
    })();
    match result {
        Ok(None) => Verdict::Yes,
        Ok(Some(detail)) => Verdict::No(witness(&BTreeMap::new(), detail)),
        Err(u) => Verdict::Unknown(u),
    }
}

/// Whether the closed-in-Δ function `t : dom ⊸ cod` denotes a unitary map
/// on the basis of `dom`, for every closing substitution of its free
/// classical variables.
pub fn unitary(
    reg: &Registry,
    t: &Term,
    dom: &Type,
    cod: &Type,
    env: &BTreeMap<Name, Type>,
    budget: &CheckBudget,
) -> Verdict {
    let vars = match free_typed(&[t], env) {
        Ok(v) => v,
        Err(u) => return Verdict::Unknown(u),
    };
    let subs = match substitutions(reg, &vars, budget) {
        Ok(s) => s,
        Err(u) => return Verdict::Unknown(u),
    };
    let inputs = match basis_or_unknown(reg, dom, budget) {
        Ok(b) => b,
        Err(u) => return Verdict::Unknown(u),
    };
    let outputs = match basis_or_unknown(reg, cod, budget) {
        Ok(b) => b,
        Err(u) => return Verdict::Unknown(u),
    };
    if inputs.len() != outputs.len() {
        return Verdict::No(witness(
            &BTreeMap::new(),
            format!(
                "`{dom}` has {} basis values but `{cod}` has {}",
                inputs.len(),
                outputs.len()
            ),
        ));
    }
    let index: BTreeMap<Term, usize> = outputs
        .iter()
        .enumerate()
        .map(|(i, v)| (pure_key(v), i))
        .collect();
    let n = inputs.len();
    for sigma in subs {
        let f = t.substitute(&sigma);
        let mut m = vec![vec![Amplitude::zero(); n]; n];
        for (col, v) in inputs.iter().enumerate() {
            let out = match components(&Term::app(f.clone(), v.clone()), budget.fuel) {
                Ok(o) => o,
                Err(u) => return Verdict::Unknown(u),
            };
            for (a, w) in out {
                match index.get(&pure_key(&w)) {
                    Some(&row) => m[row][col] += a,
                    None => {
                        return Verdict::No(witness(
                            &sigma,
                            format!("the image of {} is not in `{cod}`", pretty(v)),
                        ))
                    }
                }
            }
        }
        if let Some(detail) = unitarity_defect(&m, &inputs) {
            return Verdict::No(witness(&sigma, detail));
        }
    }
    Verdict::Yes
}

fn basis_or_unknown(reg: &Registry, ty: &Type, budget: &CheckBudget) -> Result<Vec<Term>, Unknown> {
    if reg.depth(ty).is_none() {
        return Err(Unknown::InfiniteType {
            var: "_".into(),
            ty: ty.to_string(),
        });
    }
    reg.basis(ty, budget.max_substitutions)
        .map_err(|_| Unknown::TooManySubstitutions {
            limit: budget.max_substitutions,
        })
}

/// Checks `M†M = I` and `MM† = I`.
fn unitarity_defect(m: &[Vec<Amplitude>], inputs: &[Term]) -> Option<String> {
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { Amplitude::one() } else { Amplitude::zero() };
            let cols: Amplitude = (0..n).map(|k| m[k][i].conj() * m[k][j].clone()).sum();
            if cols != want {
                return Some(format!(
                    "the images of {} and {} have inner product {cols}",
                    pretty(&inputs[j]),
                    pretty(&inputs[i])
                ));
            }
            let rows: Amplitude = (0..n).map(|k| m[i][k].clone() * m[j][k].conj()).sum();
            if rows != want {
                return Some(format!("the matrix is not unitary (row {i}, row {j})"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn reg() -> Registry {
        Registry::new()
    }

    #[test]
    fn plus_minus() {
        let v = orthogonal(&reg(), &Term::plus(), &Term::minus(), &BTreeMap::new(), &CheckBudget::default());
        assert!(v.is_yes());
        let v = orthogonal(&reg(), &Term::plus(), &Term::plus(), &BTreeMap::new(), &CheckBudget::default());
        assert!(v.is_no());
    }

    #[test]
    fn open_qubit_terms() {
        let r = reg();
        let s = parse_term("(|0>, x)", &r).unwrap();
        let t = parse_term("(|1>, x)", &r).unwrap();
        let env = BTreeMap::from([("x".to_string(), Type::Qbit)]);
        assert!(orthogonal(&r, &s, &t, &env, &CheckBudget::default()).is_yes());
        let u = parse_term("(|0>, |0>)", &r).unwrap();
        let v = orthogonal(&r, &s, &u, &env, &CheckBudget::default());
        let Verdict::No(w) = v else { panic!() };
        assert_eq!(w.substitution, vec![("x".to_string(), "|0>".to_string())]);
    }

    #[test]
    fn infinite_context_is_unknown() {
        let r = reg();
        let s = parse_term("(|0>, n)", &r).unwrap();
        let t = parse_term("(|1>, n)", &r).unwrap();
        let env = BTreeMap::from([("n".to_string(), Type::nat())]);
        assert!(orthogonal(&r, &s, &t, &env, &CheckBudget::default()).is_unknown());
    }

    #[test]
    fn hadamard_is_unitary() {
        let r = reg();
        let had = parse_term(
            "\\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> }",
            &r,
        )
        .unwrap();
        let v = unitary(&r, &had, &Type::Qbit, &Type::Qbit, &BTreeMap::new(), &CheckBudget::default());
        assert!(v.is_yes());
        let bad = parse_term("\\x. qcase x { 0 -> |0>, 1 -> |0> }", &r).unwrap();
        let v = unitary(&r, &bad, &Type::Qbit, &Type::Qbit, &BTreeMap::new(), &CheckBudget::default());
        assert!(v.is_no());
    }
}
