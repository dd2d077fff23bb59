//! Types, constructor signatures and the constructor registry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{cons, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrowKind {
    /// `⊸`
    Linear,
    /// `⇒`
    Classical,
    /// `↔`
    Unitary,
}

impl ArrowKind {
    pub fn symbol(self) -> &'static str {
        match self {
            ArrowKind::Linear => "-o",
            ArrowKind::Classical => "=>",
            ArrowKind::Unitary => "<->",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Qbit,
    /// The unit type `()`.
    Unit,
    /// A declared constructor type such as `nat`, `bit` or a shadow `nat~`.
    Named(String),
    List(Box<Type>),
    Tensor(Box<Type>, Box<Type>),
    Arrow(ArrowKind, Box<Type>, Box<Type>),
}

impl Type {
    pub fn nat() -> Type {
        Type::Named("nat".into())
    }

    pub fn bit() -> Type {
        Type::Named("bit".into())
    }

    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }

    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    pub fn arrow(k: ArrowKind, a: Type, b: Type) -> Type {
        Type::Arrow(k, Box::new(a), Box::new(b))
    }

    pub fn lin(a: Type, b: Type) -> Type {
        Type::arrow(ArrowKind::Linear, a, b)
    }

    pub fn cls(a: Type, b: Type) -> Type {
        Type::arrow(ArrowKind::Classical, a, b)
    }

    pub fn uni(a: Type, b: Type) -> Type {
        Type::arrow(ArrowKind::Unitary, a, b)
    }

    pub fn is_basic(&self) -> bool {
        !matches!(self, Type::Arrow(..))
    }

    /// Splits `T1 ⇢ … ⇢ Tn ⇢ T` into its first `n` domains and the rest.
    pub fn uncurry(&self, n: usize) -> Option<(Vec<Type>, Type)> {
        let mut doms = Vec::new();
        let mut cur = self;
        while doms.len() < n {
            match cur {
                Type::Arrow(_, a, b) => {
                    doms.push((**a).clone());
                    cur = b;
                }
                _ => return None,
            }
        }
        Some((doms, cur.clone()))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Qbit => write!(f, "Qbit"),
            Type::Unit => write!(f, "()"),
            Type::Named(n) => write!(f, "{n}"),
            Type::List(t) => write!(f, "[{t}]"),
            Type::Tensor(a, b) => write!(f, "({a}, {b})"),
            Type::Arrow(k, a, b) => {
                if matches!(**a, Type::Arrow(..)) {
                    write!(f, "({a}) {} {b}", k.symbol())
                } else {
                    write!(f, "{a} {} {b}", k.symbol())
                }
            }
        }
    }
}

/// The type family a constructor belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Unit,
    List,
    Tensor,
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsInfo {
    pub name: String,
    pub family: Family,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub constructors: Vec<(String, Vec<Type>)>,
    /// `Some(B)` when this is the generated shape type of `B`.
    pub shadow_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("type `{0}` is already declared")]
    DuplicateType(String),
    #[error("constructor `{0}` is already declared")]
    DuplicateConstructor(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("constructor `{cons}`: classical arguments must precede quantum ones")]
    QuantumBeforeClassical { cons: String },
    #[error("constructor `{cons}`: argument type `{ty}` is not a basic type")]
    NonBasicArgument { cons: String, ty: String },
}

/// Why a type's closed values cannot be listed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("type `{0}` has infinitely many closed values")]
    Infinite(String),
    #[error("type `{ty}` has more than {cap} basis values")]
    TooMany { ty: String, cap: usize },
    #[error("type `{0}` is not a basic type")]
    NotBasic(String),
}

#[derive(Debug, Clone)]
pub struct Registry {
    types: BTreeMap<String, TypeDecl>,
    constructors: BTreeMap<String, ConsInfo>,
    quantum: BTreeSet<String>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

const STRUCTURAL: [&str; 4] = [cons::UNIT, cons::NIL, cons::CONS, cons::PAIR];

impl Registry {
    /// A registry holding unit, lists, tensors, `nat`, `bit` and the
    /// shape types of `nat` and `bit`.
    pub fn new() -> Self {
        let mut r = Registry {
            types: BTreeMap::new(),
            constructors: BTreeMap::new(),
            quantum: BTreeSet::new(),
        };
        for (c, fam, arity) in [
            (cons::UNIT, Family::Unit, 0),
            (cons::NIL, Family::List, 0),
            (cons::CONS, Family::List, 2),
            (cons::PAIR, Family::Tensor, 2),
        ] {
            r.constructors.insert(
                c.to_string(),
                ConsInfo {
                    name: c.to_string(),
                    family: fam,
                    arity,
                },
            );
        }
        r.declare(
            "nat",
            vec![
                (cons::ZERO.into(), vec![]),
                (cons::SUCC.into(), vec![Type::nat()]),
            ],
        )
        .expect("builtin nat");
        r.declare(
            "bit",
            vec![(cons::BIT0.into(), vec![]), (cons::BIT1.into(), vec![])],
        )
        .expect("builtin bit");
        r
    }

    /// Declares a constructor type and its shape type.
    pub fn declare(
        &mut self,
        name: &str,
        constructors: Vec<(String, Vec<Type>)>,
    ) -> Result<(), RegistryError> {
        if self.types.contains_key(name) || name.ends_with('~') {
            return Err(RegistryError::DuplicateType(name.into()));
        }
        let mut seen = BTreeSet::new();
        for (c, args) in &constructors {
            if self.constructors.contains_key(c) || !seen.insert(c.clone()) {
                return Err(RegistryError::DuplicateConstructor(c.clone()));
            }
            for a in args {
                if !a.is_basic() {
                    return Err(RegistryError::NonBasicArgument {
                        cons: c.clone(),
                        ty: a.to_string(),
                    });
                }
                self.check_known(a, name)?;
            }
        }
        let decl = TypeDecl {
            name: name.into(),
            constructors: constructors.clone(),
            shadow_of: None,
        };
        self.insert_decl(decl);
        // ordering is checked once the type itself is classified
        for (c, args) in &constructors {
            let mut seen_quantum = false;
            for a in args {
                let q = self.is_quantum(a);
                if !q && seen_quantum {
                    self.remove_decl(name);
                    return Err(RegistryError::QuantumBeforeClassical { cons: c.clone() });
                }
                seen_quantum |= q;
            }
        }
        let shadow = TypeDecl {
            name: format!("{name}~"),
            constructors: constructors
                .iter()
                .map(|(c, args)| {
                    (
                        format!("{c}~"),
                        args.iter()
                            .map(|a| self.shape_type(a).expect("basic argument"))
                            .collect(),
                    )
                })
                .collect(),
            shadow_of: Some(name.into()),
        };
        self.insert_decl(shadow);
        Ok(())
    }

    fn check_known(&self, t: &Type, declaring: &str) -> Result<(), RegistryError> {
        match t {
            Type::Named(n) if n != declaring && !self.types.contains_key(n) => {
                Err(RegistryError::UnknownType(n.clone()))
            }
            Type::List(a) => self.check_known(a, declaring),
            Type::Tensor(a, b) => {
                self.check_known(a, declaring)?;
                self.check_known(b, declaring)
            }
            _ => Ok(()),
        }
    }

    fn insert_decl(&mut self, decl: TypeDecl) {
        for (c, args) in &decl.constructors {
            self.constructors.insert(
                c.clone(),
                ConsInfo {
                    name: c.clone(),
                    family: Family::Named(decl.name.clone()),
                    arity: args.len(),
                },
            );
        }
        self.types.insert(decl.name.clone(), decl);
        self.recompute_quantum();
    }

    fn remove_decl(&mut self, name: &str) {
        if let Some(decl) = self.types.remove(name) {
            for (c, _) in decl.constructors {
                self.constructors.remove(&c);
            }
        }
        self.recompute_quantum();
    }

    fn recompute_quantum(&mut self) {
        let mut q = BTreeSet::new();
        loop {
            let before = q.len();
            for d in self.types.values() {
                let is_q = d
                    .constructors
                    .iter()
                    .any(|(_, args)| args.iter().any(|a| quantum_with(a, &q)));
                if is_q {
                    q.insert(d.name.clone());
                }
            }
            if q.len() == before {
                break;
            }
        }
        self.quantum = q;
    }

    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.get(name)
    }

    pub fn type_decls(&self) -> impl Iterator<Item = &TypeDecl> {
        self.types.values()
    }

    /// Declarations introduced by source files, in name order.
    pub fn user_decls(&self) -> impl Iterator<Item = &TypeDecl> {
        self.types
            .values()
            .filter(|d| d.shadow_of.is_none() && d.name != "nat" && d.name != "bit")
    }

    pub fn constructor(&self, c: &str) -> Option<&ConsInfo> {
        self.constructors.get(c)
    }

    pub fn constructors(&self) -> impl Iterator<Item = &ConsInfo> {
        self.constructors.values()
    }

    pub fn is_constructor(&self, c: &str) -> bool {
        self.constructors.contains_key(c)
    }

    pub fn arity(&self, c: &str) -> Option<usize> {
        self.constructors.get(c).map(|i| i.arity)
    }

    /// Membership in the quantum types: `Qbit` and every constructor type
    /// that (transitively) stores one.
    pub fn is_quantum(&self, t: &Type) -> bool {
        quantum_with(t, &self.quantum)
    }

    pub fn is_classical(&self, t: &Type) -> bool {
        !self.is_quantum(t)
    }

    /// Constructor names of a basic type, in declaration order.
    pub fn constructors_of(&self, t: &Type) -> Vec<String> {
        match t {
            Type::Unit => vec![cons::UNIT.into()],
            Type::List(_) => vec![cons::NIL.into(), cons::CONS.into()],
            Type::Tensor(..) => vec![cons::PAIR.into()],
            Type::Named(n) => self
                .types
                .get(n)
                .map(|d| d.constructors.iter().map(|(c, _)| c.clone()).collect())
                .unwrap_or_default(),
            Type::Qbit | Type::Arrow(..) => vec![],
        }
    }

    /// Argument types of constructor `c` when building a value of type `t`.
    pub fn cons_args(&self, c: &str, t: &Type) -> Option<Vec<Type>> {
        match (c, t) {
            (cons::UNIT, Type::Unit) => Some(vec![]),
            (cons::NIL, Type::List(_)) => Some(vec![]),
            (cons::CONS, Type::List(a)) => Some(vec![(**a).clone(), t.clone()]),
            (cons::PAIR, Type::Tensor(a, b)) => Some(vec![(**a).clone(), (**b).clone()]),
            (_, Type::Named(n)) => self
                .types
                .get(n)?
                .constructors
                .iter()
                .find(|(k, _)| k == c)
                .map(|(_, args)| args.clone()),
            _ => None,
        }
    }

    /// `d(κ)`; `None` stands for an infinite depth.
    pub fn depth(&self, t: &Type) -> Option<u64> {
        self.depth_inner(t, &mut Vec::new())
    }

    fn depth_inner(&self, t: &Type, visiting: &mut Vec<String>) -> Option<u64> {
        match t {
            Type::Qbit | Type::Unit => Some(1),
            Type::List(_) => None,
            Type::Tensor(a, b) => {
                Some(self.depth_inner(a, visiting)? + self.depth_inner(b, visiting)? + 1)
            }
            Type::Named(n) => {
                if visiting.contains(n) {
                    return None;
                }
                let decl = self.types.get(n)?;
                visiting.push(n.clone());
                let mut best = 0;
                for (_, args) in &decl.constructors {
                    let mut s = 0;
                    for a in args {
                        match self.depth_inner(a, visiting) {
                            Some(d) => s += d,
                            None => {
                                visiting.pop();
                                return None;
                            }
                        }
                    }
                    best = best.max(s);
                }
                visiting.pop();
                Some(best + 1)
            }
            Type::Arrow(..) => None,
        }
    }

    /// `⊳κ`: the classical skeleton of a basic type.
    pub fn shape_type(&self, t: &Type) -> Option<Type> {
        match t {
            Type::Qbit | Type::Unit => Some(Type::Unit),
            Type::List(a) => Some(Type::list(self.shape_type(a)?)),
            Type::Tensor(a, b) => Some(Type::tensor(self.shape_type(a)?, self.shape_type(b)?)),
            Type::Named(n) if n.ends_with('~') => Some(t.clone()),
            Type::Named(n) => Some(Type::Named(format!("{n}~"))),
            Type::Arrow(..) => None,
        }
    }

    /// Closed pure values of a finite basic type, in a fixed order.
    pub fn basis(&self, t: &Type, cap: usize) -> Result<Vec<Term>, EnumerationError> {
        if !t.is_basic() {
            return Err(EnumerationError::NotBasic(t.to_string()));
        }
        if self.depth(t).is_none() {
            return Err(EnumerationError::Infinite(t.to_string()));
        }
        self.basis_inner(t, cap)
    }

    fn basis_inner(&self, t: &Type, cap: usize) -> Result<Vec<Term>, EnumerationError> {
        if let Type::Qbit = t {
            return Ok(vec![Term::Ket0, Term::Ket1]);
        }
        let mut out = Vec::new();
        for c in self.constructors_of(t) {
            let args = self.cons_args(&c, t).unwrap_or_default();
            let mut combos: Vec<Vec<Term>> = vec![vec![]];
            for a in &args {
                let vals = self.basis_inner(a, cap)?;
                let mut next = Vec::new();
                for prefix in &combos {
                    for v in &vals {
                        let mut p = prefix.clone();
                        p.push(v.clone());
                        next.push(p);
                        if next.len() > cap {
                            return Err(EnumerationError::TooMany {
                                ty: t.to_string(),
                                cap,
                            });
                        }
                    }
                }
                combos = next;
            }
            for args in combos {
                out.push(Term::Cons(c.clone(), args));
                if out.len() > cap {
                    return Err(EnumerationError::TooMany {
                        ty: t.to_string(),
                        cap,
                    });
                }
            }
        }
        Ok(out)
    }
}

fn quantum_with(t: &Type, q: &BTreeSet<String>) -> bool {
    match t {
        Type::Qbit => true,
        Type::Unit | Type::Arrow(..) => false,
        Type::Named(n) => q.contains(n),
        Type::List(a) => quantum_with(a, q),
        Type::Tensor(a, b) => quantum_with(a, q) || quantum_with(b, q),
    }
}

/// The constructor that `c` is mapped to by `shape`.
pub fn shadow_constructor(c: &str) -> String {
    if STRUCTURAL.contains(&c) || c.ends_with('~') {
        c.to_string()
    } else {
        format!("{c}~")
    }
}
