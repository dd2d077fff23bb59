//! The type system: reconstruction, linear checking and the orthogonality
//! and unitarity side conditions.
//!
//! [`check`] first reconstructs a type for every node ([`infer`]), then
//! walks the term with the typing rules, tracking which linear variables
//! each subterm consumes.

mod check;
pub mod infer;
pub mod predicates;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Name, Registry, Term, Type};
use crate::parser::SourceFile;

pub use infer::{infer, InferError, TyTree};
pub use predicates::{orthogonal, unitary, CheckBudget, Unknown, Verdict, Witness};

/// Typing context `Γ; Δ`. Classical entries may be boxed, meaning they
/// stand for linear variables under a `shape`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    pub gamma: BTreeMap<Name, (Type, bool)>,
    pub delta: BTreeMap<Name, Type>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_classical(mut self, x: impl Into<Name>, ty: Type) -> Self {
        self.gamma.insert(x.into(), (ty, false));
        self
    }

    pub fn with_linear(mut self, x: impl Into<Name>, ty: Type) -> Self {
        self.delta.insert(x.into(), ty);
        self
    }

    fn types(&self) -> BTreeMap<Name, Type> {
        self.gamma
            .iter()
            .map(|(x, (t, _))| (x.clone(), t.clone()))
            .chain(self.delta.iter().map(|(x, t)| (x.clone(), t.clone())))
            .collect()
    }
}

/// A typing derivation, one node per rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub rule: &'static str,
    pub term: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Linear variables consumed by this subterm.
    pub linear: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Rule names in pre-order.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Typed {
    #[serde(serialize_with = "ser_type")]
    pub ty: Type,
    pub derivation: Derivation,
    /// Orthogonality side conditions taken on trust from `@orthogonal`.
    pub assumptions: Vec<String>,
}

fn ser_type<S: serde::Serializer>(t: &Type, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum CheckError {
    #[error("rule {rule} fails at `{subterm}`: {msg}")]
    Type {
        rule: &'static str,
        subterm: String,
        msg: String,
    },
    #[error("rule {rule} at `{subterm}`: budget exceeded ({what})")]
    BudgetExceeded {
        rule: &'static str,
        subterm: String,
        what: String,
    },
    #[error("rule {rule} at `{subterm}`: side condition undecided ({reason})")]
    Undecided {
        rule: &'static str,
        subterm: String,
        reason: String,
    },
}

impl CheckError {
    pub fn rule(&self) -> &'static str {
        match self {
            CheckError::Type { rule, .. }
            | CheckError::BudgetExceeded { rule, .. }
            | CheckError::Undecided { rule, .. } => rule,
        }
    }

    pub fn subterm(&self) -> &str {
        match self {
            CheckError::Type { subterm, .. }
            | CheckError::BudgetExceeded { subterm, .. }
            | CheckError::Undecided { subterm, .. } => subterm,
        }
    }
}

/// Derives `Γ; Δ ⊢ t : T`. When `expected` is absent the reconstructed
/// type is used.
pub fn check(
    reg: &Registry,
    ctx: &Context,
    t: &Term,
    expected: Option<&Type>,
    budget: &CheckBudget,
) -> Result<Typed, CheckError> {
    for (x, (ty, _)) in &ctx.gamma {
        if !reg.is_classical(ty) {
            return Err(CheckError::Type {
                rule: "ax_c",
                subterm: crate::parser::pretty(&Term::var(x.clone())),
                msg: format!("classical context entry has quantum type `{ty}`"),
            });
        }
    }
    let t = t.freshen();
    let tree = infer(reg, &t, &ctx.types(), expected).map_err(|e| CheckError::Type {
        rule: "infer",
        subterm: e.subterm,
        msg: e.msg,
    })?;
    check::run(reg, ctx, &t, &tree, budget)
}

pub fn check_closed(
    reg: &Registry,
    t: &Term,
    expected: Option<&Type>,
    budget: &CheckBudget,
) -> Result<Typed, CheckError> {
    check(reg, &Context::new(), t, expected, budget)
}

/// One checked item of a source file.
#[derive(Debug, Clone)]
pub struct ItemReport {
    pub name: String,
    pub result: Result<Typed, CheckError>,
}

/// Checks every definition (against its ascription, if any) and `main`.
pub fn check_file(file: &SourceFile, budget: &CheckBudget) -> Vec<ItemReport> {
    let mut out: Vec<ItemReport> = file
        .definitions
        .iter()
        .map(|d| ItemReport {
            name: d.name.clone(),
            result: check_closed(&file.registry, &d.term, d.ty.as_ref(), budget),
        })
        .collect();
    if let Some(m) = &file.main {
        out.push(ItemReport {
            name: "main".into(),
            result: check_closed(&file.registry, m, None, budget),
        });
    }
    out
}
