//! The typing rules over a reconstructed term.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::predicates::{orthogonal, unit_closed, unitary, CheckBudget, Unknown, Verdict};
use super::{CheckError, Context, Derivation, TyTree, Typed};
use crate::ast::{base_name, ArrowKind, Name, Registry, Term, Type};
use crate::parser::pretty;
use crate::Amplitude;

type Used = BTreeSet<Name>;
type Res = Result<(Used, Derivation), CheckError>;

pub(super) fn run(
    reg: &Registry,
    ctx: &Context,
    t: &Term,
    tree: &TyTree,
    budget: &CheckBudget,
) -> Result<Typed, CheckError> {
    let mut c = Checker {
        reg,
        budget,
        gamma: ctx.gamma.iter().map(|(x, (t, _))| (x.clone(), t.clone())).collect(),
        delta: ctx.delta.iter().map(|(x, t)| (x.clone(), t.clone())).collect(),
        assumptions: Vec::new(),
    };
    let (used, d) = c.term(t, tree)?;
    let missing: Vec<_> = ctx.delta.keys().filter(|x| !used.contains(*x)).collect();
    if let Some(x) = missing.first() {
        return Err(type_err(
            "ax",
            t,
            format!("linear variable `{}` is never used", base_name(x)),
        ));
    }
    Ok(Typed {
        ty: tree.ty.clone(),
        derivation: d,
        assumptions: c.assumptions,
    })
}

struct Checker<'a> {
    reg: &'a Registry,
    budget: &'a CheckBudget,
    gamma: Vec<(Name, Type)>,
    delta: Vec<(Name, Type)>,
    assumptions: Vec<String>,
}

fn type_err(rule: &'static str, t: &Term, msg: String) -> CheckError {
    CheckError::Type {
        rule,
        subterm: pretty(t),
        msg,
    }
}

fn names(u: &Used) -> Vec<String> {
    u.iter().map(|x| pretty(&Term::var(x.clone()))).collect()
}

fn node(rule: &'static str, t: &Term, ty: &Type, used: &Used, premises: Vec<Derivation>) -> Derivation {
    Derivation {
        rule,
        term: pretty(t),
        ty: ty.to_string(),
        linear: names(used),
        notes: Vec::new(),
        premises,
    }
}

fn join(rule: &'static str, t: &Term, a: &mut Used, b: Used) -> Result<(), CheckError> {
    if let Some(x) = a.intersection(&b).next() {
        return Err(type_err(
            rule,
            t,
            format!("linear variable `{}` is used more than once", base_name(x)),
        ));
    }
    a.extend(b);
    Ok(())
}

impl<'a> Checker<'a> {
    fn env(&self) -> BTreeMap<Name, Type> {
        self.gamma
            .iter()
            .chain(self.delta.iter())
            .map(|(x, t)| (x.clone(), t.clone()))
            .collect()
    }

    fn is_linear(&self, x: &str) -> Option<bool> {
        let d = self.delta.iter().rposition(|(n, _)| n == x);
        let g = self.gamma.iter().rposition(|(n, _)| n == x);
        match (d, g) {
            (Some(_), None) => Some(true),
            (None, Some(_)) => Some(false),
            // a later binding shadows; names are unique after freshening
            (Some(_), Some(_)) => Some(true),
            (None, None) => None,
        }
    }

    /// Settles an orthogonality side condition.
    fn require_orthogonal(
        &mut self,
        rule: &'static str,
        at: &Term,
        s: &Term,
        t: &Term,
        annotated: bool,
        notes: &mut Vec<String>,
    ) -> Result<(), CheckError> {
        match orthogonal(self.reg, s, t, &self.env(), self.budget) {
            Verdict::Yes => Ok(()),
            Verdict::No(w) => Err(type_err(
                rule,
                at,
                format!("`{}` and `{}` are not orthogonal: {w}", pretty(s), pretty(t)),
            )),
            Verdict::Unknown(u) => {
                if annotated {
                    let a = format!("assumed `{}` orthogonal to `{}`", pretty(s), pretty(t));
                    notes.push(a.clone());
                    self.assumptions.push(a);
                    Ok(())
                } else {
                    Err(undecided(rule, at, u))
                }
            }
        }
    }

    fn term(&mut self, t: &Term, tree: &TyTree) -> Res {
        let ty = &tree.ty;
        match t {
            Term::Var(x) => match self.is_linear(x) {
                Some(true) => {
                    let u = Used::from([x.clone()]);
                    let d = node("ax", t, ty, &u, vec![]);
                    Ok((u, d))
                }
                Some(false) => Ok((Used::new(), node("ax_c", t, ty, &Used::new(), vec![]))),
                None => Err(type_err(
                    "ax",
                    t,
                    format!("unbound variable `{}`", base_name(x)),
                )),
            },
            Term::Ket0 | Term::Ket1 => Ok((Used::new(), node("ket", t, ty, &Used::new(), vec![]))),
            Term::QCase {
                scrut,
                zero,
                one,
                assume_orthogonal,
            } => {
                if !ty.is_basic() {
                    return Err(type_err("qcase", t, format!("result type `{ty}` is not basic")));
                }
                let (mut u, ds) = self.term(scrut, &tree.kids[0])?;
                let (u0, d0) = self.term(zero, &tree.kids[1])?;
                let (u1, d1) = self.term(one, &tree.kids[2])?;
                if u0 != u1 {
                    return Err(type_err(
                        "qcase",
                        t,
                        "branches use different linear variables".into(),
                    ));
                }
                let mut notes = Vec::new();
                self.require_orthogonal("qcase", t, zero, one, *assume_orthogonal, &mut notes)?;
                join("qcase", t, &mut u, u0)?;
                let mut d = node("qcase", t, ty, &u, vec![ds, d0, d1]);
                d.notes = notes;
                Ok((u, d))
            }
            Term::Cons(_, args) => {
                let mut u = Used::new();
                let mut ps = Vec::new();
                for (a, k) in args.iter().zip(&tree.kids) {
                    let (ua, da) = self.term(a, k)?;
                    join("cons", t, &mut u, ua)?;
                    ps.push(da);
                }
                let d = node("cons", t, ty, &u, ps);
                Ok((u, d))
            }
            Term::Match(s, branches) => self.matching(t, s, branches, tree),
            Term::Lambda(x, body) => {
                let Type::Arrow(kind, dom, _) = ty else {
                    return Err(type_err("abs", t, format!("abstraction typed `{ty}`")));
                };
                let (u, d) = self.abstraction(t, x, dom, *kind, body, &tree.kids[0])?;
                Ok((u, d))
            }
            Term::LetRec(f, x, body) => {
                let Type::Arrow(kind, dom, _) = ty else {
                    return Err(type_err("rec", t, format!("recursive function typed `{ty}`")));
                };
                self.gamma.push((f.clone(), ty.clone()));
                let r = self.abstraction(t, x, dom, *kind, body, &tree.kids[0]);
                self.gamma.pop();
                let (u, inner) = r?;
                if let Some(y) = u.iter().next() {
                    return Err(type_err(
                        "rec",
                        t,
                        format!("recursive function captures linear variable `{}`", base_name(y)),
                    ));
                }
                Ok((u.clone(), node("rec", t, ty, &u, vec![inner])))
            }
            Term::Unit(inner) => {
                let Type::Arrow(_, dom, cod) = ty else {
                    return Err(type_err("unit", t, format!("unit typed `{ty}`")));
                };
                let (u, d) = self.term(inner, &tree.kids[0])?;
                if !u.is_empty() {
                    return Err(type_err(
                        "unit",
                        t,
                        "the function captures linear variables".into(),
                    ));
                }
                if !self.reg.is_quantum(dom) || !self.reg.is_quantum(cod) {
                    return Err(type_err(
                        "unit",
                        t,
                        format!("`{dom} -o {cod}` is not a map between quantum types"),
                    ));
                }
                match unitary(self.reg, inner, dom, cod, &self.env(), self.budget) {
                    Verdict::Yes => {}
                    Verdict::No(w) => {
                        return Err(type_err("unit", t, format!("not unitary: {w}")))
                    }
                    Verdict::Unknown(r) => return Err(undecided("unit", t, r)),
                }
                let mut n = node("unit", t, ty, &u, vec![d]);
                n.notes.push("unitary".into());
                Ok((u, n))
            }
            Term::App(f, a) => {
                let fty = &tree.kids[0].ty;
                let Type::Arrow(kind, dom, _) = fty else {
                    return Err(type_err("app", t, format!("applying a value of type `{fty}`")));
                };
                let (mut uf, df) = self.term(f, &tree.kids[0])?;
                let (ua, da) = self.term(a, &tree.kids[1])?;
                let rule = match kind {
                    ArrowKind::Linear => {
                        join("app", t, &mut uf, ua)?;
                        "app"
                    }
                    ArrowKind::Classical => {
                        if !self.reg.is_classical(dom) {
                            return Err(type_err("app_c", t, format!("`=>` with quantum domain `{dom}`")));
                        }
                        if let Some(y) = ua.iter().next() {
                            return Err(type_err(
                                "app_c",
                                t,
                                format!("classical argument uses linear variable `{}`", base_name(y)),
                            ));
                        }
                        "app_c"
                    }
                    ArrowKind::Unitary => {
                        if let Some(y) = uf.iter().next() {
                            return Err(type_err(
                                "app_u",
                                t,
                                format!("unitary uses linear variable `{}`", base_name(y)),
                            ));
                        }
                        uf = ua;
                        "app_u"
                    }
                };
                let d = node(rule, t, ty, &uf, vec![df, da]);
                Ok((uf, d))
            }
            Term::Sum(..) => self.superposition(t, tree),
            Term::Shape(inner) => {
                if !ty.is_basic() {
                    return Err(type_err("shape", t, format!("shape typed `{ty}`")));
                }
                let (boxed, d) = self.term(inner, &tree.kids[0])?;
                let mut n = node("shape", t, ty, &Used::new(), vec![d]);
                if !boxed.is_empty() {
                    n.notes.push(format!("boxed {}", names(&boxed).join(", ")));
                }
                Ok((Used::new(), n))
            }
        }
    }

    fn abstraction(
        &mut self,
        t: &Term,
        x: &Name,
        dom: &Type,
        kind: ArrowKind,
        body: &Term,
        btree: &TyTree,
    ) -> Res {
        let ty = Type::arrow(kind, dom.clone(), btree.ty.clone());
        match kind {
            ArrowKind::Linear => {
                self.delta.push((x.clone(), dom.clone()));
                let r = self.term(body, btree);
                self.delta.pop();
                let (mut u, d) = r?;
                if !u.remove(x) {
                    return Err(type_err(
                        "abs",
                        t,
                        format!("linear variable `{}` is never used", base_name(x)),
                    ));
                }
                let n = node("abs", t, &ty, &u, vec![d]);
                Ok((u, n))
            }
            ArrowKind::Classical => {
                if !self.reg.is_classical(dom) {
                    return Err(type_err(
                        "abs_c",
                        t,
                        format!("`=>` needs a classical domain, found `{dom}`"),
                    ));
                }
                self.gamma.push((x.clone(), dom.clone()));
                let r = self.term(body, btree);
                self.gamma.pop();
                let (u, d) = r?;
                let n = node("abs_c", t, &ty, &u, vec![d]);
                Ok((u, n))
            }
            ArrowKind::Unitary => Err(type_err(
                "abs",
                t,
                "an abstraction has a `<->` type only under unit".into(),
            )),
        }
    }

    fn matching(&mut self, t: &Term, s: &Term, branches: &[crate::ast::Branch], tree: &TyTree) -> Res {
        let ty = &tree.ty;
        if !ty.is_basic() {
            return Err(type_err("match", t, format!("result type `{ty}` is not basic")));
        }
        let sty = &tree.kids[0].ty;
        let mut expected = self.reg.constructors_of(sty);
        let mut seen: Vec<String> = branches.iter().map(|b| b.cons.clone()).collect();
        expected.sort();
        seen.sort();
        if expected != seen {
            return Err(type_err(
                "match",
                t,
                format!("patterns must cover each constructor of `{sty}` once"),
            ));
        }
        let (mut u, ds) = self.term(s, &tree.kids[0])?;
        let mut shared: Option<Used> = None;
        let mut ps = vec![ds];
        for (b, k) in branches.iter().zip(&tree.kids[1..]) {
            let args = self.reg.cons_args(&b.cons, sty).unwrap_or_default();
            let (gl, dl) = (self.gamma.len(), self.delta.len());
            let mut quantum = Vec::new();
            for (v, a) in b.vars.iter().zip(args) {
                if self.reg.is_quantum(&a) {
                    quantum.push(v.clone());
                    self.delta.push((v.clone(), a));
                } else {
                    self.gamma.push((v.clone(), a));
                }
            }
            let r = self.term(&b.body, k);
            self.gamma.truncate(gl);
            self.delta.truncate(dl);
            let (mut ub, db) = r?;
            for q in &quantum {
                if !ub.remove(q) {
                    return Err(type_err(
                        "match",
                        t,
                        format!("quantum pattern variable `{}` is never used", base_name(q)),
                    ));
                }
            }
            match &shared {
                None => shared = Some(ub),
                Some(prev) if *prev != ub => {
                    return Err(type_err(
                        "match",
                        t,
                        "branches use different linear variables".into(),
                    ))
                }
                _ => {}
            }
            ps.push(db);
        }
        join("match", t, &mut u, shared.unwrap_or_default())?;
        let d = node("match", t, ty, &u, ps);
        Ok((u, d))
    }

    fn superposition(&mut self, t: &Term, tree: &TyTree) -> Res {
        let ty = &tree.ty;
        let mut flat: Vec<(Amplitude, &Term, &TyTree, Term)> = Vec::new();
        let mut annotated = false;
        flatten(t, tree, &Amplitude::one(), &mut flat, &mut annotated);
        let items: Vec<_> = flat.into_iter().filter(|(a, ..)| !a.is_zero()).collect();
        match items.as_slice() {
            [] => return Err(type_err("sup", t, "the superposition is zero".into())),
            [(a, s, k, _)] if a.is_one() => {
                let (u, d) = self.term(s, k)?;
                let n = node("equiv", t, ty, &u, vec![d]);
                return Ok((u, n));
            }
            _ => {}
        }
        let flat_result = self.sup_items(t, ty, &items, annotated);
        if flat_result.is_ok() {
            return flat_result;
        }
        if let Term::Sum(top, ann) = t {
            if top.iter().any(|(_, s)| matches!(s, Term::Sum(..))) {
                // nested sums are also typed component by component
                let nested: Vec<_> = top
                    .iter()
                    .zip(&tree.kids)
                    .filter(|((a, _), _)| !a.is_zero())
                    .map(|((a, s), k)| (a.clone(), s, k, Term::unit_value()))
                    .collect();
                if let Ok(r) = self.sup_items(t, ty, &nested, *ann) {
                    return Ok(r);
                }
            }
        }
        if !t.is_closed() {
            return flat_result;
        }
        self.closed_sum(t, ty, &items).or(flat_result)
    }

    /// A closed sum is also accepted when its value has norm 1.
    fn closed_sum(&mut self, t: &Term, ty: &Type, items: &[(Amplitude, &Term, &TyTree, Term)]) -> Res {
        if !self.reg.is_quantum(ty) || !ty.is_basic() {
            return Err(type_err("sup", t, format!("superposition of type `{ty}`, which is not a quantum type")));
        }
        let mut ps = Vec::new();
        for (_, s, k, _) in items {
            ps.push(self.term(s, k)?.1);
        }
        let terms: Vec<&Term> = items.iter().map(|i| i.1).collect();
        match unit_closed(&terms, t, self.budget) {
            Verdict::Yes => {
                let mut d = node("sup", t, ty, &Used::new(), ps);
                d.notes.push("unit norm by evaluation".into());
                Ok((Used::new(), d))
            }
            Verdict::No(w) => Err(type_err("sup", t, format!("not a unit vector: {w}"))),
            Verdict::Unknown(u) => Err(undecided("sup", t, u)),
        }
    }

    fn sup_items(&mut self, t: &Term, ty: &Type, items: &[(Amplitude, &Term, &TyTree, Term)], annotated: bool) -> Res {
        if !self.reg.is_quantum(ty) || !ty.is_basic() {
            return Err(type_err(
                "sup",
                t,
                format!("superposition of type `{ty}`, which is not a quantum type"),
            ));
        }
        let norm: Amplitude = items.iter().map(|(a, ..)| a.norm_sq()).sum();
        if !norm.is_one() {
            return Err(type_err(
                "sup",
                t,
                format!("squared amplitudes sum to {norm}, not 1"),
            ));
        }
        let mut shared: Option<Used> = None;
        let mut ps = Vec::new();
        for (_, s, k, _) in items {
            let (u, d) = self.term(s, k)?;
            match &shared {
                None => shared = Some(u),
                Some(prev) if *prev != u => {
                    return Err(type_err(
                        "sup",
                        t,
                        "components use different linear variables".into(),
                    ))
                }
                _ => {}
            }
            ps.push(d);
        }
        let mut notes = Vec::new();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                self.require_orthogonal("sup", t, items[i].1, items[j].1, annotated, &mut notes)?;
            }
        }
        let u = shared.unwrap_or_default();
        let mut d = node("sup", t, ty, &u, ps);
        d.notes = notes;
        Ok((u, d))
    }
}

/// Flattens nested sums together with their type trees, merging α-equal
/// components.
fn flatten<'t>(
    t: &'t Term,
    tree: &'t TyTree,
    alpha: &Amplitude,
    out: &mut Vec<(Amplitude, &'t Term, &'t TyTree, Term)>,
    annotated: &mut bool,
) {
    match t {
        Term::Sum(items, ann) => {
            *annotated |= *ann;
            for ((b, s), k) in items.iter().zip(&tree.kids) {
                flatten(s, k, &(alpha.clone() * b.clone()), out, annotated);
            }
        }
        _ => {
            let key = t.alpha_key();
            match out.iter_mut().find(|e| e.3 == key) {
                Some(e) => e.0 += alpha.clone(),
                None => out.push((alpha.clone(), t, tree, key)),
            }
        }
    }
}

fn undecided(rule: &'static str, t: &Term, u: Unknown) -> CheckError {
    if u.is_budget() {
        CheckError::BudgetExceeded {
            rule,
            subterm: pretty(t),
            what: u.to_string(),
        }
    } else {
        CheckError::Undecided {
            rule,
            subterm: pretty(t),
            reason: u.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::ast::{Registry, Type};
    use crate::parser::{parse, parse_term, parse_type};
    use crate::typecheck::*;

    const HAD: &str =
        "unit (\\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> })";
    const LEN: &str = "letrec f x = match x { [] -> 0, h :: t -> S (f t) }";

    fn chk(src: &str, ty: &str) -> Result<Typed, CheckError> {
        let reg = Registry::new();
        let t = parse_term(src, &reg).unwrap();
        let ty = parse_type(ty, &reg).unwrap();
        check_closed(&reg, &t, Some(&ty), &CheckBudget::default())
    }

    #[test]
    fn hadamard() {
        let r = chk(HAD, "Qbit <-> Qbit").unwrap();
        assert_eq!(r.derivation.rule, "unit");
        assert!(chk(HAD, "Qbit -o Qbit").is_err());
    }

    #[test]
    fn not_unitary() {
        let e = chk("unit (\\x. qcase x { 0 -> |0>, 1 -> |0> })", "Qbit <-> Qbit").unwrap_err();
        assert_eq!(e.rule(), "qcase");
    }

    #[test]
    fn length() {
        chk(LEN, "[bit] => nat").unwrap();
        chk(LEN, "[nat] => nat").unwrap();
        assert!(chk(LEN, "[Qbit] -o nat").is_err());
        assert!(chk(LEN, "[Qbit] => nat").is_err());
    }

    #[test]
    fn linearity() {
        assert!(chk("\\x. (x, x)", "Qbit -o (Qbit, Qbit)").is_err());
        assert!(chk("\\x. |0>", "Qbit -o Qbit").is_err());
        chk("\\x. (x, x)", "bit => (bit, bit)").unwrap();
        let r = chk("\\y. (y, shape y)", "Qbit -o (Qbit, ())").unwrap();
        assert!(r.derivation.rules().contains(&"shape"));
    }

    #[test]
    fn superpositions() {
        chk("(1/sqrt2)*|0> + (1/sqrt2)*|1>", "Qbit").unwrap();
        assert!(chk("(1/2)*|0> + (1/2)*|1>", "Qbit").is_err());
        assert!(chk("(1/sqrt2)*|0> + (1/sqrt2)*|0>", "Qbit").is_err());
        assert!(chk("(1/sqrt2)*(|0>, |0>) + (1/sqrt2)*(|0>, |1>)", "(Qbit, Qbit)").is_ok());
        chk("(1/2)*|0> + (1/2)*|1> + (1/sqrt2)*|->", "Qbit").unwrap();
        assert!(chk("(1/2)*|0> + (1/2)*|1> + (1/sqrt2)*|+>", "Qbit").is_err());
    }

    #[test]
    fn infinite_context_requires_annotation() {
        let e = chk("\\n. \\q. qcase q { 0 -> (|0>, n), 1 -> (|1>, n) }", "nat => Qbit -o (Qbit, nat)")
            .unwrap_err();
        assert!(matches!(e, CheckError::Undecided { .. }), "{e}");
        let r = chk(
            "\\n. \\q. @orthogonal qcase q { 0 -> (|0>, n), 1 -> (|1>, n) }",
            "nat => Qbit -o (Qbit, nat)",
        )
        .unwrap();
        assert_eq!(r.assumptions.len(), 1);
    }

    #[test]
    fn file_items() {
        let f = parse(&format!("let had : Qbit <-> Qbit = {HAD};\nmain had |+>")).unwrap();
        let reports = check_file(&f, &CheckBudget::default());
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.result.is_ok()));
        assert_eq!(reports[1].result.as_ref().unwrap().ty, Type::Qbit);
    }
}
