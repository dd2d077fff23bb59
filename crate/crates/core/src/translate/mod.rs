//! Compilation of Hyrql terms to STTRS.
//!
//! [`translate`] builds partial rules by induction on an admissible term,
//! [`translate_admissible`] closes them into a system with the `unit` and
//! `shape` library, and [`translate_entry`] first makes the term
//! admissible. [`Session`] translates several closed terms into one system,
//! reusing symbols for α-equivalent subterms.

pub mod admissible;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::ast::{base_name, Name, Registry, Term, Type};
use crate::parser::{pretty, SourceFile};
use crate::sttrs::{Rewriter, Rule, STerm, SType, Sttrs, SHAPE, UNIT};
use crate::typecheck::{infer, TyTree};

pub use admissible::{check_admissible, to_admissible};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    Type { subterm: String, msg: String },
    NotAdmissible { subterm: String, reason: String },
    /// An assertion of the algorithm failed.
    Assertion { case: &'static str, subterm: String },
    Interpret { subterm: String },
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslateError::Type { subterm, msg } => write!(f, "ill-typed at `{subterm}`: {msg}"),
            TranslateError::NotAdmissible { subterm, reason } => {
                write!(f, "`{subterm}` is not admissible: {reason}")
            }
            TranslateError::Assertion { case, subterm } => {
                write!(f, "{case}: subterm `{subterm}` has more than one partial rule")
            }
            TranslateError::Interpret { subterm } => {
                write!(f, "no symbol interprets `{subterm}`")
            }
        }
    }
}

impl std::error::Error for TranslateError {}

/// A partial rule `l -> r` valid under `sigma`; `lhs` is `None` for `⊥`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partial {
    pub lhs: Option<Vec<STerm>>,
    pub rhs: STerm,
    pub sigma: BTreeMap<Name, STerm>,
}

impl Partial {
    fn bottom(rhs: STerm) -> Partial {
        Partial { lhs: None, rhs, sigma: BTreeMap::new() }
    }
}

/// One entry `t -> f` of the symbol table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolEntry {
    pub symbol: String,
    pub term: Term,
    pub ty: SType,
}

#[derive(Debug, Clone, Serialize)]
struct SymbolJson {
    symbol: String,
    #[serde(rename = "type")]
    ty: String,
    term: String,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub sttrs: Sttrs,
    pub table: Vec<SymbolEntry>,
    /// The STTRS term standing for the translated term.
    pub entry: STerm,
    /// The admissible term that was translated.
    pub source: Term,
}

impl Translation {
    pub fn symbols_json(&self) -> serde_json::Value {
        symbols_json(&self.table)
    }

    pub fn interpret(&self, t: &Term) -> Result<STerm, TranslateError> {
        interpret(t, &self.table)
    }
}

pub fn symbols_json(table: &[SymbolEntry]) -> serde_json::Value {
    let rows: Vec<SymbolJson> = table
        .iter()
        .map(|e| SymbolJson { symbol: e.symbol.clone(), ty: e.ty.to_string(), term: pretty(&e.term) })
        .collect();
    serde_json::to_value(rows).expect("symbol table serializes")
}

/// Translates closed terms into one growing system.
pub struct Session {
    sys: Sttrs,
    table: Vec<SymbolEntry>,
    /// Symbols by α-class and type of the term they stand for.
    keys: HashMap<(Term, SType), usize>,
}

const RESERVED: [&str; 9] = [UNIT, SHAPE, "sym", "type", "i", "sqrt2", "pi", "e", "cbrt2"];

impl Session {
    pub fn new(reg: &Registry) -> Session {
        Session { sys: Sttrs::new(reg.clone()), table: Vec::new(), keys: HashMap::new() }
    }

    pub fn table(&self) -> &[SymbolEntry] {
        &self.table
    }

    fn lookup(&self, t: &Term, ty: &Type) -> Option<&SymbolEntry> {
        self.keys.get(&(t.alpha_key(), SType::from_type(ty))).map(|&i| &self.table[i])
    }

    fn name_taken(&self, n: &str) -> bool {
        RESERVED.contains(&n) || self.sys.symbols.contains_key(n) || self.sys.is_constructor(n)
    }

    fn mint(&self, hint: &str) -> String {
        let mut base: String = base_name(hint).chars().filter(|c| c.is_alphanumeric() || *c == '_').collect();
        if !base.starts_with(|c: char| c.is_alphabetic()) {
            base = format!("f{base}");
        }
        if !self.name_taken(&base) {
            return base;
        }
        (1..).map(|n| format!("{base}_{n}")).find(|n| !self.name_taken(n)).expect("unbounded")
    }

    fn record(&mut self, t: &Term, hty: &Type, symbol: String, ty: SType) {
        self.keys.insert((t.alpha_key(), SType::from_type(hty)), self.table.len());
        self.table.push(SymbolEntry { symbol, term: t.clone(), ty });
    }

    /// Algorithm 1 on an admissible term with its type annotations.
    pub fn translate(&mut self, s: &Term, tree: &TyTree, hint: Option<&str>) -> Result<Vec<Partial>, TranslateError> {
        let single = |this: &mut Self, t: &Term, tr: &TyTree, case| -> Result<STerm, TranslateError> {
            let mut c = this.translate(t, tr, None)?;
            match c.as_slice() {
                [p] if p.lhs.is_none() && p.sigma.is_empty() => Ok(c.pop().expect("one").rhs),
                _ => Err(TranslateError::Assertion { case, subterm: pretty(t) }),
            }
        };
        let kid = |i: usize| &tree.kids[i];
        match s {
            Term::Var(x) => Ok(vec![Partial::bottom(STerm::var(x.clone()))]),
            Term::Ket0 => Ok(vec![Partial::bottom(STerm::ket(false))]),
            Term::Ket1 => Ok(vec![Partial::bottom(STerm::ket(true))]),
            Term::QCase { scrut, zero, one, .. } => {
                let Term::Var(x) = &**scrut else {
                    return Err(TranslateError::NotAdmissible { subterm: pretty(s), reason: "scrutinee is not a variable".into() });
                };
                let mut out = Vec::new();
                for (i, (b, tr)) in [(zero, kid(1)), (one, kid(2))].into_iter().enumerate() {
                    let ket = STerm::ket(i == 1);
                    let sub: BTreeMap<Name, STerm> = [(x.clone(), ket.clone())].into();
                    for mut p in self.translate(b, tr, None)? {
                        p.sigma.insert(x.clone(), ket.clone());
                        p.rhs = p.rhs.substitute(&sub);
                        out.push(p);
                    }
                }
                Ok(out)
            }
            Term::Cons(c, args) => {
                let rs = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| single(self, a, kid(i), "constructor"))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(vec![Partial::bottom(STerm::cons(c.clone(), rs))])
            }
            Term::Match(scrut, bs) => {
                let Term::Var(x) = &**scrut else {
                    return Err(TranslateError::NotAdmissible { subterm: pretty(s), reason: "scrutinee is not a variable".into() });
                };
                let mut out = Vec::new();
                for (j, b) in bs.iter().enumerate() {
                    let pat = STerm::cons(b.cons.clone(), b.vars.iter().cloned().map(STerm::Var).collect());
                    for mut p in self.translate(&b.body, kid(1 + j), None)? {
                        let v = pat.substitute(&p.sigma);
                        for y in &b.vars {
                            p.sigma.remove(y);
                        }
                        let sub: BTreeMap<Name, STerm> = [(x.clone(), v.clone())].into();
                        p.rhs = p.rhs.substitute(&sub);
                        p.sigma.insert(x.clone(), v);
                        out.push(p);
                    }
                }
                Ok(out)
            }
            Term::Lambda(x, body) | Term::LetRec(_, x, body) => {
                let closed = s.is_closed();
                if closed {
                    if let Some(e) = self.lookup(s, &tree.ty) {
                        return Ok(vec![Partial::bottom(STerm::fun(e.symbol.clone()))]);
                    }
                }
                let mut c = self.translate(body, kid(0), None)?;
                for p in &mut c {
                    let v = p.sigma.remove(x).unwrap_or_else(|| STerm::var(x.clone()));
                    let mut l = vec![v];
                    l.extend(p.lhs.take().unwrap_or_default());
                    p.lhs = Some(l);
                }
                if !closed {
                    return Ok(c);
                }
                let default = match s {
                    Term::LetRec(g, ..) => base_name(g).to_string(),
                    _ => "f".to_string(),
                };
                let f = self.mint(hint.unwrap_or(&default));
                let arity = c.first().and_then(|p| p.lhs.as_ref()).map_or(0, Vec::len);
                let ty = SType::of_symbol(&tree.ty, arity).ok_or_else(|| TranslateError::Type {
                    subterm: pretty(s),
                    msg: format!("type `{}` takes fewer than {arity} arguments", tree.ty),
                })?;
                self.sys.symbols.insert(f.clone(), ty.clone());
                let tau: BTreeMap<Name, STerm> = match s {
                    Term::LetRec(g, ..) => [(g.clone(), STerm::fun(f.clone()))].into(),
                    _ => BTreeMap::new(),
                };
                for p in c {
                    let lhs = STerm::app(STerm::fun(f.clone()), p.lhs.unwrap_or_default());
                    self.sys.add_rule(Rule::new(lhs, p.rhs.substitute(&tau)));
                }
                self.record(s, &tree.ty, f.clone(), ty);
                Ok(vec![Partial::bottom(STerm::fun(f))])
            }
            Term::Unit(b) => {
                if let Some(e) = self.lookup(s, &tree.ty) {
                    return Ok(vec![Partial::bottom(STerm::app(STerm::fun(UNIT), vec![STerm::fun(e.symbol.clone())]))]);
                }
                let mut c = self.translate(b, kid(0), hint)?;
                let inner_key = (b.alpha_key(), SType::from_type(&kid(0).ty));
                let inner = self.keys.get(&inner_key).copied();
                match inner {
                    Some(i) if c.len() == 1 && c[0].rhs == STerm::fun(self.table[i].symbol.clone()) => {
                        let f = self.table[i].symbol.clone();
                        self.keys.remove(&inner_key);
                        self.keys.insert((s.alpha_key(), SType::from_type(&tree.ty)), i);
                        self.table[i].term = s.clone();
                        let by = STerm::app(STerm::fun(UNIT), vec![STerm::fun(f.clone())]);
                        for p in &mut c {
                            p.rhs = p.rhs.replace_fun(&f, &by);
                        }
                    }
                    _ => {
                        for p in &mut c {
                            p.rhs = STerm::app(STerm::fun(UNIT), vec![p.rhs.clone()]);
                        }
                    }
                }
                Ok(c)
            }
            Term::App(f, a) => {
                let rf = single(self, f, kid(0), "application")?;
                let ra = single(self, a, kid(1), "application")?;
                Ok(vec![Partial::bottom(STerm::app(rf, vec![ra]))])
            }
            Term::Sum(items, _) => {
                let rs = items
                    .iter()
                    .enumerate()
                    .map(|(i, (al, t))| Ok((al.clone(), single(self, t, kid(i), "superposition")?)))
                    .collect::<Result<Vec<_>, TranslateError>>()?;
                Ok(vec![Partial::bottom(STerm::Sum(rs))])
            }
            Term::Shape(b) => {
                let mut c = self.translate(b, kid(0), None)?;
                for p in &mut c {
                    p.rhs = STerm::app(STerm::fun(SHAPE), vec![p.rhs.clone()]);
                }
                Ok(c)
            }
        }
    }

    /// Algorithm 2 without the library: translates a closed admissible term
    /// and returns the STTRS term standing for it.
    pub fn add_admissible(&mut self, s: &Term, expected: Option<&Type>, hint: Option<&str>) -> Result<STerm, TranslateError> {
        check_admissible(s).map_err(|reason| TranslateError::NotAdmissible { subterm: pretty(s), reason })?;
        let tree = infer(&self.sys.registry, s, &BTreeMap::new(), expected)
            .map_err(|e| TranslateError::Type { subterm: e.subterm, msg: e.msg })?;
        let c = self.translate(s, &tree, hint)?;
        let r = match c.as_slice() {
            [p] if p.lhs.is_none() && p.sigma.is_empty() => p.rhs.clone(),
            _ => return Err(TranslateError::Assertion { case: "entry", subterm: pretty(s) }),
        };
        if matches!(r, STerm::App(..)) && !Rewriter::new(&self.sys).is_value(&r) {
            if let Some(e) = self.lookup(s, &tree.ty) {
                return Ok(STerm::fun(e.symbol.clone()));
            }
            let f = self.mint(hint.unwrap_or("main"));
            let ty = SType::from_type(&tree.ty);
            self.sys.symbols.insert(f.clone(), ty.clone());
            self.sys.add_rule(Rule::new(STerm::fun(f.clone()), r));
            self.record(s, &tree.ty, f.clone(), ty);
            return Ok(STerm::fun(f));
        }
        Ok(r)
    }

    /// Makes `t` admissible, then translates it.
    pub fn add(&mut self, t: &Term, expected: Option<&Type>, hint: Option<&str>) -> Result<(Term, STerm), TranslateError> {
        let s = to_admissible(t);
        let r = self.add_admissible(&s, expected, hint)?;
        Ok((s, r))
    }

    /// The system with the library rules and readable rule variables.
    pub fn finish(&self) -> Sttrs {
        let mut sys = self.sys.clone();
        let taken: BTreeSet<String> = sys
            .symbols
            .keys()
            .cloned()
            .chain(RESERVED.iter().map(|s| s.to_string()))
            .collect();
        sys.rules = sys
            .rules
            .iter()
            .map(|r| readable(r, &taken, &sys))
            .collect();
        sys.install_library();
        sys
    }
}

/// Renames the variables of `r` after their source names.
fn readable(r: &Rule, taken: &BTreeSet<String>, sys: &Sttrs) -> Rule {
    let mut sigma: BTreeMap<Name, STerm> = BTreeMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for x in r.lhs.vars().into_iter().chain(r.rhs.vars()) {
        if sigma.contains_key(&x) {
            continue;
        }
        let mut base: String = base_name(&x).chars().filter(|c| c.is_alphanumeric() || *c == '_' || *c == '\'').collect();
        if !base.starts_with(|c: char| c.is_alphabetic() || c == '_') {
            base = format!("x{base}");
        }
        let ok = |n: &str| !used.contains(n) && !taken.contains(n) && !sys.is_constructor(n);
        let name = if ok(&base) {
            base
        } else {
            (1..).map(|n| format!("{base}{n}")).find(|n| ok(n)).expect("unbounded")
        };
        used.insert(name.clone());
        sigma.insert(x, STerm::var(name));
    }
    Rule::new(r.lhs.substitute(&sigma), r.rhs.substitute(&sigma))
}

/// Algorithm 1: the partial rules, finished rules and symbol table of an
/// admissible term.
pub fn translate(reg: &Registry, s: &Term) -> Result<(Vec<Partial>, Sttrs, Vec<SymbolEntry>), TranslateError> {
    let tree = infer(reg, s, &BTreeMap::new(), None).map_err(|e| TranslateError::Type { subterm: e.subterm, msg: e.msg })?;
    let mut session = Session::new(reg);
    let c = session.translate(s, &tree, None)?;
    Ok((c, session.sys, session.table))
}

/// Algorithm 2.
pub fn translate_admissible(reg: &Registry, s: &Term) -> Result<Translation, TranslateError> {
    let mut session = Session::new(reg);
    let entry = session.add_admissible(s, None, None)?;
    Ok(Translation { sttrs: session.finish(), table: session.table, entry, source: s.clone() })
}

/// Algorithm 3: any closed well-typed term.
pub fn translate_entry(reg: &Registry, t: &Term) -> Result<Translation, TranslateError> {
    translate_admissible(reg, &to_admissible(t))
}

/// Translates every definition of `file` under its own name, then `main`
/// when `with_main` is set.
pub fn translate_file(file: &SourceFile, with_main: bool) -> Result<Translation, TranslateError> {
    let mut session = Session::new(&file.registry);
    let mut last = None;
    for d in &file.definitions {
        last = Some(session.add(&d.term, d.ty.as_ref(), Some(&d.name))?);
    }
    if with_main {
        if let Some(m) = &file.main {
            last = Some(session.add(m, None, Some("main"))?);
        }
    }
    let (source, entry) = last.ok_or_else(|| TranslateError::NotAdmissible {
        subterm: String::new(),
        reason: "nothing to translate".into(),
    })?;
    Ok(Translation { sttrs: session.finish(), table: session.table, entry, source })
}

/// The STTRS term for `t`: symbols from `table` where available, otherwise
/// structurally.
pub fn interpret(t: &Term, table: &[SymbolEntry]) -> Result<STerm, TranslateError> {
    let key = t.alpha_key();
    if let Some(e) = table.iter().find(|e| e.term.alpha_key() == key) {
        return Ok(STerm::fun(e.symbol.clone()));
    }
    let rec = |x: &Term| interpret(x, table);
    Ok(match t {
        Term::Var(x) => STerm::var(x.clone()),
        Term::Ket0 => STerm::ket(false),
        Term::Ket1 => STerm::ket(true),
        Term::Cons(c, args) => STerm::cons(c.clone(), args.iter().map(rec).collect::<Result<_, _>>()?),
        Term::Sum(items, _) => STerm::Sum(
            items
                .iter()
                .map(|(a, x)| Ok((a.clone(), rec(x)?)))
                .collect::<Result<_, TranslateError>>()?,
        ),
        Term::App(f, a) => STerm::app(rec(f)?, vec![rec(a)?]),
        Term::Shape(b) => STerm::app(STerm::fun(SHAPE), vec![rec(b)?]),
        Term::Unit(b) => STerm::app(STerm::fun(UNIT), vec![rec(b)?]),
        _ => return Err(TranslateError::Interpret { subterm: pretty(t) }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::sttrs::{parse_trs, print_trs, rewrite_star, well_formed};

    fn program_rules(t: &Translation) -> Vec<String> {
        t.sttrs.program_rules().map(|r| r.to_string()).collect()
    }

    fn defs(name: &str) -> Translation {
        let f = corpus::load(name);
        translate_file(&f, false).unwrap()
    }

    #[test]
    fn hadamard_rules() {
        let t = defs("hadamard");
        assert_eq!(
            program_rules(&t),
            [
                "had(|0>) -> (1/sqrt2)*|0> + (1/sqrt2)*|1>",
                "had(|1>) -> (1/sqrt2)*|0> + (-1/sqrt2)*|1>"
            ]
        );
        assert_eq!(t.entry.to_string(), "unit(had)");
        well_formed(&t.sttrs).unwrap();
    }

    #[test]
    fn ackermann_rules() {
        let t = defs("ackermann");
        assert_eq!(
            program_rules(&t),
            ["ack(0, n) -> S(n)", "ack(S(m'), 0) -> ack(m', 1)", "ack(S(m'), S(n')) -> ack(m', ack(S(m'), n'))"]
        );
        well_formed(&t.sttrs).unwrap();
    }

    #[test]
    fn len_and_map_rules() {
        let t = defs("len");
        assert_eq!(program_rules(&t), ["len([]) -> 0", "len(h :: t) -> S(len(t))"]);
        well_formed(&t.sttrs).unwrap();
        let t = defs("map");
        let rules = program_rules(&t);
        assert_eq!(rules[2..], ["map(phi, []) -> []", "map(phi, h :: t) -> phi(h) :: map(phi, t)"]);
        well_formed(&t.sttrs).unwrap();
    }

    #[test]
    fn main_gets_a_symbol() {
        let f = corpus::load("len");
        let t = translate_file(&f, true).unwrap();
        let run = rewrite_star(&t.sttrs, &t.entry, 100).unwrap();
        assert_eq!(run.term.as_nat(), Some(3));
        assert!(program_rules(&t).contains(&"main -> len([b0, b1, b1])".to_string()));
    }

    #[test]
    fn whole_corpus_translates_and_round_trips() {
        for p in corpus::PROGRAMS {
            let f = corpus::load(p.name);
            let t = translate_file(&f, true).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            well_formed(&t.sttrs).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let text = print_trs(&t.sttrs);
            assert_eq!(parse_trs(&text).unwrap(), t.sttrs, "{}", p.name);
        }
    }

    #[test]
    fn keygen_runs() {
        let f = corpus::load("keygen");
        let t = translate_file(&f, true).unwrap();
        let run = rewrite_star(&t.sttrs, &t.entry, 1000).unwrap();
        let expected = crate::sttrs::parse_sterm("[|0>, |1>, |+>, |->]", &t.sttrs).unwrap();
        assert_eq!(run.term, crate::sttrs::normalize(&expected));
    }

    #[test]
    fn interpretation() {
        let t = defs("hadamard");
        let had = &corpus::load("hadamard").definitions[0].term;
        let s = to_admissible(had);
        let m = t.interpret(&Term::app(s, Term::Ket0)).unwrap();
        assert_eq!(m.to_string(), "had(|0>)");
        assert!(t.interpret(&Term::lam("x", Term::var("x"))).is_err());
    }

    #[test]
    fn symbol_table_json() {
        let t = defs("hadamard");
        let j = t.symbols_json();
        assert_eq!(j[0]["symbol"], "had");
        assert_eq!(j[0]["type"], "Qbit -> Qbit");
    }
}
