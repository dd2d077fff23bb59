//! Simply-typed term rewrite systems with superpositions.
//!
//! Terms are first order: a head applied to a list of arguments. A
//! function symbol may appear with fewer arguments than its arity, which
//! makes it a value, and with more, in which case the surplus arguments are
//! kept after the rule fires.

pub mod rewrite;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::ast::{cons, Name, Registry, Type};
use crate::Amplitude;

pub use rewrite::{normalize, rewrite_star, rewrite_step, RewriteError, RewriteStatus, Rewriter, Run, Step};
pub use text::{parse_sterm, parse_trs, print_trs, TrsError};

/// The reserved symbol `unit : ((Q -> Q') x Q) -> Q'`.
pub const UNIT: &str = "unit";
/// The reserved symbol `shape : B -> B~`.
pub const SHAPE: &str = "shape";
pub const KET0: &str = "|0>";
pub const KET1: &str = "|1>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum STerm {
    Var(Name),
    Fun(String),
    Con(String),
    /// A head applied to at least one argument; the head is never itself
    /// an application.
    App(Box<STerm>, Vec<STerm>),
    Sum(Vec<(Amplitude, STerm)>),
}

impl STerm {
    pub fn var(x: impl Into<Name>) -> STerm {
        STerm::Var(x.into())
    }

    pub fn fun(f: impl Into<String>) -> STerm {
        STerm::Fun(f.into())
    }

    pub fn con(c: impl Into<String>) -> STerm {
        STerm::Con(c.into())
    }

    pub fn ket(one: bool) -> STerm {
        STerm::Con(if one { KET1 } else { KET0 }.into())
    }

    /// `head(args)`, merging nested applications and dropping empty ones.
    pub fn app(head: STerm, args: Vec<STerm>) -> STerm {
        if args.is_empty() {
            return head;
        }
        match head {
            STerm::App(h, mut a) => {
                a.extend(args);
                STerm::App(h, a)
            }
            h => STerm::App(Box::new(h), args),
        }
    }

    pub fn cons(c: impl Into<String>, args: Vec<STerm>) -> STerm {
        STerm::app(STerm::Con(c.into()), args)
    }

    pub fn nat(n: usize) -> STerm {
        let mut t = STerm::con(cons::ZERO);
        for _ in 0..n {
            t = STerm::cons(cons::SUCC, vec![t]);
        }
        t
    }

    pub fn as_nat(&self) -> Option<usize> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                STerm::Con(c) if c == cons::ZERO => return Some(n),
                STerm::App(h, a) if **h == STerm::con(cons::SUCC) && a.len() == 1 => {
                    n += 1;
                    cur = &a[0];
                }
                _ => return None,
            }
        }
    }

    pub fn as_list(&self) -> Option<Vec<&STerm>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                STerm::Con(c) if c == cons::NIL => return Some(out),
                STerm::App(h, a) if **h == STerm::con(cons::CONS) && a.len() == 2 => {
                    out.push(&a[0]);
                    cur = &a[1];
                }
                _ => return None,
            }
        }
    }

    /// The head and arguments, with a bare head having none.
    pub fn spine(&self) -> (&STerm, &[STerm]) {
        match self {
            STerm::App(h, a) => (h, a),
            _ => (self, &[]),
        }
    }

    pub fn head_symbol(&self) -> Option<&str> {
        match self.spine().0 {
            STerm::Fun(f) => Some(f),
            _ => None,
        }
    }

    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            STerm::Var(x) => out.push(x.clone()),
            STerm::Fun(_) | STerm::Con(_) => {}
            STerm::App(h, a) => {
                h.collect_vars(out);
                for t in a {
                    t.collect_vars(out);
                }
            }
            STerm::Sum(items) => {
                for (_, t) in items {
                    t.collect_vars(out);
                }
            }
        }
    }

    pub fn var_set(&self) -> BTreeSet<Name> {
        self.vars().into_iter().collect()
    }

    pub fn substitute(&self, sigma: &BTreeMap<Name, STerm>) -> STerm {
        match self {
            STerm::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            STerm::Fun(_) | STerm::Con(_) => self.clone(),
            STerm::App(h, a) => STerm::app(
                h.substitute(sigma),
                a.iter().map(|t| t.substitute(sigma)).collect(),
            ),
            STerm::Sum(items) => STerm::Sum(
                items
                    .iter()
                    .map(|(a, t)| (a.clone(), t.substitute(sigma)))
                    .collect(),
            ),
        }
    }

    /// Replaces every occurrence of the function symbol `f` by `by`.
    pub fn replace_fun(&self, f: &str, by: &STerm) -> STerm {
        match self {
            STerm::Fun(g) if g == f => by.clone(),
            STerm::Var(_) | STerm::Fun(_) | STerm::Con(_) => self.clone(),
            STerm::App(h, a) => STerm::app(
                h.replace_fun(f, by),
                a.iter().map(|t| t.replace_fun(f, by)).collect(),
            ),
            STerm::Sum(items) => STerm::Sum(
                items
                    .iter()
                    .map(|(a, t)| (a.clone(), t.replace_fun(f, by)))
                    .collect(),
            ),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            STerm::Var(_) | STerm::Fun(_) | STerm::Con(_) => 1,
            STerm::App(h, a) => h.size() + a.iter().map(STerm::size).sum::<usize>(),
            STerm::Sum(items) => 1 + items.iter().map(|(_, t)| t.size()).sum::<usize>(),
        }
    }

    pub fn is_sum_free(&self) -> bool {
        match self {
            STerm::Sum(_) => false,
            STerm::App(h, a) => h.is_sum_free() && a.iter().all(STerm::is_sum_free),
            _ => true,
        }
    }

    /// Function symbols occurring anywhere in the term.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            STerm::Fun(f) => {
                out.insert(f.clone());
            }
            STerm::App(h, a) => {
                h.collect_symbols(out);
                for t in a {
                    t.collect_symbols(out);
                }
            }
            STerm::Sum(items) => {
                for (_, t) in items {
                    t.collect_symbols(out);
                }
            }
            _ => {}
        }
    }
}

/// STTRS types: data types and uncurried arrows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SType {
    Data(Type),
    Arrow(Vec<SType>, Box<SType>),
}

impl SType {
    /// `⟦T⟧`: data types map to themselves and every Hyrql arrow to `->`.
    pub fn from_type(t: &Type) -> SType {
        match t {
            Type::Arrow(_, a, b) => SType::Arrow(vec![SType::from_type(a)], Box::new(SType::from_type(b))),
            _ => SType::Data(t.clone()),
        }
    }

    /// The type of a symbol taking `arity` arguments of a value of type `t`.
    pub fn of_symbol(t: &Type, arity: usize) -> Option<SType> {
        if arity == 0 {
            return Some(SType::from_type(t));
        }
        let (args, res) = t.uncurry(arity)?;
        Some(SType::Arrow(
            args.iter().map(SType::from_type).collect(),
            Box::new(SType::from_type(&res)),
        ))
    }

    /// One-argument-at-a-time form, used to compare types.
    pub fn curried(&self) -> SType {
        match self {
            SType::Data(_) => self.clone(),
            SType::Arrow(args, res) => {
                let mut acc = res.curried();
                for a in args.iter().rev() {
                    acc = SType::Arrow(vec![a.curried()], Box::new(acc));
                }
                acc
            }
        }
    }

    pub fn same(&self, other: &SType) -> bool {
        self.curried() == other.curried()
    }

    /// Number of uncurried arguments.
    pub fn arity(&self) -> usize {
        match self {
            SType::Data(_) => 0,
            SType::Arrow(a, _) => a.len(),
        }
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::Data(t) => write!(f, "{t}"),
            SType::Arrow(args, res) => {
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" x ")?;
                    }
                    match a {
                        SType::Arrow(..) => write!(f, "({a})")?,
                        _ => write!(f, "{a}")?,
                    }
                }
                write!(f, " -> {res}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub lhs: STerm,
    pub rhs: STerm,
}

impl Rule {
    pub fn new(lhs: STerm, rhs: STerm) -> Rule {
        Rule { lhs, rhs }
    }

    pub fn symbol(&self) -> Option<&str> {
        self.lhs.head_symbol()
    }

    pub fn arity(&self) -> usize {
        self.lhs.spine().1.len()
    }

    /// Rules for the reserved `unit` and `shape` symbols.
    pub fn is_library(&self) -> bool {
        matches!(self.symbol(), Some(UNIT) | Some(SHAPE))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Rule families whose left-hand side is a superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Schema {
    /// `shape(a*|0> + b*|1>) -> ()`
    ShapeQubitSum,
    /// `shape(a*x + ...) -> shape(x)` for superpositions of values with a
    /// common shape; the first component in canonical order is kept.
    ShapeSum,
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::ShapeQubitSum => f.write_str("shape(a*|0> + b*|1>) -> ()"),
            Schema::ShapeSum => f.write_str("shape(a*x + ...) -> shape(x)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sttrs {
    pub registry: Registry,
    pub symbols: BTreeMap<String, SType>,
    pub rules: Vec<Rule>,
    pub schemas: Vec<Schema>,
}

impl PartialEq for Sttrs {
    fn eq(&self, other: &Self) -> bool {
        let decls = |r: &Registry| r.user_decls().cloned().collect::<Vec<_>>();
        self.symbols == other.symbols
            && self.rules == other.rules
            && self.schemas == other.schemas
            && decls(&self.registry) == decls(&other.registry)
    }
}

impl Sttrs {
    pub fn new(registry: Registry) -> Sttrs {
        Sttrs {
            registry,
            symbols: BTreeMap::new(),
            rules: Vec::new(),
            schemas: Vec::new(),
        }
    }

    /// Number of arguments the rules for `f` consume.
    pub fn arity(&self, f: &str) -> Option<usize> {
        match f {
            UNIT => return Some(2),
            SHAPE => return Some(1),
            _ => {}
        }
        self.rules
            .iter()
            .find(|r| r.symbol() == Some(f))
            .map(Rule::arity)
            .or_else(|| self.symbols.get(f).map(SType::arity))
    }

    pub fn rules_for<'a>(&'a self, f: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| r.symbol() == Some(f))
    }

    /// Rules other than the `unit`/`shape` library.
    pub fn program_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| !r.is_library())
    }

    /// Symbols defined by program rules, in order of first definition.
    pub fn defined_symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.program_rules() {
            if let Some(f) = r.symbol() {
                if !out.iter().any(|g| g == f) {
                    out.push(f.to_string());
                }
            }
        }
        out
    }

    pub fn is_constructor(&self, c: &str) -> bool {
        c == KET0 || c == KET1 || self.registry.is_constructor(c)
    }

    pub fn add_rule(&mut self, r: Rule) {
        if !self.rules.contains(&r) {
            self.rules.push(r);
        }
    }

    /// Adds the rules, symbols and schemas of `other`.
    pub fn union(&mut self, other: &Sttrs) {
        for (f, t) in &other.symbols {
            self.symbols.entry(f.clone()).or_insert_with(|| t.clone());
        }
        for r in &other.rules {
            self.add_rule(r.clone());
        }
        for s in &other.schemas {
            if !self.schemas.contains(s) {
                self.schemas.push(*s);
            }
        }
    }

    /// The `unit` and `shape` rules, for every registered constructor.
    pub fn install_library(&mut self) {
        self.add_rule(Rule::new(
            STerm::app(STerm::fun(UNIT), vec![STerm::var("x"), STerm::var("y")]),
            STerm::app(STerm::var("x"), vec![STerm::var("y")]),
        ));
        let shape = |t: STerm| STerm::app(STerm::fun(SHAPE), vec![t]);
        for k in [false, true] {
            self.add_rule(Rule::new(shape(STerm::ket(k)), STerm::con(cons::UNIT)));
        }
        let mut constructors: Vec<(String, usize)> = self
            .registry
            .constructors()
            .map(|c| (c.name.clone(), c.arity))
            .collect();
        constructors.sort_by_key(|(c, _)| shadow_rank(c));
        for (c, n) in constructors {
            let xs: Vec<STerm> = (1..=n).map(|i| STerm::var(format!("x{i}"))).collect();
            let rhs = STerm::cons(
                crate::ast::shadow_constructor(&c),
                xs.iter().map(|x| shape(x.clone())).collect(),
            );
            self.add_rule(Rule::new(shape(STerm::cons(c, xs)), rhs));
        }
        for s in [Schema::ShapeQubitSum, Schema::ShapeSum] {
            if !self.schemas.contains(&s) {
                self.schemas.push(s);
            }
        }
    }
}

fn shadow_rank(c: &str) -> (bool, String) {
    (c.ends_with('~'), c.to_string())
}

/// A reason a rule set is not a simply-typed term rewrite system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
    pub msg: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.other {
            Some(o) => write!(f, "rules `{}` and `{o}`: {}", self.rule, self.msg),
            None => write!(f, "rule `{}`: {}", self.rule, self.msg),
        }
    }
}

impl std::error::Error for Violation {}

fn violation(r: &Rule, msg: impl Into<String>) -> Violation {
    Violation {
        rule: r.to_string(),
        other: None,
        msg: msg.into(),
    }
}

/// Checks rule shape, left-linearity, variable inclusion, arities, typing
/// and the absence of overlaps.
pub fn well_formed(sys: &Sttrs) -> Result<(), Violation> {
    let mut arities: BTreeMap<&str, (usize, &Rule)> = BTreeMap::new();
    for r in &sys.rules {
        let (head, args) = r.lhs.spine();
        let STerm::Fun(f) = head else {
            return Err(violation(r, "left-hand side is not headed by a function symbol"));
        };
        if sys.is_constructor(f) {
            return Err(violation(r, format!("`{f}` is a constructor")));
        }
        for p in args {
            if !is_pattern(sys, p) {
                return Err(violation(r, format!("argument `{p}` is not a pattern")));
            }
        }
        let lv = r.lhs.vars();
        let ls: BTreeSet<_> = lv.iter().cloned().collect();
        if ls.len() != lv.len() {
            return Err(violation(r, "left-hand side is not linear"));
        }
        if let Some(x) = r.rhs.var_set().difference(&ls).next() {
            return Err(violation(r, format!("variable `{x}` is not bound by the left-hand side")));
        }
        for x in &ls {
            if sys.symbols.contains_key(x) || sys.is_constructor(x) || x == UNIT || x == SHAPE {
                return Err(violation(r, format!("variable `{x}` clashes with a symbol")));
            }
        }
        match arities.get(f.as_str()) {
            Some((n, other)) if *n != args.len() => {
                return Err(Violation {
                    rule: r.to_string(),
                    other: Some(other.to_string()),
                    msg: format!("`{f}` is used with arities {n} and {}", args.len()),
                })
            }
            None => {
                arities.insert(f, (args.len(), r));
            }
            _ => {}
        }
        if !r.is_library() {
            let Some(ty) = sys.symbols.get(f) else {
                return Err(violation(r, format!("symbol `{f}` is not declared")));
            };
            if ty.arity() != args.len() {
                return Err(violation(
                    r,
                    format!("`{f} : {ty}` is defined with {} arguments", args.len()),
                ));
            }
            typecheck_rule(sys, r, ty).map_err(|m| violation(r, m))?;
        }
    }
    for (i, a) in sys.rules.iter().enumerate() {
        for b in &sys.rules[i + 1..] {
            if a.symbol() == b.symbol() && unifiable_args(a.lhs.spine().1, b.lhs.spine().1) {
                return Err(Violation {
                    rule: a.to_string(),
                    other: Some(b.to_string()),
                    msg: "left-hand sides overlap".into(),
                });
            }
        }
    }
    Ok(())
}

fn is_pattern(sys: &Sttrs, p: &STerm) -> bool {
    match p {
        STerm::Var(_) => true,
        STerm::Con(c) => sys.is_constructor(c),
        STerm::App(h, a) => {
            matches!(&**h, STerm::Con(c) if sys.is_constructor(c)) && a.iter().all(|q| is_pattern(sys, q))
        }
        _ => false,
    }
}

fn unifiable(p: &STerm, q: &STerm) -> bool {
    match (p, q) {
        (STerm::Var(_), _) | (_, STerm::Var(_)) => true,
        (STerm::Con(a), STerm::Con(b)) => a == b,
        (STerm::App(h1, a1), STerm::App(h2, a2)) => h1 == h2 && unifiable_args(a1, a2),
        _ => false,
    }
}

fn unifiable_args(a: &[STerm], b: &[STerm]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| unifiable(p, q))
}

type Env = BTreeMap<Name, SType>;

fn typecheck_rule(sys: &Sttrs, r: &Rule, ty: &SType) -> Result<(), String> {
    let (_, args) = r.lhs.spine();
    let (arg_tys, res) = match ty {
        SType::Data(_) => (vec![], ty.clone()),
        SType::Arrow(a, b) => (a.clone(), (**b).clone()),
    };
    let mut env = Env::new();
    for (p, t) in args.iter().zip(&arg_tys) {
        bind_pattern(sys, p, t, &mut env)?;
    }
    let got = synth(sys, &r.rhs, Some(&res), &env)?;
    if !got.same(&res) {
        return Err(format!("right-hand side has type `{got}`, expected `{res}`"));
    }
    Ok(())
}

fn bind_pattern(sys: &Sttrs, p: &STerm, t: &SType, env: &mut Env) -> Result<(), String> {
    match p {
        STerm::Var(x) => {
            env.insert(x.clone(), t.clone());
            Ok(())
        }
        _ => {
            let SType::Data(d) = t else {
                return Err(format!("pattern `{p}` at function type `{t}`"));
            };
            let (head, args) = p.spine();
            let STerm::Con(c) = head else { unreachable!() };
            let arg_tys = con_args(sys, c, d).ok_or_else(|| format!("`{c}` does not build `{d}`"))?;
            if arg_tys.len() != args.len() {
                return Err(format!("`{c}` applied to {} arguments", args.len()));
            }
            for (q, a) in args.iter().zip(arg_tys) {
                bind_pattern(sys, q, &SType::Data(a), env)?;
            }
            Ok(())
        }
    }
}

fn con_args(sys: &Sttrs, c: &str, d: &Type) -> Option<Vec<Type>> {
    if c == KET0 || c == KET1 {
        return (*d == Type::Qbit).then(Vec::new);
    }
    sys.registry.cons_args(c, d)
}

/// Type of `t`, using `expected` where constructors alone do not determine it.
fn synth(sys: &Sttrs, t: &STerm, expected: Option<&SType>, env: &Env) -> Result<SType, String> {
    let check = |got: SType| match expected {
        Some(e) if !got.same(e) => Err(format!("`{t}` has type `{got}`, expected `{e}`")),
        _ => Ok(got),
    };
    match t {
        STerm::Var(x) => check(env.get(x).cloned().ok_or_else(|| format!("unbound `{x}`"))?),
        STerm::Fun(f) => match f.as_str() {
            UNIT | SHAPE => Err(format!("`{f}` must be applied")),
            _ => check(sys.symbols.get(f).cloned().ok_or_else(|| format!("undeclared `{f}`"))?),
        },
        STerm::Con(_) | STerm::App(..) if is_con_term(t) => {
            let (head, args) = t.spine();
            let STerm::Con(c) = head else { unreachable!() };
            let data = match expected {
                Some(SType::Data(d)) => d.clone(),
                Some(e) => return Err(format!("constructor term `{t}` expected at `{e}`")),
                None => guess_data(sys, c, args, env)?,
            };
            let arg_tys = con_args(sys, c, &data).ok_or_else(|| format!("`{c}` does not build `{data}`"))?;
            if arg_tys.len() != args.len() {
                return Err(format!("`{c}` applied to {} arguments", args.len()));
            }
            for (a, at) in args.iter().zip(arg_tys) {
                synth(sys, a, Some(&SType::Data(at)), env)?;
            }
            Ok(SType::Data(data))
        }
        STerm::App(head, args) => {
            let mut cur = match &**head {
                STerm::Fun(f) if f == SHAPE => {
                    let SType::Data(d) = synth(sys, &args[0], None, env)? else {
                        return Err("shape of a function".into());
                    };
                    let s = sys.registry.shape_type(&d).ok_or("shape of a function")?;
                    if args.len() > 1 {
                        return Err("shape applied to more than one argument".into());
                    }
                    return check(SType::Data(s));
                }
                STerm::Fun(f) if f == UNIT => {
                    let ft = synth(sys, &args[0], None, env)?;
                    let rest = STerm::app(STerm::var("\u{25c7}"), args[1..].to_vec());
                    let mut env2 = env.clone();
                    env2.insert("\u{25c7}".into(), ft);
                    return synth(sys, &rest, expected, &env2);
                }
                h => synth(sys, h, None, env)?.curried(),
            };
            for a in args {
                let SType::Arrow(dom, res) = cur else {
                    return Err(format!("`{t}` applies a value of data type"));
                };
                synth(sys, a, Some(&dom[0]), env)?;
                cur = *res;
            }
            check(cur)
        }
        STerm::Sum(items) => {
            let mut ty = expected.cloned();
            for (_, s) in items {
                let got = synth(sys, s, ty.as_ref(), env)?;
                ty.get_or_insert(got);
            }
            ty.ok_or_else(|| "empty superposition".into())
        }
        STerm::Con(_) => unreachable!(),
    }
}

fn is_con_term(t: &STerm) -> bool {
    matches!(t.spine().0, STerm::Con(_))
}

fn guess_data(sys: &Sttrs, c: &str, args: &[STerm], env: &Env) -> Result<Type, String> {
    if c == KET0 || c == KET1 {
        return Ok(Type::Qbit);
    }
    let info = sys.registry.constructor(c).ok_or_else(|| format!("unknown constructor `{c}`"))?;
    let data = |t: SType| match t {
        SType::Data(d) => Ok(d),
        other => Err(format!("constructor argument of type `{other}`")),
    };
    match &info.family {
        crate::ast::Family::Unit => Ok(Type::Unit),
        crate::ast::Family::Named(n) => Ok(Type::Named(n.clone())),
        crate::ast::Family::List if c == cons::CONS => {
            Ok(Type::list(data(synth(sys, &args[0], None, env)?)?))
        }
        crate::ast::Family::List => Err("cannot infer the element type of `[]`".into()),
        crate::ast::Family::Tensor => Ok(Type::tensor(
            data(synth(sys, &args[0], None, env)?)?,
            data(synth(sys, &args[1], None, env)?)?,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn had() -> Sttrs {
        parse_trs(
            "sym had : Qbit -> Qbit;\n\
             had(|0>) -> (1/sqrt2)*|0> + (1/sqrt2)*|1>;\n\
             had(|1>) -> (1/sqrt2)*|0> + (-1/sqrt2)*|1>;\n",
        )
        .unwrap()
    }

    #[test]
    fn hadamard_is_well_formed() {
        well_formed(&had()).unwrap();
    }

    #[test]
    fn ackermann_is_well_formed() {
        let s = parse_trs(
            "sym ack : nat x nat -> nat;\n\
             ack(0, n) -> S(n);\n\
             ack(S(m), 0) -> ack(m, 1);\n\
             ack(S(m), S(n)) -> ack(m, ack(S(m), n));\n",
        )
        .unwrap();
        well_formed(&s).unwrap();
    }

    #[test]
    fn overlap_is_rejected() {
        let s = parse_trs("sym f : nat -> nat;\nf(x) -> x;\nf(0) -> 0;\n").unwrap();
        let v = well_formed(&s).unwrap_err();
        assert!(v.other.is_some(), "{v}");
    }

    #[test]
    fn other_violations() {
        for src in [
            "sym f : nat -> nat;\nf(x) -> y;\n",
            "sym f : nat x nat -> nat;\nf(x, x) -> x;\n",
            "sym f : nat -> nat;\nf(x) -> |0>;\n",
            "sym f : nat -> nat;\nf(x) -> x;\nf(x, y) -> x;\n",
            "f(x) -> x;\n",
        ] {
            let s = parse_trs(src).unwrap();
            assert!(well_formed(&s).is_err(), "{src}");
        }
    }

    #[test]
    fn library_is_well_formed() {
        let mut s = had();
        s.install_library();
        well_formed(&s).unwrap();
    }

    #[test]
    fn currying_in_types() {
        let a = SType::Arrow(vec![SType::Data(Type::Qbit), SType::Data(Type::nat())], Box::new(SType::Data(Type::Qbit)));
        let b = SType::Arrow(
            vec![SType::Data(Type::Qbit)],
            Box::new(SType::Arrow(vec![SType::Data(Type::nat())], Box::new(SType::Data(Type::Qbit)))),
        );
        assert!(a.same(&b));
        assert_eq!(a.to_string(), "Qbit x nat -> Qbit");
    }
}
