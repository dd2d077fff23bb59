//! Type reconstruction by unification.
//!
//! Terms carry no type annotations, so before the linear rules can be
//! checked every node receives a type. Arrow kinds are inferred too; an
//! arrow whose kind stays open becomes `=>` when its domain is classical and
//! `-o` otherwise. Type variables that stay open become `()`.

use std::collections::BTreeMap;

use crate::ast::{cons, ArrowKind, Family, Name, Registry, Term, Type};
use crate::parser::pretty;

/// The type of every node, laid out like [`Term::children`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TyTree {
    pub ty: Type,
    pub kids: Vec<TyTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferError {
    pub subterm: String,
    pub msg: String,
}

#[derive(Debug, Clone)]
enum It {
    Meta(usize),
    Qbit,
    Unit,
    Named(String),
    List(Box<It>),
    Tensor(Box<It>, Box<It>),
    Arrow(usize, Box<It>, Box<It>),
}

struct ITree {
    ty: It,
    kids: Vec<ITree>,
}

struct Infer<'r> {
    reg: &'r Registry,
    metas: Vec<Option<It>>,
    kind_parent: Vec<usize>,
    kind_val: Vec<Option<ArrowKind>>,
    shapes: Vec<(It, It, String)>,
}

type IResult<T> = Result<T, InferError>;

/// Infers a type for `t` under `env`, unifying the result with `expected`.
pub fn infer(
    reg: &Registry,
    t: &Term,
    env: &BTreeMap<Name, Type>,
    expected: Option<&Type>,
) -> Result<TyTree, InferError> {
    let mut inf = Infer {
        reg,
        metas: Vec::new(),
        kind_parent: Vec::new(),
        kind_val: Vec::new(),
        shapes: Vec::new(),
    };
    let mut scope: Vec<(Name, It)> = env
        .iter()
        .map(|(x, ty)| (x.clone(), inf.import_type(ty)))
        .collect();
    let tree = inf.node(t, &mut scope)?;
    if let Some(e) = expected {
        let e = inf.import_type(e);
        inf.unify(&tree.ty, &e, t)?;
    }
    inf.solve_shapes(false)?;
    for m in 0..inf.metas.len() {
        if inf.metas[m].is_none() {
            inf.metas[m] = Some(It::Unit);
        }
    }
    inf.solve_shapes(true)?;
    inf.default_kinds(&tree);
    Ok(inf.resolve_tree(&tree))
}

impl<'r> Infer<'r> {
    fn fresh(&mut self) -> It {
        self.metas.push(None);
        It::Meta(self.metas.len() - 1)
    }

    fn fresh_kind(&mut self, k: Option<ArrowKind>) -> usize {
        let i = self.kind_parent.len();
        self.kind_parent.push(i);
        self.kind_val.push(k);
        i
    }

    fn kind_root(&mut self, mut k: usize) -> usize {
        while self.kind_parent[k] != k {
            let p = self.kind_parent[k];
            self.kind_parent[k] = self.kind_parent[p];
            k = p;
        }
        k
    }

    fn import_type(&mut self, t: &Type) -> It {
        match t {
            Type::Qbit => It::Qbit,
            Type::Unit => It::Unit,
            Type::Named(n) => It::Named(n.clone()),
            Type::List(a) => It::List(Box::new(self.import_type(a))),
            Type::Tensor(a, b) => It::Tensor(Box::new(self.import_type(a)), Box::new(self.import_type(b))),
            Type::Arrow(k, a, b) => {
                let k = self.fresh_kind(Some(*k));
                It::Arrow(k, Box::new(self.import_type(a)), Box::new(self.import_type(b)))
            }
        }
    }

    fn prune(&self, t: &It) -> It {
        let mut cur = t.clone();
        while let It::Meta(m) = cur {
            match &self.metas[m] {
                Some(next) => cur = next.clone(),
                None => return cur,
            }
        }
        cur
    }

    fn occurs(&self, m: usize, t: &It) -> bool {
        match self.prune(t) {
            It::Meta(n) => n == m,
            It::List(a) => self.occurs(m, &a),
            It::Tensor(a, b) | It::Arrow(_, a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            _ => false,
        }
    }

    fn show(&self, t: &It) -> String {
        match self.prune(t) {
            It::Meta(m) => format!("?{m}"),
            It::Qbit => "Qbit".into(),
            It::Unit => "()".into(),
            It::Named(n) => n,
            It::List(a) => format!("[{}]", self.show(&a)),
            It::Tensor(a, b) => format!("({}, {})", self.show(&a), self.show(&b)),
            It::Arrow(_, a, b) => format!("({} -> {})", self.show(&a), self.show(&b)),
        }
    }

    fn mismatch<T>(&self, a: &It, b: &It, at: &Term) -> IResult<T> {
        Err(InferError {
            subterm: pretty(at),
            msg: format!("cannot match `{}` with `{}`", self.show(a), self.show(b)),
        })
    }

    fn unify(&mut self, a: &It, b: &It, at: &Term) -> IResult<()> {
        let (a, b) = (self.prune(a), self.prune(b));
        match (&a, &b) {
            (It::Meta(m), It::Meta(n)) if m == n => Ok(()),
            (It::Meta(m), other) | (other, It::Meta(m)) => {
                if self.occurs(*m, other) {
                    return Err(InferError {
                        subterm: pretty(at),
                        msg: "recursive type".into(),
                    });
                }
                self.metas[*m] = Some(other.clone());
                Ok(())
            }
            (It::Qbit, It::Qbit) | (It::Unit, It::Unit) => Ok(()),
            (It::Named(x), It::Named(y)) if x == y => Ok(()),
            (It::List(x), It::List(y)) => self.unify(x, y, at),
            (It::Tensor(x1, x2), It::Tensor(y1, y2)) => {
                self.unify(x1, y1, at)?;
                self.unify(x2, y2, at)
            }
            (It::Arrow(k1, x1, x2), It::Arrow(k2, y1, y2)) => {
                self.unify_kind(*k1, *k2, at)?;
                self.unify(x1, y1, at)?;
                self.unify(x2, y2, at)
            }
            _ => self.mismatch(&a, &b, at),
        }
    }

    fn unify_kind(&mut self, k1: usize, k2: usize, at: &Term) -> IResult<()> {
        let (r1, r2) = (self.kind_root(k1), self.kind_root(k2));
        if r1 == r2 {
            return Ok(());
        }
        let v = match (self.kind_val[r1], self.kind_val[r2]) {
            (Some(a), Some(b)) if a != b => {
                return Err(InferError {
                    subterm: pretty(at),
                    msg: format!("arrow kinds `{}` and `{}` differ", a.symbol(), b.symbol()),
                })
            }
            (a, b) => a.or(b),
        };
        self.kind_parent[r1] = r2;
        self.kind_val[r2] = v;
        Ok(())
    }

    fn cons_sig(&mut self, c: &str, at: &Term) -> IResult<(Vec<It>, It)> {
        let Some(info) = self.reg.constructor(c) else {
            return Err(InferError {
                subterm: pretty(at),
                msg: format!("unknown constructor `{c}`"),
            });
        };
        Ok(match &info.family {
            Family::Unit => (vec![], It::Unit),
            Family::List => {
                let a = self.fresh();
                let l = It::List(Box::new(a.clone()));
                if c == cons::NIL {
                    (vec![], l)
                } else {
                    (vec![a, l.clone()], l)
                }
            }
            Family::Tensor => {
                let a = self.fresh();
                let b = self.fresh();
                (
                    vec![a.clone(), b.clone()],
                    It::Tensor(Box::new(a), Box::new(b)),
                )
            }
            Family::Named(n) => {
                let n = n.clone();
                let args = self
                    .reg
                    .cons_args(c, &Type::Named(n.clone()))
                    .unwrap_or_default();
                let args = args.iter().map(|a| self.import_type(a)).collect();
                (args, It::Named(n))
            }
        })
    }

    fn lookup(&self, scope: &[(Name, It)], x: &str, at: &Term) -> IResult<It> {
        scope
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| InferError {
                subterm: pretty(at),
                msg: format!("unbound variable `{}`", crate::ast::base_name(x)),
            })
    }

    fn node(&mut self, t: &Term, scope: &mut Vec<(Name, It)>) -> IResult<ITree> {
        let leaf = |ty| ITree { ty, kids: vec![] };
        match t {
            Term::Var(x) => Ok(leaf(self.lookup(scope, x, t)?)),
            Term::Ket0 | Term::Ket1 => Ok(leaf(It::Qbit)),
            Term::QCase { scrut, zero, one, .. } => {
                let s = self.node(scrut, scope)?;
                self.unify(&s.ty, &It::Qbit, scrut)?;
                let z = self.node(zero, scope)?;
                let o = self.node(one, scope)?;
                self.unify(&z.ty, &o.ty, t)?;
                Ok(ITree {
                    ty: z.ty.clone(),
                    kids: vec![s, z, o],
                })
            }
            Term::Cons(c, args) => {
                let (sig, res) = self.cons_sig(c, t)?;
                if sig.len() != args.len() {
                    return Err(InferError {
                        subterm: pretty(t),
                        msg: format!("constructor `{c}` expects {} arguments", sig.len()),
                    });
                }
                let mut kids = Vec::new();
                for (a, s) in args.iter().zip(&sig) {
                    let k = self.node(a, scope)?;
                    self.unify(&k.ty, s, a)?;
                    kids.push(k);
                }
                Ok(ITree { ty: res, kids })
            }
            Term::Match(s, branches) => {
                let st = self.node(s, scope)?;
                let res = self.fresh();
                let mut kids = vec![st];
                for b in branches {
                    let (sig, bty) = self.cons_sig(&b.cons, t)?;
                    if sig.len() != b.vars.len() {
                        return Err(InferError {
                            subterm: pretty(t),
                            msg: format!("pattern `{}` has the wrong arity", b.cons),
                        });
                    }
                    let sty = kids[0].ty.clone();
                    self.unify(&sty, &bty, s)?;
                    let depth = scope.len();
                    for (v, a) in b.vars.iter().zip(sig) {
                        scope.push((v.clone(), a));
                    }
                    let body = self.node(&b.body, scope);
                    scope.truncate(depth);
                    let body = body?;
                    self.unify(&body.ty, &res, &b.body)?;
                    kids.push(body);
                }
                Ok(ITree { ty: res, kids })
            }
            Term::Lambda(x, body) => {
                let a = self.fresh();
                scope.push((x.clone(), a.clone()));
                let b = self.node(body, scope);
                scope.pop();
                let b = b?;
                let k = self.fresh_kind(None);
                Ok(ITree {
                    ty: It::Arrow(k, Box::new(a), Box::new(b.ty.clone())),
                    kids: vec![b],
                })
            }
            Term::LetRec(f, x, body) => {
                let a = self.fresh();
                let r = self.fresh();
                let k = self.fresh_kind(None);
                let fty = It::Arrow(k, Box::new(a.clone()), Box::new(r.clone()));
                scope.push((f.clone(), fty.clone()));
                scope.push((x.clone(), a));
                let b = self.node(body, scope);
                scope.pop();
                scope.pop();
                let b = b?;
                self.unify(&b.ty, &r, body)?;
                Ok(ITree {
                    ty: fty,
                    kids: vec![b],
                })
            }
            Term::Unit(inner) => {
                let i = self.node(inner, scope)?;
                let a = self.fresh();
                let r = self.fresh();
                let k = self.fresh_kind(Some(ArrowKind::Linear));
                let lin = It::Arrow(k, Box::new(a.clone()), Box::new(r.clone()));
                self.unify(&i.ty, &lin, inner)?;
                let u = self.fresh_kind(Some(ArrowKind::Unitary));
                Ok(ITree {
                    ty: It::Arrow(u, Box::new(a), Box::new(r)),
                    kids: vec![i],
                })
            }
            Term::App(f, a) => {
                let ft = self.node(f, scope)?;
                let at = self.node(a, scope)?;
                let r = self.fresh();
                let k = self.fresh_kind(None);
                let want = It::Arrow(k, Box::new(at.ty.clone()), Box::new(r.clone()));
                self.unify(&ft.ty, &want, t)?;
                Ok(ITree {
                    ty: r,
                    kids: vec![ft, at],
                })
            }
            Term::Sum(items, _) => {
                let res = self.fresh();
                let mut kids = Vec::new();
                for (_, s) in items {
                    let k = self.node(s, scope)?;
                    self.unify(&k.ty, &res, s)?;
                    kids.push(k);
                }
                Ok(ITree { ty: res, kids })
            }
            Term::Shape(inner) => {
                let i = self.node(inner, scope)?;
                let r = self.fresh();
                self.shapes.push((i.ty.clone(), r.clone(), pretty(t)));
                Ok(ITree {
                    ty: r,
                    kids: vec![i],
                })
            }
        }
    }

    fn solve_shapes(&mut self, final_pass: bool) -> IResult<()> {
        loop {
            let pending = std::mem::take(&mut self.shapes);
            if pending.is_empty() {
                return Ok(());
            }
            let before = pending.len();
            let mut progressed = false;
            for (src, dst, at) in pending {
                let here = Term::var(at.clone());
                match self.prune(&src) {
                    It::Meta(_) => self.shapes.push((src, dst, at)),
                    It::Qbit | It::Unit => {
                        self.unify(&dst, &It::Unit, &here)?;
                        progressed = true;
                    }
                    It::Named(n) => {
                        let s = if n.ends_with('~') { n } else { format!("{n}~") };
                        self.unify(&dst, &It::Named(s), &here)?;
                        progressed = true;
                    }
                    It::List(a) => {
                        let b = self.fresh();
                        self.unify(&dst, &It::List(Box::new(b.clone())), &here)?;
                        self.shapes.push((*a, b, at));
                        progressed = true;
                    }
                    It::Tensor(a, b) => {
                        let (x, y) = (self.fresh(), self.fresh());
                        self.unify(&dst, &It::Tensor(Box::new(x.clone()), Box::new(y.clone())), &here)?;
                        self.shapes.push((*a, x, at.clone()));
                        self.shapes.push((*b, y, at));
                        progressed = true;
                    }
                    It::Arrow(..) => {
                        return Err(InferError {
                            subterm: at,
                            msg: "shape of a function".into(),
                        })
                    }
                }
            }
            if !progressed && self.shapes.len() == before {
                if final_pass {
                    // remaining metas were defaulted, so nothing can be pending
                    return Ok(());
                }
                return Ok(());
            }
            if final_pass {
                for m in 0..self.metas.len() {
                    if self.metas[m].is_none() {
                        self.metas[m] = Some(It::Unit);
                    }
                }
            }
        }
    }

    fn default_kinds(&mut self, t: &ITree) {
        for k in &t.kids {
            self.default_kinds(k);
        }
        self.default_kinds_in(&t.ty.clone());
    }

    fn default_kinds_in(&mut self, t: &It) {
        match self.prune(t) {
            It::List(a) => self.default_kinds_in(&a),
            It::Tensor(a, b) => {
                self.default_kinds_in(&a);
                self.default_kinds_in(&b);
            }
            It::Arrow(k, a, b) => {
                self.default_kinds_in(&a);
                self.default_kinds_in(&b);
                let r = self.kind_root(k);
                if self.kind_val[r].is_none() {
                    let dom = self.resolve(&a);
                    self.kind_val[r] = Some(if self.reg.is_classical(&dom) {
                        ArrowKind::Classical
                    } else {
                        ArrowKind::Linear
                    });
                }
            }
            _ => {}
        }
    }

    fn resolve(&mut self, t: &It) -> Type {
        match self.prune(t) {
            It::Meta(_) => Type::Unit,
            It::Qbit => Type::Qbit,
            It::Unit => Type::Unit,
            It::Named(n) => Type::Named(n),
            It::List(a) => Type::list(self.resolve(&a)),
            It::Tensor(a, b) => Type::tensor(self.resolve(&a), self.resolve(&b)),
            It::Arrow(k, a, b) => {
                let r = self.kind_root(k);
                let dom = self.resolve(&a);
                let kind = self.kind_val[r].unwrap_or(if self.reg.is_classical(&dom) {
                    ArrowKind::Classical
                } else {
                    ArrowKind::Linear
                });
                Type::arrow(kind, dom, self.resolve(&b))
            }
        }
    }

    fn resolve_tree(&mut self, t: &ITree) -> TyTree {
        TyTree {
            ty: self.resolve(&t.ty),
            kids: t.kids.iter().map(|k| self.resolve_tree(k)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn ty_of(src: &str) -> Type {
        let reg = Registry::new();
        let t = parse_term(src, &reg).unwrap();
        infer(&reg, &t, &BTreeMap::new(), None).unwrap().ty
    }

    #[test]
    fn hadamard() {
        assert_eq!(
            ty_of("unit (\\x. qcase x { 0 -> (1/sqrt2)*|0> + (1/sqrt2)*|1>, 1 -> (1/sqrt2)*|0> - (1/sqrt2)*|1> })"),
            Type::uni(Type::Qbit, Type::Qbit)
        );
    }

    #[test]
    fn len_defaults_to_unit_elements() {
        assert_eq!(
            ty_of("letrec f x = match x { [] -> 0, h :: t -> S (f t) }"),
            Type::cls(Type::list(Type::Unit), Type::nat())
        );
    }

    #[test]
    fn shape_types() {
        assert_eq!(
            ty_of("\\y. (y, shape y) "),
            Type::cls(Type::Unit, Type::tensor(Type::Unit, Type::Unit))
        );
        assert_eq!(
            ty_of("shape [|0>, |1>]"),
            Type::list(Type::Unit)
        );
        assert_eq!(ty_of("shape 3"), Type::Named("nat~".into()));
    }

    #[test]
    fn mismatch() {
        let reg = Registry::new();
        let t = parse_term("qcase 0 { 0 -> |0>, 1 -> |1> }", &reg).unwrap();
        assert!(infer(&reg, &t, &BTreeMap::new(), None).is_err());
    }
}
