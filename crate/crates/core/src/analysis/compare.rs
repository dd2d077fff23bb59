//! Step counts of a source program against its translation.

use serde::Serialize;

use crate::ast::{Registry, Term};
use crate::eval::{self, Status};
use crate::parser::pretty;
use crate::sttrs::{normalize, RewriteStatus, Rewriter, STerm, UNIT};
use crate::translate::{interpret, Session, TranslateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineStatus {
    Value,
    Stuck,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub k_sttrs: usize,
    pub k_hyrql: usize,
    /// Size of the source term.
    pub size: usize,
    pub bound_ok: bool,
    pub values_agree: bool,
    pub sttrs_status: EngineStatus,
    pub hyrql_status: EngineStatus,
    pub sttrs_value: String,
    pub hyrql_value: String,
}

impl Comparison {
    pub fn ok(&self) -> bool {
        self.bound_ok && self.values_agree
    }
}

/// Runs `source args..` on both engines. Data arguments are interpreted
/// structurally; functional ones are translated alongside `source`.
pub fn compare_runtime(reg: &Registry, source: &Term, args: &[Term], fuel: usize) -> Result<Comparison, TranslateError> {
    let (trace, hv) = eval::run(&Term::apps(source.clone(), args.iter().cloned()), fuel);
    let hyrql_status = match trace.status {
        Status::Value => EngineStatus::Value,
        Status::Stuck => EngineStatus::Stuck,
        Status::FuelExhausted => EngineStatus::FuelExhausted,
    };

    let mut session = Session::new(reg);
    let (_, mut head) = session.add(source, None, None)?;
    // unit(f) applied to arguments is f applied to them
    if let STerm::App(h, inner) = &head {
        if matches!(&**h, STerm::Fun(u) if u == UNIT) && inner.len() == 1 {
            head = inner[0].clone();
        }
    }
    let mut sargs = Vec::with_capacity(args.len());
    for a in args {
        let s = match interpret(a, session.table()) {
            Ok(s) => s,
            Err(_) => session.add(a, None, None)?.1,
        };
        sargs.push(s);
    }
    let sys = session.finish();
    let rw = Rewriter::new(&sys);
    let (k_sttrs, sv, sttrs_status) = match rw.run(&STerm::app(head, sargs), fuel, false) {
        Ok(r) => {
            let st = match r.status {
                RewriteStatus::Value => EngineStatus::Value,
                RewriteStatus::FuelExhausted => EngineStatus::FuelExhausted,
            };
            (r.steps, Some(normalize(&r.term)), st)
        }
        Err(_) => (0, None, EngineStatus::Stuck),
    };

    let expected = if hyrql_status == EngineStatus::Value { interpret(&hv, &[]).ok().map(|t| normalize(&t)) } else { None };
    let values_agree = sttrs_status == EngineStatus::Value && expected.is_some() && expected == sv;
    let size = source.size();
    Ok(Comparison {
        k_sttrs,
        k_hyrql: trace.steps,
        size,
        bound_ok: sttrs_status == EngineStatus::Value && trace.steps <= k_sttrs * size,
        values_agree,
        sttrs_status,
        hyrql_status,
        sttrs_value: sv.map(|t| t.to_string()).unwrap_or_default(),
        hyrql_value: pretty(&hv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn def(file: &str, name: &str) -> (Registry, Term) {
        let f = corpus::load(file);
        (f.registry.clone(), f.definition(name).unwrap().term.clone())
    }

    fn ack(m: usize, n: usize) -> usize {
        match (m, n) {
            (0, n) => n + 1,
            (m, 0) => ack(m - 1, 1),
            (m, n) => ack(m - 1, ack(m, n - 1)),
        }
    }

    #[test]
    fn hadamard_counts() {
        let (reg, had) = def("hadamard", "had");
        let c = compare_runtime(&reg, &had, &[Term::Ket0], 100).unwrap();
        assert_eq!((c.k_sttrs, c.k_hyrql), (1, 3));
        assert!(c.size >= 3 && c.ok(), "{c:?}");
    }

    #[test]
    fn len_of_three() {
        let (reg, len) = def("len", "len");
        let l = Term::list(vec![Term::Cons("b0".into(), vec![]); 3]);
        let c = compare_runtime(&reg, &len, &[l], 1000).unwrap();
        assert!(c.ok(), "{c:?}");
        assert_eq!(c.sttrs_value, "3");
    }

    #[test]
    fn ackermann_small() {
        let (reg, a) = def("ackermann", "ack");
        for m in 0..=2 {
            for n in 0..=3 {
                let c = compare_runtime(&reg, &a, &[Term::nat(m), Term::nat(n)], 100_000).unwrap();
                assert!(c.ok(), "ack({m},{n}): {c:?}");
                assert_eq!(c.sttrs_value, ack(m, n).to_string());
            }
        }
    }

    #[test]
    fn functional_argument() {
        let f = corpus::load("map");
        let map = f.definition("map").unwrap().term.clone();
        let had = f.definition("had").unwrap().term.clone();
        let l = Term::list(vec![Term::Ket0, Term::Ket1]);
        let c = compare_runtime(&f.registry, &map, &[had, l], 1000).unwrap();
        assert!(c.ok(), "{c:?}");
    }

    #[test]
    fn fuel_is_reported_per_engine() {
        let (reg, a) = def("ackermann", "ack");
        let c = compare_runtime(&reg, &a, &[Term::nat(2), Term::nat(3)], 5).unwrap();
        assert_eq!(c.sttrs_status, EngineStatus::FuelExhausted);
        assert_eq!(c.hyrql_status, EngineStatus::FuelExhausted);
        assert!(!c.ok());
    }
}
