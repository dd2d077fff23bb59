//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use common::*;
use hyrql::analysis::{compare_runtime, lpo_terminates, qi_verify, verify_proof, PrecedenceMode, QiVerdict, QuasiInterp};
use hyrql::ast::Term;
use hyrql::canonical::equiv;
use hyrql::corpus;
use hyrql::eval::{self, Status};
use hyrql::parser::{parse_type, pretty};
use hyrql::sttrs::well_formed;
use hyrql::translate::translate_file;
use hyrql::typecheck::{check_closed, check_file, orthogonal, Verdict};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn hadamard() -> Outcome {
    let start = Instant::now();
    let (tr, v) = eval::run(&term("had |0>"), 100);
    ensure(tr.status == Status::Value && tr.steps == 3, format!("had |0> took {} steps", tr.steps))?;
    ensure(equiv(&v, &term("|+>")), format!("had |0> gave {}", pretty(&v)))?;
    let (tr2, w) = eval::run(&term("had |+>"), 100);
    ensure(tr2.status == Status::Value, "had |+> did not finish")?;
    ensure(w.alpha_eq(&Term::Ket0), format!("had |+> gave {}", pretty(&w)))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), format!("took {took:?}"))?;
    Ok(format!("3 steps to |+>, {} steps back to |0>, {took:?}", tr2.steps))
}

fn shape() -> Outcome {
    let (tr, v) = eval::run(&term("shape [|0>, |1>, |+>]"), 1000);
    ensure(tr.status == Status::Value, "shape did not finish")?;
    let want = term("() :: () :: () :: []");
    ensure(v.alpha_eq(&want), format!("got {}", pretty(&v)))?;
    Ok(format!("{} in {} steps", pretty(&v), tr.steps))
}

fn typing() -> Outcome {
    let reg = &lib().registry;
    let ty = |s: &str| parse_type(s, reg).unwrap();
    let accepts = |t: &str, s: &str| check_closed(reg, &term(t), Some(&ty(s)), &budget()).is_ok();
    ensure(accepts("had", "Qbit <-> Qbit"), "had rejected")?;
    for b in ["bit", "nat", "(bit, nat)", "[bit]", "()"] {
        ensure(accepts("len", &format!("[{b}] => nat")), format!("len rejected at [{b}]"))?;
    }
    ensure(!accepts("len", "[Qbit] => nat"), "len accepted at [Qbit]")?;

    let kg = corpus::load("keygen");
    let keygen = &kg.definition("keygen").unwrap().term;
    let at = |t: &Term, s: &str| check_closed(&kg.registry, t, Some(&parse_type(s, &kg.registry).unwrap()), &budget()).is_ok();
    ensure(at(keygen, "[(bit, bit)] => [Qbit]"), "keygen rejected")?;
    let flat = at(keygen, "[bit] => [Qbit]");

    ensure(
        accepts("qs", "(Qbit <-> Qbit) => (Qbit <-> Qbit) => (Qbit, Qbit) -o (Qbit, Qbit)"),
        "qs rejected",
    )?;

    let remark = corpus::load("remark");
    let reports = check_file(&remark, &budget());
    let reduct = reports.iter().find(|r| r.name == "reduct").ok_or("no reduct")?;
    ensure(reduct.result.is_err(), "reduct accepted")?;
    Ok(format!(
        "had, len, keygen at [(bit, bit)] => [Qbit], qs accepted; [bit] => [Qbit] {}; reduct rejected",
        if flat { "accepted" } else { "rejected" }
    ))
}

fn goldens() -> Outcome {
    let mut out = Vec::new();
    for (file, sym, n) in [("hadamard", "had", 2), ("ackermann", "ack", 3), ("map", "map", 2), ("len", "len", 2)] {
        let t = translate_file(&corpus::load(file), false).map_err(|e| format!("{file}: {e}"))?;
        well_formed(&t.sttrs).map_err(|e| format!("{file}: {e}"))?;
        let k = t.sttrs.rules_for(sym).count();
        ensure(k == n, format!("{sym}: {k} rules"))?;
        out.push(format!("{sym} {k}"));
    }
    Ok(out.join(", "))
}

fn bits(n: usize) -> Vec<Vec<Term>> {
    (0..1usize << n)
        .map(|m| (0..n).map(|i| Term::Cons(if m >> i & 1 == 1 { "b1" } else { "b0" }.into(), vec![])).collect())
        .collect()
}

fn runtime() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<(&str, &str, Vec<Term>)> = Vec::new();
    let kets = ["|0>", "|1>", "|+>", "|->"];
    for k in kets {
        cases.push(("hadamard", "had", vec![term(k)]));
        cases.push(("qs", "not", vec![term(k)]));
    }
    let qs = corpus::load("qs");
    for a in kets {
        for b in kets {
            let args = qs.parse_args(&format!("had not ({a}, {b})")).unwrap();
            cases.push(("qs", "qs", args));
        }
    }
    let map = corpus::load("map");
    for n in 0..=5 {
        for l in bits(n) {
            cases.push(("len", "len", vec![Term::list(l.clone())]));
            let ks = l.iter().map(|b| if pretty(b) == "b1" { Term::Ket1 } else { Term::Ket0 }).collect();
            cases.push(("map", "map", vec![map.parse_term("had").unwrap(), Term::list(ks)]));
        }
    }
    for n in 0..=2 {
        for l in bits(2 * n) {
            let pairs = l.chunks(2).map(|p| Term::pair(p[0].clone(), p[1].clone())).collect();
            cases.push(("keygen", "keygen", vec![Term::list(pairs)]));
        }
    }
    for m in 0..=2 {
        for n in 0..=3 {
            cases.push(("ackermann", "ack", vec![Term::nat(m), Term::nat(n)]));
        }
    }
    let total = cases.len();
    for (file, name, args) in cases {
        let f = corpus::load(file);
        let def = &f.definition(name).unwrap().term;
        let c = compare_runtime(&f.registry, def, &args, 100_000).map_err(|e| format!("{name}: {e}"))?;
        let shown: Vec<_> = args.iter().map(pretty).collect();
        ensure(c.values_agree, format!("{name} {}: {} vs {}", shown.join(" "), c.sttrs_value, c.hyrql_value))?;
        ensure(c.bound_ok, format!("{name} {}: {} > {} * {}", shown.join(" "), c.k_hyrql, c.k_sttrs, c.size))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), format!("took {took:?}"))?;
    Ok(format!("{total}/{total} agree within the bound, {took:?}"))
}

fn termination() -> Outcome {
    for file in ["ackermann", "len"] {
        let t = translate_file(&corpus::load(file), false).map_err(|e| e.to_string())?;
        let p = lpo_terminates(&t.sttrs, &PrecedenceMode::Search).map_err(|e| format!("{file}: {}", e.reason))?;
        verify_proof(&t.sttrs, &p).map_err(|e| format!("{file}: {e}"))?;
    }
    let len = translate_file(&corpus::load("len"), false).map_err(|e| e.to_string())?;
    let q = QuasiInterp::from_json(
        r#"{"0": {"constant": 0}, "S": {"constant": 1, "coefficients": [1]},
            "[]": {"constant": 0}, "::": {"constant": 1, "coefficients": [1, 1]},
            "len": {"constant": 0, "coefficients": [1]}}"#,
    )
    .map_err(|e| e.to_string())?;
    ensure(qi_verify(&len.sttrs, &q) == QiVerdict::Verified, "len assignment not verified")?;
    let bad = QuasiInterp::from_json(r#"{"len": {"constant": 2, "coefficients": [0]}}"#).map_err(|e| e.to_string())?;
    let perturbed = q.clone().with("len", bad.0["len"].clone());
    let v = qi_verify(&len.sttrs, &perturbed);
    ensure(matches!(v, QiVerdict::CounterRule { .. }), format!("perturbed assignment: {v}"))?;
    Ok(format!("LPO proves ack and len; len interpretation verified; perturbed one: {v}"))
}

fn run_property<S: Strategy>(name: &str, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| format!("{name}: {e}"))
}

fn properties() -> Outcome {
    let start = Instant::now();
    run_property("idempotence", superposition(), |t| canonical_idempotent(&t))?;
    run_property("uniqueness", (superposition(), 0usize..8, amp()), |(t, r, a)| canonical_unique(&t, r, &a))?;
    run_property("quantity", (pure_term(), pure_term(), superposition()), |(p, q, t)| quantity_laws(&p, &q, &t))?;
    run_property("confluence", (program(), choices()), |(t, c)| confluent(&t, &c))?;
    run_property("subject reduction", program(), |t| subject_reduction(&t))?;
    run_property("unit vectors", gate_chain(), |t| {
        let (_, v) = eval::run(&t, 1000);
        unit_norm(&v)?;
        plus_minus_orthogonal()
    })?;
    run_property("linearity", (0usize..6, proptest::collection::vec(nonzero_amp(), 4)), |(i, amps)| {
        let fs = linear_functions();
        let (f, basis) = &fs[i];
        linear(f, basis, &amps[..basis.len()])
    })?;
    run_property("weakening", (0usize..7, proptest::collection::vec(classical_type(), 1..3)), |(i, extra)| {
        weakening(i, &extra)
    })?;
    Ok(format!("8 suites x 1000 cases, {:?}", start.elapsed()))
}

fn unannotated() -> Outcome {
    let e = env(&[("n", parse_type("nat", &lib().registry).unwrap())]);
    match orthogonal(&lib().registry, &term("(|0>, n)"), &term("(|1>, n)"), &e, &budget()) {
        Verdict::Unknown(u) => Ok(format!("Unknown: {u}")),
        v => Err(format!("got {v:?}")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("hadamard evaluation", hadamard),
        ("shape of a ket list", shape),
        ("typing suite", typing),
        ("translation goldens", goldens),
        ("runtime comparison", runtime),
        ("termination proofs", termination),
        ("property suites", properties),
        ("unannotated orthogonality", unannotated),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
