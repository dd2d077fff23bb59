use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hyrql::analysis::{compare_runtime, lpo_terminates, qi_verify, Precedence, PrecedenceMode, QiVerdict, QuasiInterp};
use hyrql::ast::Term;
use hyrql::corpus;
use hyrql::eval::{self, Status};
use hyrql::parser::{self, pretty, SourceFile};
use hyrql::sttrs::{parse_trs, print_trs, well_formed, Sttrs};
use hyrql::translate::translate_file;
use hyrql::typecheck::{check_file, CheckBudget};

#[derive(Parser)]
#[command(name = "hyrql", version, about = "Hybrid quantum programs: evaluation, typing and translation to rewrite systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Evaluation and rewriting step limit.
    #[arg(long, global = true, default_value_t = 10_000)]
    fuel: usize,
    /// Fuel for each orthogonality or unitarity query.
    #[arg(long, global = true, default_value_t = 1_000)]
    budget: usize,
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and pretty-print a program.
    Parse { file: PathBuf },
    /// Type-check every definition and `main`.
    Check { file: PathBuf },
    /// Evaluate `main`.
    Run { file: PathBuf },
    /// Translate to a rewrite system.
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the symbol table.
        #[arg(long)]
        symbols: Option<PathBuf>,
        /// Translate `main` as well as the definitions.
        #[arg(long)]
        with_main: bool,
    },
    /// Termination or size analysis of a `.trs` file or a program.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Precedence such as `f>g>h`; searched when absent.
        #[arg(long)]
        prec: Option<String>,
        /// Quasi-interpretation in JSON.
        #[arg(long)]
        interp: Option<PathBuf>,
    },
    /// Run a definition on both engines and compare step counts.
    Compare {
        file: PathBuf,
        #[arg(long, default_value = "")]
        args: String,
        /// Definition to run; the last one by default.
        #[arg(long)]
        def: Option<String>,
    },
    /// Run the bundled programs end to end.
    Corpus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Lpo,
    Qi,
}

enum Failure {
    Domain(String),
    Usage(String),
}

type Res = Result<(), Failure>;

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    if path.exists() {
        return fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    match corpus::get(stem) {
        Some(p) => Ok(p.source.to_string()),
        None => Err(Failure::Usage(format!("{}: no such file or bundled program", path.display()))),
    }
}

fn load(path: &Path) -> Result<SourceFile, Failure> {
    parser::parse(&read(path)?).map_err(|e| Failure::Domain(format!("{}:{e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Parse { file } => cmd_parse(&cli, file),
        Cmd::Check { file } => cmd_check(&cli, file),
        Cmd::Run { file } => cmd_run(&cli, file),
        Cmd::Translate { file, output, symbols, with_main } => {
            cmd_translate(&cli, file, output.as_deref(), symbols.as_deref(), *with_main)
        }
        Cmd::Analyze { file, method, prec, interp } => cmd_analyze(&cli, file, *method, prec.as_deref(), interp.as_deref()),
        Cmd::Compare { file, args, def } => cmd_compare(&cli, file, args, def.as_deref()),
        Cmd::Corpus => cmd_corpus(&cli),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

fn budget(cli: &Cli) -> CheckBudget {
    CheckBudget { fuel: cli.budget, ..CheckBudget::default() }
}

fn cmd_parse(cli: &Cli, path: &Path) -> Res {
    let f = load(path)?;
    if cli.json {
        let defs: Vec<_> = f
            .definitions
            .iter()
            .map(|d| json!({"name": d.name, "type": d.ty.as_ref().map(|t| t.to_string()), "term": pretty(&d.term)}))
            .collect();
        println!("{}", json!({"definitions": defs, "main": f.main.as_ref().map(pretty)}));
        return Ok(());
    }
    for d in &f.definitions {
        match &d.ty {
            Some(t) => println!("let {} : {t} = {};", d.name, pretty(&d.term)),
            None => println!("let {} = {};", d.name, pretty(&d.term)),
        }
    }
    if let Some(m) = &f.main {
        println!("main {}", pretty(m));
    }
    Ok(())
}

fn cmd_check(cli: &Cli, path: &Path) -> Res {
    let f = load(path)?;
    let reports = check_file(&f, &budget(cli));
    let failed = reports.iter().filter(|r| r.result.is_err()).count();
    if cli.json {
        let items: Vec<_> = reports
            .iter()
            .map(|r| match &r.result {
                Ok(t) => json!({"name": r.name, "ok": true, "type": t.ty.to_string(), "assumptions": t.assumptions}),
                Err(e) => json!({"name": r.name, "ok": false, "error": e}),
            })
            .collect();
        println!("{}", json!(items));
    } else {
        for r in &reports {
            match &r.result {
                Ok(t) => {
                    println!("{} : {}", r.name, t.ty);
                    for a in &t.assumptions {
                        println!("  assumed: {a}");
                    }
                    if cli.trace {
                        println!("  rules: {}", t.derivation.rules().join(" "));
                    }
                }
                Err(e) => println!("{} : error: {e}", r.name),
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Domain(format!("{failed} item(s) failed to type-check")));
    }
    Ok(())
}

fn cmd_run(cli: &Cli, path: &Path) -> Res {
    let f = load(path)?;
    let m = f.main.as_ref().ok_or_else(|| Failure::Domain("the program has no `main`".into()))?;
    let (trace, v) = if cli.trace { eval::reduce(m, cli.fuel) } else { eval::run(m, cli.fuel) };
    if cli.json {
        let mut o = json!({"steps": trace.steps, "status": trace.status, "value": pretty(&v)});
        if cli.trace {
            o["trace"] = trace.to_json();
        }
        println!("{o}");
    } else {
        if cli.trace {
            println!("0. {}", pretty(m));
            for e in &trace.entries {
                println!("{}. [{}] {}", e.step, e.rule, pretty(&e.term));
            }
        }
        println!("{}", pretty(&v));
        println!("({} steps)", trace.steps);
    }
    match trace.status {
        Status::Value => Ok(()),
        Status::Stuck => Err(Failure::Domain(format!("stuck after {} steps", trace.steps))),
        Status::FuelExhausted => Err(Failure::Domain(format!("fuel exhausted after {} steps", cli.fuel))),
    }
}

fn write(path: &Path, text: &str) -> Res {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_translate(cli: &Cli, path: &Path, output: Option<&Path>, symbols: Option<&Path>, with_main: bool) -> Res {
    let f = load(path)?;
    let t = translate_file(&f, with_main).map_err(domain)?;
    well_formed(&t.sttrs).map_err(domain)?;
    let text = print_trs(&t.sttrs);
    let table = t.symbols_json();
    if let Some(o) = output {
        write(o, &text)?;
    }
    if let Some(s) = symbols {
        write(s, &serde_json::to_string_pretty(&table).expect("json"))?;
    }
    let n = t.sttrs.program_rules().count();
    if cli.json {
        println!("{}", json!({"rules": n, "entry": t.entry.to_string(), "trs": text, "symbols": table}));
    } else if output.is_none() {
        print!("{text}");
    } else {
        println!("{n} rules, entry {}", t.entry);
    }
    Ok(())
}

fn system(path: &Path) -> Result<Sttrs, Failure> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "trs") {
        let s = parse_trs(&text).map_err(|e| Failure::Domain(format!("{}:{e}", path.display())))?;
        well_formed(&s).map_err(domain)?;
        return Ok(s);
    }
    let f = parser::parse(&text).map_err(|e| Failure::Domain(format!("{}:{e}", path.display())))?;
    Ok(translate_file(&f, false).map_err(domain)?.sttrs)
}

fn cmd_analyze(cli: &Cli, path: &Path, method: Method, prec: Option<&str>, interp: Option<&Path>) -> Res {
    let sys = system(path)?;
    match method {
        Method::Lpo => {
            let mode = match prec {
                Some(p) => PrecedenceMode::Given(Precedence::parse(p).map_err(Failure::Usage)?),
                None => PrecedenceMode::Search,
            };
            match lpo_terminates(&sys, &mode) {
                Ok(p) => {
                    if cli.json {
                        println!("{}", json!({"result": "proof", "proof": p}));
                    } else {
                        let prec = p.precedence.to_string();
                        if prec.is_empty() {
                            println!("Proof (empty precedence)");
                        } else {
                            println!("Proof (precedence {prec})");
                        }
                        for o in &p.rules {
                            println!("  {}", o.rule);
                            if cli.trace {
                                println!("    {}", serde_json::to_string(&o.why).expect("json"));
                            }
                        }
                    }
                    Ok(())
                }
                Err(e) => {
                    if cli.json {
                        println!("{}", json!({"result": "fail", "fail": e}));
                    } else {
                        println!("Fail at `{}`: {}", e.rule, e.reason);
                    }
                    Err(Failure::Domain("no LPO proof".into()))
                }
            }
        }
        Method::Qi => {
            let ip = interp.ok_or_else(|| Failure::Usage("--method qi needs --interp FILE".into()))?;
            let text = fs::read_to_string(ip).map_err(|e| Failure::Usage(format!("{}: {e}", ip.display())))?;
            let q = QuasiInterp::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", ip.display())))?;
            let v = qi_verify(&sys, &q);
            if cli.json {
                println!("{}", json!(v));
            } else {
                println!("{v}");
            }
            match v {
                QiVerdict::Verified => Ok(()),
                _ => Err(Failure::Domain("quasi-interpretation not verified".into())),
            }
        }
    }
}

fn cmd_compare(cli: &Cli, path: &Path, args: &str, def: Option<&str>) -> Res {
    let f = load(path)?;
    let d = match def {
        Some(n) => f.definition(n).ok_or_else(|| Failure::Usage(format!("no definition `{n}`")))?,
        None => f.definitions.last().ok_or_else(|| Failure::Usage("the program has no definitions".into()))?,
    };
    let args = f.parse_args(args).map_err(|e| Failure::Usage(format!("--args: {e}")))?;
    let c = compare_runtime(&f.registry, &d.term, &args, cli.fuel).map_err(domain)?;
    if cli.json {
        println!("{}", json!(c));
    } else {
        println!("definition   {}", d.name);
        println!("k_hyrql      {} ({:?})", c.k_hyrql, c.hyrql_status);
        println!("k_sttrs      {} ({:?})", c.k_sttrs, c.sttrs_status);
        println!("|s|          {}", c.size);
        println!("bound_ok     {}", c.bound_ok);
        println!("values_agree {}", c.values_agree);
        println!("hyrql value  {}", c.hyrql_value);
        println!("sttrs value  {}", c.sttrs_value);
    }
    if c.ok() {
        Ok(())
    } else {
        Err(Failure::Domain("comparison failed".into()))
    }
}

struct Row {
    name: &'static str,
    cells: Vec<(&'static str, bool)>,
}

fn corpus_row(name: &'static str, fuel: usize, budget: &CheckBudget) -> Row {
    let f = corpus::load(name);
    let typed = check_file(&f, budget).iter().all(|r| r.result.is_ok());
    let main: Option<&Term> = f.main.as_ref();
    let ran = main.is_some_and(|m| eval::run(m, fuel).0.status == Status::Value);
    let tr = translate_file(&f, true);
    let wf = tr.as_ref().is_ok_and(|t| well_formed(&t.sttrs).is_ok());
    let agree = main.is_some_and(|m| compare_runtime(&f.registry, m, &[], fuel).is_ok_and(|c| c.values_agree));
    Row { name, cells: vec![("check", typed), ("run", ran), ("translate", wf), ("agree", agree)] }
}

fn cmd_corpus(cli: &Cli) -> Res {
    let names = ["hadamard", "qs", "len", "keygen", "ackermann", "map"];
    let rows: Vec<Row> = names.iter().map(|n| corpus_row(n, cli.fuel, &budget(cli))).collect();
    let all = rows.iter().all(|r| r.cells.iter().all(|c| c.1));
    if cli.json {
        let v: Vec<_> = rows
            .iter()
            .map(|r| {
                let mut o = json!({"program": r.name});
                for (k, ok) in &r.cells {
                    o[*k] = json!(ok);
                }
                o
            })
            .collect();
        println!("{}", json!(v));
    } else {
        println!("{:<10} {:<6} {:<6} {:<10} {:<6}", "program", "check", "run", "translate", "agree");
        for r in &rows {
            let c: Vec<&str> = r.cells.iter().map(|c| if c.1 { "pass" } else { "FAIL" }).collect();
            println!("{:<10} {:<6} {:<6} {:<10} {:<6}", r.name, c[0], c[1], c[2], c[3]);
        }
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Domain("some corpus programs failed".into()))
    }
}
