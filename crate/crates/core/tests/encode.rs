// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::{BTreeSet, HashMap};

use bcb_core::boogie::{print_expr, BExpr, BStmt, BType, BinOp, Decl, Procedure, Program, Spec, UnOp, HEAP};
use bcb_core::classfile::{ArithOp, Instruction as I, ValueKind};
use bcb_core::corpus::{self, Asm, Lib};
use bcb_core::lift::{eval_grimp, lift_method, Heap, Value};
use bcb_core::pipeline::Translation;
use bcb_core::spec::Namespace;
use proptest::prelude::*;
use support::criteria::{corpus_translations, translate_plan};
use support::{demangle, rng, static_plan, AggGen};

fn proc_named<'a>(t: &'a Translation, name: &str) -> &'a Procedure {
    t.program
        .procedures()
        .find(|p| demangle(&p.name) == name)
        .unwrap_or_else(|| panic!("no procedure {name}"))
}

fn body_text(p: &Procedure) -> String {
    let d = bcb_core::boogie::print_decl(&Decl::Procedure(p.clone()));
    demangle(&d)
}

fn count(p: &Procedure, pred: &dyn Fn(&BStmt) -> bool) -> usize {
    let mut n = 0;
    for s in &p.body.as_ref().unwrap().stmts {
        s.walk(&mut |s| n += pred(s) as usize);
    }
    n
}

fn asserts(p: &Procedure) -> usize {
    count(p, &|s| matches!(s, BStmt::Assert(_)))
}

fn assumes(p: &Procedure) -> usize {
    count(p, &|s| matches!(s, BStmt::Assume(_)))
}

struct Scope<'a> {
    globals: &'a BTreeSet<String>,
    locals: Vec<String>,
}

impl Scope<'_> {
    fn check_expr(&mut self, e: &BExpr, bad: &mut Vec<String>) {
        match e {
            BExpr::Id(x) | BExpr::App(x, _) if !self.globals.contains(x) && !self.locals.contains(x) => {
                bad.push(x.clone())
            }
            _ => {}
        }
        if let BExpr::Quant { vars, body, .. } = e {
            let n = self.locals.len();
            self.locals.extend(vars.iter().map(|(v, _)| v.clone()));
            self.check_expr(body, bad);
            self.locals.truncate(n);
            return;
        }
        for c in e.children() {
            self.check_expr(c, bad);
        }
    }
}

fn check_types(t: &BType, globals: &BTreeSet<String>, tvars: &[String], bad: &mut Vec<String>) {
    match t {
        BType::Int | BType::Real | BType::Bool => {}
        BType::Named(n, args) => {
            if !globals.contains(n) && !tvars.contains(n) {
                bad.push(n.clone());
            }
            args.iter().for_each(|a| check_types(a, globals, tvars, bad));
        }
        BType::Map { tparams, domain, range } => {
            let tv: Vec<String> = tvars.iter().chain(tparams).cloned().collect();
            domain.iter().chain([&**range]).for_each(|a| check_types(a, globals, &tv, bad));
        }
    }
}

/// Names used but not declared anywhere in scope.
fn unbound(p: &Program) -> Vec<String> {
    let globals: BTreeSet<String> = p.decls.iter().filter_map(|d| d.name().map(String::from)).collect();
    let mut bad = Vec::new();
    for d in &p.decls {
        match d {
            Decl::Function(f) => {
                f.params.iter().for_each(|x| check_types(&x.ty, &globals, &f.tparams, &mut bad));
                let mut sc = Scope {
                    globals: &globals,
                    locals: f.params.iter().map(|x| x.name.clone()).collect(),
                };
                if let Some(b) = &f.body {
                    sc.check_expr(b, &mut bad);
                }
            }
            Decl::Procedure(pr) => {
                let mut sc = Scope {
                    globals: &globals,
                    locals: pr.params.iter().chain(&pr.returns).map(|x| x.name.clone()).collect(),
                };
                for s in &pr.specs {
                    match s {
                        Spec::Requires(e) | Spec::Ensures(e) => sc.check_expr(e, &mut bad),
                        Spec::Modifies(v) => bad.extend(v.iter().filter(|x| !globals.contains(*x)).cloned()),
                    }
                }
                let Some(body) = &pr.body else { continue };
                sc.locals.extend(body.locals.iter().map(|x| x.name.clone()));
                for x in pr.params.iter().chain(&pr.returns).chain(&body.locals) {
                    check_types(&x.ty, &globals, &[], &mut bad);
                }
                let mut labels = BTreeSet::new();
                for s in &body.stmts {
                    s.walk(&mut |s| {
                        if let BStmt::Label(l) = s {
                            labels.insert(l.clone());
                        }
                    });
                }
                for s in &body.stmts {
                    s.walk(&mut |s| match s {
                        BStmt::Assign(x, e) => {
                            if !sc.locals.contains(x) && !globals.contains(x) {
                                bad.push(x.clone());
                            }
                            sc.check_expr(e, &mut bad);
                        }
                        BStmt::Call { outs, proc, args } => {
                            bad.extend(outs.iter().filter(|x| !sc.locals.contains(x)).cloned());
                            if p.procedure(proc).is_none() {
                                bad.push(proc.clone());
                            }
                            args.iter().for_each(|a| sc.check_expr(a, &mut bad));
                        }
                        BStmt::If { cond, .. } => sc.check_expr(cond, &mut bad),
                        BStmt::Assert(e) | BStmt::Assume(e) => sc.check_expr(e, &mut bad),
                        BStmt::Goto(ls) => bad.extend(ls.iter().filter(|l| !labels.contains(*l)).cloned()),
                        BStmt::Label(_) | BStmt::Return => {}
                    });
                }
            }
            Decl::Axiom(e) => Scope {
                globals: &globals,
                locals: vec![],
            }
            .check_expr(e, &mut bad),
            _ => {}
        }
    }
    bad
}

#[test]
fn every_symbol_is_declared() {
    for (class, t) in corpus_translations().unwrap() {
        assert_eq!(unbound(&t.program), Vec::<String>::new(), "{class}");
        let names: Vec<&str> = t.program.decls.iter().filter_map(|d| d.name()).collect();
        let unique: BTreeSet<&&str> = names.iter().collect();
        assert_eq!(unique.len(), names.len(), "{class}: duplicate declarations");
    }
}

#[test]
fn old_appears_only_in_ensures() {
    let has_old = |e: &BExpr| e.any(&|x| matches!(x, BExpr::Old(_)));
    let mut ensures_with_old = 0;
    for (class, t) in corpus_translations().unwrap() {
        for d in &t.program.decls {
            match d {
                Decl::Function(f) => assert!(!f.body.as_ref().is_some_and(has_old), "{class}: {}", f.name),
                Decl::Procedure(p) => {
                    for s in &p.specs {
                        match s {
                            Spec::Requires(e) => assert!(!has_old(e), "{class}: {}", p.name),
                            Spec::Ensures(e) if p.name.contains('#') => ensures_with_old += has_old(e) as usize,
                            Spec::Ensures(_) => {}
                            Spec::Modifies(_) => {}
                        }
                    }
                    let Some(b) = &p.body else { continue };
                    for s in &b.stmts {
                        s.walk(&mut |s| match s {
                            BStmt::Assign(_, e) | BStmt::Assert(e) | BStmt::Assume(e) | BStmt::If { cond: e, .. } => {
                                assert!(!has_old(e), "{class}: {}", p.name)
                            }
                            BStmt::Call { args, .. } => assert!(!args.iter().any(has_old)),
                            _ => {}
                        });
                    }
                }
                _ => {}
            }
        }
    }
    assert_eq!(ensures_with_old, 1);
}

#[test]
fn modifies_clauses_follow_heap_effects() {
    let all = corpus_translations().unwrap();
    let get = |class: &str| &all.iter().find(|(c, _)| c == class).unwrap().1;
    let modifies = |class: &str, name: &str| proc_named(get(class), name).modifies().contains(&HEAP);
    assert!(!modifies("Summary", "summary"));
    assert!(!modifies("GCD", "gcd"));
    assert!(modifies("InsertionSort", "sort"));
    assert!(modifies("Counter", "increment"));
    // allocation writes the heap
    assert!(modifies("Counter", "client"));
    assert!(!modifies("Counter", "$init$"));
    // recursion is assumed frame-free until a write is found
    assert!(!modifies("Fact", "fact"));
    assert!(!modifies("Fact", "caller"));
}

#[test]
fn loop_checks_are_placed_at_entry_backjumps_and_exits() {
    let all = corpus_translations().unwrap();
    let get = |class: &str, name: &str| proc_named(&all.iter().find(|(c, _)| c == class).unwrap().1, name).clone();
    // (asserts, assumes): one assert on entry and per backjump, one assume
    // at the head and per exit taken on the loop condition
    for (class, name, want) in [
        ("Summary", "summary", (2, 2)),
        ("Loop", "loop", (2, 2)),
        ("BottomLoop", "loop", (2, 2)),
        ("GCD", "gcd", (3, 2)),
        ("LinearSearch", "search", (2, 2)),
        ("InsertionSort", "sort", (4, 4)),
        ("Checks", "pred", (1, 1)),
        ("Fact", "fact", (0, 0)),
    ] {
        let p = get(class, name);
        assert_eq!((asserts(&p), assumes(&p)), want, "{class}.{name}");
    }
}

#[test]
fn inline_checks_translate_to_assume_and_assert() {
    let t = translate_plan(&corpus::checks(&Lib::default())).unwrap();
    let text = body_text(proc_named(&t, "pred"));
    assert!(text.contains("assume n > 0;\n"), "{text}");
    assert!(text.contains("assert n - 1 >= 0;\n"), "{text}");
    assert!(!text.contains("call "), "{text}");
}

#[test]
fn calls_are_extracted_to_temporaries() {
    let t = translate_plan(&corpus::pure_recursion(&Lib::default())).unwrap();
    let fact = proc_named(&t, "fact");
    let text = body_text(fact);
    assert!(text.contains("call #r0 := fact(n - 1);\n"), "{text}");
    assert!(text.contains("@ret := n * #r0;\n"), "{text}");
    let locals = &fact.body.as_ref().unwrap().locals;
    assert!(locals.iter().any(|l| l.name == "#r0" && l.ty == BType::Int));
}

#[test]
fn pure_methods_become_functions() {
    let t = translate_plan(&corpus::pure_recursion(&Lib::default())).unwrap();
    let f = t.program.decls.iter().find_map(|d| match d {
        Decl::Function(f) if demangle(&f.name) == "pfact" => Some(f),
        _ => None,
    });
    let f = f.unwrap();
    assert_eq!(f.params[0].name, "h");
    assert_eq!(
        demangle(&print_expr(f.body.as_ref().unwrap())),
        "if n <= 0 then 1 else n * pfact(h, n - 1)"
    );
    assert!(t.program.procedures().all(|p| demangle(&p.name) != "pfact"));
    let square = t.program.decls.iter().find_map(|d| match d {
        Decl::Function(f) if demangle(&f.name) == "square" => f.body.as_ref(),
        _ => None,
    });
    assert_eq!(demangle(&print_expr(square.unwrap())), "n * n + pfact(h, n)");
}

#[test]
fn objects_fields_and_arrays() {
    let t = translate_plan(&corpus::counter(&Lib::default())).unwrap();
    let client = body_text(proc_named(&t, "client"));
    for line in [
        "call $t0 := new(Counter);",
        "call $init$($t0);",
        "call increment(c);",
        "call $t1 := array.new(5);",
        "@ret := get(#heap, c) + lengthof(arr);",
    ] {
        assert!(client.contains(line), "{line}\n{client}");
    }
    let inc = body_text(proc_named(&t, "increment"));
    assert!(inc.contains("#heap := update(#heap, this, Counter.count, read(#heap, this, Counter.count) + 1);"), "{inc}");
    assert!(inc.contains("ensures read(#heap, this, Counter.count) > old(read(#heap, this, Counter.count));"));
    let decls: Vec<&str> = t.program.decls.iter().filter_map(|d| d.name()).collect();
    assert!(decls.contains(&"Counter.count") && decls.contains(&"Counter"));

    let sort = translate_plan(&corpus::insertion_sort(&Lib::default())).unwrap();
    let text = body_text(proc_named(&sort, "sort"));
    assert!(text.contains("#heap := array.update(#heap, a, j - 1, t);"), "{text}");
    assert!(text.contains("t := (array.read(#heap, a, j): int);"), "{text}");
}

#[test]
fn division_and_remainder() {
    let mut a = Asm::new();
    a.var(0, "a", "I").var(1, "b", "I");
    a.iload(0).iload(1).arith(ArithOp::Div);
    a.iload(0).iload(1).arith(ArithOp::Rem);
    a.arith(ArithOp::Add).i(I::Return(Some(ValueKind::Int)));
    let t = translate_plan(&static_plan("D", "d", "(II)I", &mut a)).unwrap();
    let text = body_text(proc_named(&t, "d"));
    assert!(text.contains("@ret := a div b + a mod b;"), "{text}");
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BVal {
    Int(i128),
    Bool(bool),
}

/// Outcomes where Boogie's unbounded arithmetic is not expected to match
/// the JVM's.
#[derive(Debug)]
enum Skip {
    Overflow,
    Division,
    Opaque,
}

/// Straight-line and branching procedure bodies over `int` and `bool`.
struct Interp<'a> {
    env: HashMap<&'a str, BVal>,
}

impl<'a> Interp<'a> {
    fn int(&self, e: &'a BExpr) -> Result<i128, Skip> {
        match self.eval(e)? {
            BVal::Int(v) => Ok(v),
            b => panic!("{} is {b:?}", print_expr(e)),
        }
    }

    fn bool(&self, e: &'a BExpr) -> Result<bool, Skip> {
        match self.eval(e)? {
            BVal::Bool(v) => Ok(v),
            b => panic!("{} is {b:?}", print_expr(e)),
        }
    }

    fn eval(&self, e: &'a BExpr) -> Result<BVal, Skip> {
        let v = match e {
            BExpr::Int(v) => BVal::Int(*v),
            BExpr::Bool(b) => BVal::Bool(*b),
            BExpr::Id(x) => *self.env.get(x.as_str()).unwrap_or_else(|| panic!("unbound {x}")),
            BExpr::Unary(UnOp::Not, x) => BVal::Bool(!self.bool(x)?),
            BExpr::Unary(UnOp::Neg, x) => BVal::Int(-self.int(x)?),
            BExpr::Ite(c, t, f) => {
                if self.bool(c)? {
                    self.eval(t)?
                } else {
                    self.eval(f)?
                }
            }
            BExpr::Binary(op, a, b) => {
                use BinOp::*;
                match op {
                    Iff => BVal::Bool(self.bool(a)? == self.bool(b)?),
                    Implies => BVal::Bool(!self.bool(a)? || self.bool(b)?),
                    And => BVal::Bool(self.bool(a)? & self.bool(b)?),
                    Or => BVal::Bool(self.bool(a)? | self.bool(b)?),
                    Eq => BVal::Bool(self.eval(a)? == self.eval(b)?),
                    Ne => BVal::Bool(self.eval(a)? != self.eval(b)?),
                    Lt => BVal::Bool(self.int(a)? < self.int(b)?),
                    Le => BVal::Bool(self.int(a)? <= self.int(b)?),
                    Gt => BVal::Bool(self.int(a)? > self.int(b)?),
                    Ge => BVal::Bool(self.int(a)? >= self.int(b)?),
                    Add => BVal::Int(self.int(a)? + self.int(b)?),
                    Sub => BVal::Int(self.int(a)? - self.int(b)?),
                    Mul => BVal::Int(self.int(a)? * self.int(b)?),
                    IntDiv | Mod => {
                        let (x, y) = (self.int(a)?, self.int(b)?);
                        if y == 0 {
                            return Err(Skip::Division);
                        }
                        // Boogie's div and mod are Euclidean, the JVM truncates
                        let (q, r) = (x.div_euclid(y), x.rem_euclid(y));
                        if (q, r) != (x / y, x % y) {
                            return Err(Skip::Division);
                        }
                        BVal::Int(if *op == IntDiv { q } else { r })
                    }
                    Div => panic!("real division"),
                }
            }
            BExpr::App(..) => return Err(Skip::Opaque),
            other => panic!("unexpected {}", print_expr(other)),
        };
        match v {
            BVal::Int(i) if i < i32::MIN as i128 || i > i32::MAX as i128 => Err(Skip::Overflow),
            v => Ok(v),
        }
    }

    fn run(&mut self, stmts: &'a [BStmt]) -> Result<BVal, Skip> {
        let mut pc = 0;
        loop {
            let Some(s) = stmts.get(pc) else { panic!("fell off the body") };
            pc += 1;
            match s {
                BStmt::Assign(x, e) => {
                    let v = self.eval(e)?;
                    self.env.insert(x, v);
                }
                BStmt::If { cond, then, els } => {
                    let branch = if self.bool(cond)? { Some(then) } else { els.as_ref() };
                    if let Some(b) = branch {
                        assert!(b.len() == 1, "nested block");
                        if let BStmt::Goto(ls) = &b[0] {
                            pc = stmts.iter().position(|s| matches!(s, BStmt::Label(l) if *l == ls[0])).unwrap();
                        } else {
                            panic!("non-goto branch");
                        }
                    }
                }
                BStmt::Goto(ls) => {
                    pc = stmts.iter().position(|s| matches!(s, BStmt::Label(l) if *l == ls[0])).unwrap();
                }
                BStmt::Return => return Ok(self.env["@ret"]),
                BStmt::Label(_) | BStmt::Assert(_) | BStmt::Assume(_) => {}
                BStmt::Call { .. } => return Err(Skip::Opaque),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    // Independent interpretation of the emitted Boogie agrees with the
    // lifted code wherever unbounded and 32-bit arithmetic coincide.
    #[test]
    fn emitted_procedures_compute_the_method(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = AggGen::arithmetic(&mut r);
        let (plan, _) = g.plan();
        let t = translate_plan(&plan).unwrap();
        let p = proc_named(&t, "m");
        let cf = support::compile(&plan);
        let body = lift_method("G", cf.method("m").unwrap(), &Namespace::default()).unwrap();
        for _ in 0..8 {
            let args = g.inputs();
            let mut interp = Interp { env: HashMap::new() };
            for (param, v) in p.params.iter().zip(&args) {
                let v = v.as_int().unwrap();
                let bv = if param.ty == BType::Bool { BVal::Bool(v != 0) } else { BVal::Int(v as i128) };
                interp.env.insert(&param.name, bv);
            }
            let Ok(got) = interp.run(&p.body.as_ref().unwrap().stmts) else { continue };
            let want = eval_grimp(&body, &args, &mut Heap::default()).unwrap().unwrap();
            let got = match got {
                BVal::Int(v) => Value::Int(v as i64),
                BVal::Bool(b) => Value::bool(b),
            };
            prop_assert_eq!(want, got, "{:?}", args);
        }
    }
}

#[test]
fn boogie_oracle_covers_most_inputs() {
    let mut r = rng(0xe7c0de);
    let (mut compared, mut total) = (0, 0);
    let mut skips = std::collections::BTreeMap::new();
    for _ in 0..200 {
        let mut g = AggGen::arithmetic(&mut r);
        let (plan, _) = g.plan();
        let t = translate_plan(&plan).unwrap();
        let p = proc_named(&t, "m");
        for _ in 0..5 {
            let args = g.inputs();
            let mut interp = Interp { env: HashMap::new() };
            for (param, v) in p.params.iter().zip(&args) {
                let v = v.as_int().unwrap();
                let bv = if param.ty == BType::Bool { BVal::Bool(v != 0) } else { BVal::Int(v as i128) };
                interp.env.insert(&param.name, bv);
            }
            total += 1;
            match interp.run(&p.body.as_ref().unwrap().stmts) {
                Ok(_) => compared += 1,
                Err(e) => *skips.entry(format!("{e:?}")).or_insert(0) += 1,
            }
        }
    }
    assert!(compared * 5 > total * 2, "only {compared} of {total} runs were comparable: {skips:?}");
}
