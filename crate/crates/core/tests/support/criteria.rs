// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! One check per acceptance criterion. Each returns a short summary on
//! success and the first counterexample on failure.

use bcb_core::boogie::{parse_program, print_program, BStmt, Program};
use bcb_core::classfile::ClassPlan;
use bcb_core::corpus::{self, Lib};
use bcb_core::encode::{parse_prelude, DEFAULT_PRELUDE};
use bcb_core::frames::{infer_frames, Frame};
use bcb_core::lift::{bytecode::run_bytecode, eval_grimp, lift_method, Heap, Trap, Value};
use bcb_core::pipeline::{translate, Config, Translation};
use bcb_core::spec::{aggregate, evaluate, Namespace, DEFAULT_NODE_BUDGET};

use super::*;

pub type Outcome = Result<String, String>;

pub fn translate_plan(plan: &ClassPlan) -> Result<Translation, bcb_core::pipeline::Error> {
    let bytes = corpus::build_all(std::slice::from_ref(plan));
    translate(&bytes, std::slice::from_ref(&plan.name), &Config::default())
}

fn translated(plan: &ClassPlan) -> Result<Translation, String> {
    translate_plan(plan).map_err(|e| format!("{}: [{}] {e}", plan.name, e.code()))
}

pub fn fig5_golden() -> Outcome {
    let t = translated(&corpus::summary(&Lib::default()))?;
    let contains = decl_text(&t.program, "contains", false).ok_or("no `contains` declaration")?;
    let summary = decl_text(&t.program, "summary", true).ok_or("no `summary` procedure")?;
    let got = normalize(&format!("{contains}\n{summary}"));
    let want = normalize(&golden("summary.bpl"));
    if got != want {
        return Err(format!("golden mismatch\n--- want\n{want}\n--- got\n{got}"));
    }
    Ok("contract clauses and `contains` match the golden file".into())
}

/// Statement kinds of a procedure body in order, with labels kept.
fn skeleton(stmts: &[BStmt]) -> Vec<&'static str> {
    let mut out = Vec::new();
    for s in stmts {
        s.walk(&mut |s| {
            out.push(match s {
                BStmt::Label(_) => "label",
                BStmt::Assert(_) => "assert",
                BStmt::Assume(_) => "assume",
                BStmt::Goto(_) => "goto",
                BStmt::If { .. } => "if",
                BStmt::Return => "return",
                _ => "other",
            })
        });
    }
    out
}

pub fn table5b_golden() -> Outcome {
    let t = translated(&corpus::table_loop(&Lib::default()))?;
    let text = decl_text(&t.program, "loop", false).ok_or("no `loop` procedure")?;
    let want = normalize(&golden("loop.bpl"));
    if normalize(&text) != want {
        return Err(format!("golden mismatch\n--- want\n{want}\n--- got\n{}", normalize(&text)));
    }
    let p = t.program.procedures().find(|p| demangle(&p.name) == "loop").unwrap();
    let sk = skeleton(&p.body.as_ref().unwrap().stmts);
    let asserts = sk.iter().filter(|k| **k == "assert").count();
    let assumes = sk.iter().filter(|k| **k == "assume").count();
    if (asserts, assumes) != (2, 2) {
        return Err(format!("{asserts} asserts and {assumes} assumes, expected 2 and 2"));
    }
    // assert; head: if; assume; ...; assert; goto head; exit: assume
    let expected = [
        "other", "assert", "label", "if", "goto", "assume", "other", "assert", "goto", "label", "assume",
        "return",
    ];
    if sk != expected {
        return Err(format!("skeleton {sk:?}"));
    }
    Ok("2 asserts, 2 assumes at head, body entry, backjump and exit".into())
}

fn same_result(a: &Result<Option<Value>, Trap>, b: &Result<Option<Value>, Trap>) -> bool {
    match (a, b) {
        (Ok(Some(x)), Ok(Some(y))) => x.same(*y),
        (Ok(None), Ok(None)) => true,
        (Err(x), Err(y)) => x == y,
        _ => false,
    }
}

pub fn aggregation_oracle(bodies: usize, inputs: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let ns = Namespace::default();
    let mut checked = 0;
    for n in 0..bodies {
        let mut g = AggGen::new(&mut r);
        let (cf, _) = g.method();
        let m = cf.method("m").unwrap();
        let body = lift_method("G", m, &ns).map_err(|e| format!("body {n}: lift: {e}"))?;
        let agg = aggregate(&body, &|_| false, DEFAULT_NODE_BUDGET)
            .map_err(|e| format!("body {n}: aggregate: {e}\n{body}"))?;
        for _ in 0..inputs {
            let args = g.inputs();
            let want = eval_grimp(&body, &args, &mut Heap::default());
            let got = evaluate(&agg, &args, &mut Heap::default()).map(Some);
            if !same_result(&want, &got) {
                return Err(format!(
                    "body {n} on {args:?}: grimp {want:?}, aggregate {got:?}\n{body}\naggregate: {}",
                    agg.display()
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{bodies} bodies, {checked} evaluations agree"))
}

pub fn lifting_oracle(methods: usize, inputs: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let ns = Namespace::default();
    let mut checked = 0;
    let mut traps = 0;
    for n in 0..methods {
        let mut g = LiftGen::new(&mut r);
        let cf = g.method();
        let m = cf.method("m").unwrap();
        let body = lift_method("L", m, &ns).map_err(|e| format!("method {n}: lift: {e}"))?;
        for _ in 0..inputs {
            let args = g.inputs();
            let want = run_bytecode(m, &args, &mut Heap::default());
            let got = eval_grimp(&body, &args, &mut Heap::default());
            if !same_result(&want, &got) {
                return Err(format!("method {n} on {args:?}: bytecode {want:?}, grimp {got:?}\n{body}"));
            }
            traps += want.is_err() as usize;
            checked += 1;
        }
    }
    Ok(format!("{methods} methods, {checked} runs agree ({traps} trapping)"))
}

pub fn corpus_translations() -> Result<Vec<(String, Translation)>, String> {
    corpus::programs(&Lib::default())
        .iter()
        .map(|p| Ok((p.name.clone(), translated(p)?)))
        .collect()
}

pub fn frame_soundness() -> Outcome {
    let mut empty = 0;
    let mut whole = 0;
    for (class, t) in corpus_translations()? {
        let recomputed = infer_frames(&t.program);
        for p in t.program.procedures() {
            let Some(info) = t.frames.get(&p.name) else {
                return Err(format!("{class}: no frame for {}", p.name));
            };
            if recomputed.get(&p.name).map(|f| f.frame) != Some(info.frame) {
                return Err(format!("{class}: frame of {} changes on the emitted program", p.name));
            }
            let modifies = p.modifies().contains(&bcb_core::boogie::HEAP);
            if modifies != (info.frame == Frame::WholeHeap) {
                return Err(format!("{class}: {} is {} but modifies clause is {modifies}", p.name, info.frame));
            }
            if info.frame == Frame::WholeHeap {
                whole += 1;
                continue;
            }
            let Some(body) = &p.body else { continue };
            for s in &body.stmts {
                let mut bad = None;
                s.walk(&mut |s| match s {
                    BStmt::Assign(x, _) if x == bcb_core::boogie::HEAP => bad = Some("heap assignment".to_string()),
                    BStmt::Call { proc, .. }
                        if t.frames.get(proc).map(|f| f.frame) != Some(Frame::Empty) => {
                            bad = Some(format!("call to {proc}"));
                        }
                    _ => {}
                });
                if let Some(b) = bad {
                    return Err(format!("{class}: {} inferred EMPTY but contains a {b}", p.name));
                }
            }
            empty += 1;
        }
        if class == "Summary" {
            let m = t.bodies.keys().find(|m| m.name == "summary").ok_or("no summary body")?;
            if t.frame_of(m) != Some(Frame::Empty) {
                return Err(format!("summary inferred {:?}", t.frame_of(m)));
            }
        }
    }
    Ok(format!("{empty} EMPTY procedures scanned clean, {whole} WHOLE_HEAP; summary is EMPTY"))
}

fn roundtrip(what: &str, p: &Program) -> Result<(), String> {
    let text = print_program(p);
    let back = parse_program(&text).map_err(|e| format!("{what}: reparse failed at {e}\n{text}"))?;
    if &back != p {
        return Err(format!("{what}: reparsed AST differs\n{text}"));
    }
    Ok(())
}

pub fn printer_roundtrip(fuzzed: usize, seed: u64) -> Outcome {
    let prelude = parse_prelude(DEFAULT_PRELUDE).map_err(|e| format!("prelude: {e}"))?;
    roundtrip("prelude", &prelude)?;
    let corpus = corpus_translations()?;
    for (class, t) in &corpus {
        roundtrip(class, &t.program)?;
        let back = parse_program(&t.text).map_err(|e| format!("{class}: emitted text: {e}"))?;
        if back != t.program {
            return Err(format!("{class}: emitted text does not parse to the emitted AST"));
        }
    }
    let mut r = rng(seed);
    let mut g = AstGen { r: &mut r };
    for n in 0..fuzzed {
        roundtrip(&format!("fuzzed AST {n}"), &g.program())?;
    }
    Ok(format!("prelude, {} programs and {fuzzed} fuzzed ASTs", corpus.len()))
}

pub fn determinism() -> Outcome {
    let lib = Lib::default();
    let plans = corpus::programs(&lib);
    let entries: Vec<String> = plans.iter().map(|p| p.name.clone()).collect();
    let run = |order: &[String]| -> Result<String, String> {
        let bytes = corpus::build_all(&plans);
        translate(&bytes, order, &Config::default())
            .map(|t| t.text)
            .map_err(|e| e.to_string())
    };
    let first = run(&entries)?;
    let second = run(&entries)?;
    let mut reversed = entries.clone();
    reversed.reverse();
    let third = run(&reversed)?;
    if first != second {
        return Err("two runs differ".into());
    }
    if first != third {
        return Err("output depends on the order of entry classes".into());
    }
    Ok(format!("{} bytes, identical across runs and entry orders", first.len()))
}

pub fn error_taxonomy() -> Outcome {
    let mut seen = Vec::new();
    for (plan, code, exit) in corpus::error_cases(&Lib::default()) {
        match translate_plan(&plan) {
            Ok(_) => return Err(format!("{}: translated, expected {code}", plan.name)),
            Err(e) => {
                if e.code() != code || e.exit_code() != exit {
                    return Err(format!(
                        "{}: got {} exit {}, expected {code} exit {exit}: {e}",
                        plan.name,
                        e.code(),
                        e.exit_code()
                    ));
                }
                if plan.name == "BranchingPredicate" && !e.to_string().contains("BRANCHING") {
                    return Err(format!("{}: no BRANCHING violation in `{e}`", plan.name));
                }
                seen.push(format!("{code}->{exit}"));
            }
        }
    }
    Ok(seen.join(", "))
}
