// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::{BTreeSet, HashMap};

use bcb_core::corpus::{self, Lib};
use bcb_core::ir::{BinOp, Body, ExprKind, StmtKind, Type};
use bcb_core::lift::bytecode::run_bytecode;
use bcb_core::lift::{build_cfg, detect_loops, eval_grimp, infer_expected_types, lift_method, Heap, Value};
use bcb_core::spec::Namespace;
use proptest::prelude::*;
use support::{compile, rng, LiftGen};

fn lifted(plan: &bcb_core::classfile::ClassPlan, name: &str) -> Body {
    let cf = compile(plan);
    lift_method(&cf.this_class, cf.method(name).unwrap(), &Namespace::default()).unwrap()
}

fn check_typing(body: &Body) {
    for s in &body.stmts {
        if let StmtKind::If(c, _) = &s.kind {
            assert_eq!(c.ex(), &Type::Bool, "condition {}", body.display_expr(c));
        }
        for e in s.exprs() {
            e.walk(&mut |x| {
                let ExprKind::Binary(op, a, b) = &x.kind else { return };
                use BinOp::*;
                match op {
                    Add | Sub | Mul | Div | Rem | Shl | Shr | Ushr => {
                        assert!(a.ex().is_numeric() && b.ex().is_numeric(), "{}", body.display_expr(x));
                    }
                    And | Or | Xor => {
                        let bools = *a.ex() == Type::Bool && *b.ex() == Type::Bool;
                        let nums = a.ex().is_numeric() && b.ex().is_numeric();
                        assert!(bools || nums, "{}", body.display_expr(x));
                    }
                    _ => {}
                }
            });
        }
    }
    let mut again = body.clone();
    infer_expected_types(&mut again).unwrap();
    assert_eq!(&again, body, "type inference is not idempotent");
}

/// Dropping every backjump of the loops nested in each loop leaves its
/// blocks acyclic.
fn check_loops(body: &Body) {
    let cfg = build_cfg(body);
    let loops = detect_loops(body, &cfg).unwrap();
    for l in &loops {
        let dropped: BTreeSet<(usize, usize)> = loops
            .iter()
            .filter(|inner| l.blocks.contains(&inner.head))
            .flat_map(|inner| inner.backjumps.iter().map(move |&b| (b, inner.head)))
            .collect();
        let mut state: HashMap<usize, u8> = HashMap::new();
        fn visit(
            b: usize,
            cfg: &bcb_core::lift::Cfg,
            members: &BTreeSet<usize>,
            dropped: &BTreeSet<(usize, usize)>,
            state: &mut HashMap<usize, u8>,
        ) {
            state.insert(b, 1);
            for &s in &cfg.blocks[b].succs {
                if !members.contains(&s) || dropped.contains(&(b, s)) {
                    continue;
                }
                match state.get(&s) {
                    Some(1) => panic!("cycle through block {s} remains"),
                    Some(_) => {}
                    None => visit(s, cfg, members, dropped, state),
                }
            }
            state.insert(b, 2);
        }
        visit(l.head, &cfg, &l.blocks, &dropped, &mut state);
    }
}

#[test]
fn corpus_bodies_are_well_typed_and_loops_well_formed() {
    let lib = Lib::default();
    for plan in corpus::programs(&lib) {
        let cf = compile(&plan);
        for m in &cf.methods {
            let body = lift_method(&cf.this_class, m, &lib.ns).unwrap();
            check_typing(&body);
            check_loops(&body);
        }
    }
}

#[test]
fn nested_loops_are_detected_innermost_first() {
    let body = lifted(&corpus::insertion_sort(&Lib::default()), "sort");
    let cfg = build_cfg(&body);
    let loops = detect_loops(&body, &cfg).unwrap();
    assert_eq!(loops.len(), 2);
    assert!(loops[0].blocks.is_subset(&loops[1].blocks));
    assert_eq!(loops[0].backjumps.len(), 1);
}

#[test]
fn bottom_tested_loop_has_its_test_as_head() {
    let body = lifted(&corpus::bottom_test_loop(&Lib::default()), "loop");
    let cfg = build_cfg(&body);
    let loops = detect_loops(&body, &cfg).unwrap();
    assert_eq!(loops.len(), 1);
    let head = &body.stmts[cfg.blocks[loops[0].head].start..cfg.blocks[loops[0].head].end];
    assert!(matches!(head.last().unwrap().kind, StmtKind::If(..)));
}

#[test]
fn irreducible_flow_is_rejected() {
    let plan = corpus::irreducible();
    let cf = compile(&plan);
    let body = lift_method("Irreducible", cf.method("spin").unwrap(), &Namespace::default()).unwrap();
    let err = detect_loops(&body, &build_cfg(&body)).unwrap_err();
    assert_eq!(err.code(), "E_IRREDUCIBLE");
}

#[test]
fn summary_loop_computes_its_sum() {
    let lib = Lib::default();
    let cf = compile(&corpus::summary(&lib));
    let body = lift_method("Summary", cf.method("summary").unwrap(), &lib.ns).unwrap();
    // nonnegative entries summed, zeros counted as one
    for data in [vec![], vec![3, -1, 0, 4], vec![-5, -6], vec![0, 0, 7]] {
        let want: i64 = data.iter().filter(|v| **v >= 0).map(|v| if *v == 0 { 1 } else { *v }).sum();
        let mut heap = Heap::default();
        let a = heap.int_array(&data);
        assert_eq!(eval_grimp(&body, &[a], &mut heap), Ok(Some(Value::Int(want))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lifting_preserves_semantics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = LiftGen::new(&mut r);
        let cf = g.method();
        let m = cf.method("m").unwrap();
        let body = lift_method("L", m, &Namespace::default()).unwrap();
        check_typing(&body);
        check_loops(&body);
        for _ in 0..5 {
            let args = g.inputs();
            let want = run_bytecode(m, &args, &mut Heap::default());
            let got = eval_grimp(&body, &args, &mut Heap::default());
            match (&want, &got) {
                (Ok(Some(a)), Ok(Some(b))) => prop_assert!(a.same(*b), "{args:?}: {a:?} vs {b:?}\n{body}"),
                _ => prop_assert_eq!(&want, &got, "{:?}\n{}", args, body),
            }
        }
    }
}
