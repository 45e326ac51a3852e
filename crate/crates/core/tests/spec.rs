// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::BTreeSet;

use bcb_core::classfile::{
    parse_class, build_class, ClassPlan, Instruction as I, MethodDescriptor, MethodPlan, MethodRef, ValueKind,
    ACC_PUBLIC, ACC_STATIC,
};
use bcb_core::corpus::{self, Asm, Lib};
use bcb_core::ir::{ExprKind, IntrinsicKind, StmtKind};
use bcb_core::lift::{build_cfg, detect_loops, eval_grimp, lift_method, Heap, Trap, Value};
use bcb_core::spec::*;
use proptest::prelude::*;
use support::{compile, rng, AggGen};

fn op_ref(ns: &Namespace, class: &str, name: &str, desc: &str) -> MethodRef {
    MethodRef::new(&ns.class(class), name, MethodDescriptor::parse(desc).unwrap())
}

#[test]
fn every_library_method_is_recognized_once() {
    let ns = Namespace::default();
    let all = ns.all_intrinsics();
    let unique: BTreeSet<String> = all.iter().map(|m| format!("{}.{}{}", m.owner, m.name, m.descriptor)).collect();
    assert_eq!(unique.len(), all.len());
    for m in &all {
        assert!(ns.recognize(m).is_some(), "{} {}", m.name, m.descriptor);
    }
}

#[test]
fn near_misses_are_not_intrinsics() {
    let ns = Namespace::default();
    for (class, name, desc) in [
        ("Operator", "lt", "(ZZ)Z"),
        ("Operator", "not", "(I)Z"),
        ("Operator", "implies", "(II)Z"),
        ("Operator", "eq", "(IJ)Z"),
        ("Quantifier", "forall", "(Z)Z"),
        ("Contract", "invariant", "(I)V"),
        ("Special", "old", "(I)J"),
        ("Operator", "plus", "(II)I"),
    ] {
        assert_eq!(ns.recognize(&op_ref(&ns, class, name, desc)), None, "{name}{desc}");
    }
    let foreign = MethodRef::new("other/Operator", "lt", MethodDescriptor::parse("(II)Z").unwrap());
    assert_eq!(ns.recognize(&foreign), None);
}

#[test]
fn namespace_is_configurable() {
    let ns = Namespace::new("org.example.spec");
    assert_eq!(ns.class("Operator"), "org/example/spec/Operator");
    assert_eq!(ns.recognize(&op_ref(&ns, "Operator", "lt", "(II)Z")), Some(IntrinsicKind::Lt));
    let default = Namespace::default();
    assert_eq!(default.recognize(&op_ref(&ns, "Operator", "lt", "(II)Z")), None);
}

#[test]
fn table_loop_invariant_is_aggregated_and_its_chain_removed() {
    let lib = Lib::default();
    let cf = compile(&corpus::table_loop(&lib));
    let mut body = lift_method("Loop", cf.method("loop").unwrap(), &lib.ns).unwrap();
    let cfg = build_cfg(&body);
    let loops = detect_loops(&body, &cfg).unwrap();
    let inv = extract_loop_invariants(&mut body, &cfg, &loops, &|_| false).unwrap();
    let (label, exprs) = inv.iter().next().unwrap();
    assert_eq!(*label, loops[0].head_label);
    assert_eq!(exprs.len(), 1);
    assert_eq!(body.display_expr(&exprs[0]), "lte(0, k) & lte(k, 3)");
    let assigned: Vec<&str> = body
        .stmts
        .iter()
        .filter_map(|s| s.defines())
        .map(|v| body.locals[v].name.as_str())
        .collect();
    assert_eq!(assigned, ["k", "k"]);
    assert!(!body.stmts.iter().any(|s| matches!(s.kind, StmtKind::Invoke(_))));
}

#[test]
fn inline_checks_become_check_statements() {
    let lib = Lib::default();
    let cf = compile(&corpus::checks(&lib));
    let mut body = lift_method("Checks", cf.method("pred").unwrap(), &lib.ns).unwrap();
    let cfg = build_cfg(&body);
    let checks = extract_inline_checks(&mut body, &cfg, &|_| false).unwrap();
    let shown: Vec<String> = checks.iter().map(|(_, k, e)| format!("{k:?} {}", body.display_expr(e))).collect();
    assert_eq!(shown, ["Assume gt(n, 0)", "Assert gte(n - 1, 0)"]);
}

#[test]
fn invariant_outside_loop_is_rejected() {
    let lib = Lib::default();
    let mut a = Asm::new();
    a.int(1);
    lib.op(&mut a, "invariant", "(Z)V");
    a.i(I::Return(None));
    let cf = compile(&support::static_plan("S", "s", "()V", &mut a));
    let mut body = lift_method("S", cf.method("s").unwrap(), &lib.ns).unwrap();
    let cfg = build_cfg(&body);
    let err = extract_loop_invariants(&mut body, &cfg, &[], &|_| false).unwrap_err();
    assert_eq!(err.code(), "E_INVARIANT_OUTSIDE_LOOP");
}

#[test]
fn branching_predicate_reports_violations() {
    let lib = Lib::default();
    let cf = compile(&corpus::branching_predicate(&lib));
    let body = lift_method("BranchingPredicate", cf.method("positive").unwrap(), &lib.ns).unwrap();
    let vs = check_aggregable(&body, &|_| false);
    assert!(vs.iter().any(|v| v.kind == ViolationKind::Branching && v.offset.is_some()));
    let err = aggregate(&body, &|_| false, DEFAULT_NODE_BUDGET).unwrap_err();
    assert_eq!(err.code(), "E_NOT_AGGREGABLE");
}

#[test]
fn contains_aggregates_to_a_quantifier() {
    let lib = Lib::default();
    let cf = compile(&corpus::summary(&lib));
    let body = lift_method("Summary", cf.method("contains").unwrap(), &lib.ns).unwrap();
    let agg = aggregate(&body, &|_| false, DEFAULT_NODE_BUDGET).unwrap();
    let ExprKind::Intrinsic(i) = &agg.expr.kind else { panic!("{}", agg.display()) };
    assert_eq!(i.kind, IntrinsicKind::Exists);
    assert_eq!(agg.display(), "exists(i$1, (lte(from, i$1) & lt(i$1, to)) & eq(as[i$1], e))");
    // quantifiers have no executable meaning
    let mut heap = Heap::default();
    let arr = heap.int_array(&[1, 2]);
    let args = [arr, Value::Int(2), Value::Int(0), Value::Int(2)];
    assert!(matches!(evaluate(&agg, &args, &mut heap), Err(Trap::Unsupported(_))));
}

#[test]
fn budget_bounds_aggregate_size() {
    let lib = Lib::default();
    // x = p; x = x + x; ... doubles the tree each step
    let mut a = Asm::new();
    a.iload(0).istore(1);
    for _ in 0..20 {
        a.iload(1).iload(1).arith(bcb_core::classfile::ArithOp::Add).istore(1);
    }
    a.iload(1).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let cf = compile(&support::static_plan("B", "b", "(I)Z", &mut a));
    let body = lift_method("B", cf.method("b").unwrap(), &lib.ns).unwrap();
    let err = aggregate(&body, &|_| false, 10_000).unwrap_err();
    assert_eq!(err.code(), "E_AGGREGATE_TOO_LARGE");
}

fn contract_error(plan: &ClassPlan) -> String {
    let cf = parse_class(&build_class(plan).unwrap()).unwrap();
    let (_, e) = resolve_contracts(&cf, &Namespace::default()).unwrap_err();
    e.code().to_string()
}

#[test]
fn contract_resolution_errors() {
    let lib = Lib::default();
    let ret = |v: ValueKind| {
        let mut a = Asm::new();
        a.int(1).i(I::Return(Some(v)));
        a.finish()
    };
    let void = || {
        let mut a = Asm::new();
        a.i(I::Return(None));
        a.finish()
    };
    let run = |pred: &str| MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "run", "(I)V").code(void()).annotate(lib.require(pred));

    let plain = ClassPlan::new("A")
        .method(MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "p", "(I)Z").code(ret(ValueKind::Int)))
        .method(run("p"));
    assert_eq!(contract_error(&plain), "E_NOT_A_PREDICATE");

    let arity = ClassPlan::new("A")
        .method(
            MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "p", "(II)Z")
                .code(ret(ValueKind::Int))
                .annotate(lib.predicate()),
        )
        .method(run("p"));
    assert_eq!(contract_error(&arity), "E_SIGNATURE_MISMATCH");

    let int = ClassPlan::new("A")
        .method(
            MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "p", "(I)I")
                .code(ret(ValueKind::Int))
                .annotate(lib.predicate()),
        )
        .method(run("p"));
    assert_eq!(contract_error(&int), "E_PREDICATE_NOT_BOOLEAN");

    assert_eq!(contract_error(&corpus::missing_predicate(&lib)), "E_NO_SUCH_PREDICATE");
}

#[test]
fn ensures_predicates_take_the_result() {
    let lib = Lib::default();
    let cf = compile(&corpus::summary(&lib));
    let contracts = resolve_contracts(&cf, &lib.ns).unwrap();
    let (m, c) = contracts.iter().find(|(m, _)| m.name == "summary").unwrap();
    assert_eq!(m.descriptor.to_string(), "([I)I");
    assert_eq!(c.requires[0].name, "no_ones");
    assert_eq!(c.ensures[0].descriptor.to_string(), "([II)Z");
    assert!(contracts.values().filter(|c| c.is_predicate).count() == 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aggregation_preserves_semantics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = AggGen::new(&mut r);
        let (cf, _) = g.method();
        let body = lift_method("G", cf.method("m").unwrap(), &Namespace::default()).unwrap();
        prop_assert!(check_aggregable(&body, &|_| false).is_empty());
        let agg = aggregate(&body, &|_| false, DEFAULT_NODE_BUDGET).unwrap();
        for _ in 0..5 {
            let args = g.inputs();
            let want = eval_grimp(&body, &args, &mut Heap::default()).unwrap().unwrap();
            let got = evaluate(&agg, &args, &mut Heap::default()).unwrap();
            prop_assert_eq!(want, got);
        }
    }
}
