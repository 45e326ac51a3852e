// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use bcb_core::classfile::*;
use bcb_core::corpus::{self, Lib};
use proptest::prelude::*;
use rand::Rng;
use support::{rng, AggGen, LiftGen};

fn assert_round_trip(plan: &ClassPlan) {
    let bytes = build_class(plan).expect("plan builds");
    let parsed = parse_class(&bytes).expect("bytes parse");
    assert_eq!(parsed, plan.normal_form().unwrap());
    for m in &parsed.methods {
        let Some(code) = &m.code else { continue };
        for (_, insn) in &code.instructions {
            for t in branch_targets(insn) {
                assert!(code.index_of(t).is_some(), "{}: branch to {t} is not an instruction start", m.name);
            }
        }
    }
}

fn branch_targets(i: &Instruction) -> Vec<u32> {
    use Instruction::*;
    match i {
        If(_, t) | IfICmp(_, t) | IfACmp(_, t) | IfNull(t) | IfNonNull(t) | Goto(t) => vec![*t],
        TableSwitch { default, targets, .. } => std::iter::once(*default).chain(targets.iter().copied()).collect(),
        LookupSwitch { default, pairs } => std::iter::once(*default).chain(pairs.iter().map(|p| p.1)).collect(),
        _ => vec![],
    }
}

#[test]
fn corpus_round_trips() {
    let lib = Lib::default();
    for plan in corpus::programs(&lib) {
        assert_round_trip(&plan);
    }
    for (plan, _, _) in corpus::error_cases(&lib) {
        assert_round_trip(&plan);
    }
}

#[test]
fn wide_constants_resolve_through_ldc2() {
    use Instruction as I;
    let plan = ClassPlan::new("W").method(
        MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "w", "()D").code(CodePlan {
            instructions: vec![
                I::Const(Constant::Long(1 << 40)),
                I::Pop2,
                I::Const(Constant::String("s".into())),
                I::Pop,
                I::Const(Constant::Double(2.5)),
                I::Return(Some(ValueKind::Double)),
            ],
            ..Default::default()
        }),
    );
    assert_round_trip(&plan);
    let cf = parse_class(&build_class(&plan).unwrap()).unwrap();
    let code = cf.methods[0].code.as_ref().unwrap();
    assert_eq!(code.instructions[0].1, I::Const(Constant::Long(1 << 40)));
    assert_eq!(code.instructions[4].1, I::Const(Constant::Double(2.5)));
}

#[test]
fn annotations_survive() {
    let lib = Lib::default();
    let plan = corpus::summary(&lib);
    let cf = parse_class(&build_class(&plan).unwrap()).unwrap();
    let m = cf.method("summary").unwrap();
    let names: Vec<&str> = m.annotations.iter().map(|a| a.type_name.as_str()).collect();
    assert_eq!(names, ["byteback.annotations.Require", "byteback.annotations.Ensure"]);
    assert_eq!(m.annotations[0].elements, [("value".to_string(), ElementValue::String("no_ones".into()))]);
    assert_eq!(cf.method("contains").unwrap().parameter_names, ["as", "e", "from", "to"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_methods_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let plan = if r.gen() {
            LiftGen::new(&mut r).plan()
        } else {
            AggGen::new(&mut r).plan().0
        };
        assert_round_trip(&plan);
    }

    #[test]
    fn constants_round_trip(ints in proptest::collection::vec(any::<i32>(), 1..20),
                            longs in proptest::collection::vec(any::<i64>(), 0..10),
                            text in "\\PC{0,12}") {
        use Instruction as I;
        let mut insns = Vec::new();
        for v in &ints {
            insns.push(I::Const(Constant::Int(*v)));
            insns.push(I::Pop);
        }
        for v in &longs {
            insns.push(I::Const(Constant::Long(*v)));
            insns.push(I::Pop2);
        }
        insns.push(I::Const(Constant::String(text.clone())));
        insns.push(I::Return(Some(ValueKind::Ref)));
        let plan = ClassPlan::new("C")
            .field(FieldInfo::new(ACC_PUBLIC, &format!("f{}", ints.len()), FieldType::Long))
            .method(MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "c", "()Ljava/lang/String;").code(CodePlan {
                instructions: insns,
                ..Default::default()
            }));
        assert_round_trip(&plan);
    }
}
