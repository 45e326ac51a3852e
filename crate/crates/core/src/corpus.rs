// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Synthesized classfiles exercising the translator: annotated programs in
//! the shape a Java compiler produces, plus inputs for each error code.

use std::collections::{BTreeMap, HashMap};

use crate::classfile::{
    build_class, Annotation, ArithOp, ArrayKind, ClassPlan, CodePlan, Cond, Constant, ElementValue,
    FieldInfo, FieldRef, FieldType, Instruction as I, InvokeKind, LocalVariable, MethodDescriptor,
    MethodPlan, MethodRef, NumKind, ValueKind, ACC_PUBLIC, ACC_STATIC,
};
use crate::spec::Namespace;

/// Instruction list with symbolic branch targets.
#[derive(Default)]
pub struct Asm {
    code: Vec<I>,
    labels: HashMap<String, u32>,
    fixups: Vec<(usize, String)>,
    locals: Vec<LocalVariable>,
}

fn retarget(i: &mut I, t: u32) {
    match i {
        I::If(_, x) | I::IfICmp(_, x) | I::IfACmp(_, x) | I::IfNull(x) | I::IfNonNull(x) | I::Goto(x) => *x = t,
        _ => panic!("not a branch: {i:?}"),
    }
}

impl Asm {
    pub fn new() -> Asm {
        Asm::default()
    }

    pub fn i(&mut self, insn: I) -> &mut Self {
        self.code.push(insn);
        self
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        self.labels.insert(name.to_string(), self.code.len() as u32);
        self
    }

    /// A branch instruction whose target is patched to `to`.
    pub fn jump(&mut self, insn: I, to: &str) -> &mut Self {
        self.fixups.push((self.code.len(), to.to_string()));
        self.code.push(insn);
        self
    }

    pub fn iload(&mut self, slot: u16) -> &mut Self {
        self.i(I::Load(ValueKind::Int, slot))
    }

    pub fn aload(&mut self, slot: u16) -> &mut Self {
        self.i(I::Load(ValueKind::Ref, slot))
    }

    pub fn istore(&mut self, slot: u16) -> &mut Self {
        self.i(I::Store(ValueKind::Int, slot))
    }

    pub fn int(&mut self, v: i32) -> &mut Self {
        self.i(I::Const(Constant::Int(v)))
    }

    pub fn arith(&mut self, op: ArithOp) -> &mut Self {
        self.i(I::Arith(NumKind::Int, op))
    }

    pub fn call(&mut self, kind: InvokeKind, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.i(I::Invoke {
            kind,
            method: MethodRef::new(owner, name, MethodDescriptor::parse(desc).expect("descriptor")),
            interface: false,
        })
    }

    pub fn invoke_static(&mut self, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.call(InvokeKind::Static, owner, name, desc)
    }

    /// Record a `LocalVariableTable` entry covering the whole method.
    pub fn var(&mut self, slot: u16, name: &str, descriptor: &str) -> &mut Self {
        self.locals.push(LocalVariable {
            start: 0,
            length: u32::MAX,
            name: name.to_string(),
            descriptor: descriptor.to_string(),
            index: slot,
        });
        self
    }

    pub fn finish(&mut self) -> CodePlan {
        let mut code = std::mem::take(&mut self.code);
        for (at, name) in &self.fixups {
            let t = *self.labels.get(name.as_str()).unwrap_or_else(|| panic!("undefined label {name}"));
            retarget(&mut code[*at], t);
        }
        let n = code.len() as u32;
        let mut locals = std::mem::take(&mut self.locals);
        for l in &mut locals {
            l.length = l.length.min(n);
        }
        CodePlan {
            instructions: code,
            local_variables: locals,
            ..Default::default()
        }
    }
}

/// Calls into the specification library.
#[derive(Default)]
pub struct Lib {
    pub ns: Namespace,
}


impl Lib {
    pub fn op<'a>(&self, a: &'a mut Asm, name: &str, desc: &str) -> &'a mut Asm {
        let class = match name {
            "forall" | "exists" => "Quantifier",
            "old" => "Special",
            "invariant" | "assertion" | "assumption" => "Contract",
            "integer" | "longInteger" | "real" | "floating" | "bool" | "reference" => "Binding",
            _ => "Operator",
        };
        a.invoke_static(&self.ns.class(class), name, desc)
    }

    fn annotation(&self, simple: &str) -> Annotation {
        Annotation::new(&format!("{}.{simple}", self.ns.dotted()))
    }

    pub fn pure(&self) -> Annotation {
        self.annotation("Pure")
    }

    pub fn predicate(&self) -> Annotation {
        self.annotation("Predicate")
    }

    pub fn require(&self, name: &str) -> Annotation {
        self.annotation("Require")
            .with("value", ElementValue::String(name.to_string()))
    }

    pub fn ensure(&self, name: &str) -> Annotation {
        self.annotation("Ensure")
            .with("value", ElementValue::String(name.to_string()))
    }
}

const PS: u16 = ACC_PUBLIC | ACC_STATIC;

fn static_method(name: &str, desc: &str, params: &[&str], code: CodePlan) -> MethodPlan {
    MethodPlan::new(PS, name, desc).params(params).code(code)
}

fn object_init() -> MethodPlan {
    let mut a = Asm::new();
    a.aload(0)
        .call(InvokeKind::Special, "java/lang/Object", "<init>", "()V")
        .i(I::Return(None));
    MethodPlan::new(ACC_PUBLIC, "<init>", "()V").code(a.finish())
}

/// The running example: `contains`, two predicates and the annotated
/// `summary` loop.
pub fn summary(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.var(4, "i", "I");
    lib.op(&mut a, "integer", "()I").istore(4);
    a.iload(4).iload(2).iload(4);
    lib.op(&mut a, "lte", "(II)Z");
    a.iload(4).iload(3);
    lib.op(&mut a, "lt", "(II)Z");
    a.arith(ArithOp::And);
    a.aload(0).iload(4).i(I::ArrayLoad(ArrayKind::Int)).iload(1);
    lib.op(&mut a, "eq", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "exists", "(IZ)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let contains = static_method("contains", "([IIII)Z", &["as", "e", "from", "to"], a.finish())
        .annotate(lib.pure());

    let mut a = Asm::new();
    a.aload(0).int(1).int(0).aload(0).i(I::ArrayLength);
    a.invoke_static("Summary", "contains", "([IIII)Z");
    lib.op(&mut a, "not", "(Z)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let no_ones = static_method("no_ones", "([I)Z", &["values"], a.finish()).annotate(lib.predicate());

    let mut a = Asm::new();
    a.iload(1).int(0);
    lib.op(&mut a, "gte", "(II)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let nonnegative =
        static_method("nonnegative", "([II)Z", &["values", "result"], a.finish()).annotate(lib.predicate());

    // int result = 0; for (int k = 0; k < values.length; k++) { invariant(..);
    //   int v = values[k]; if (v >= 0) result += v == 0 ? 1 : v; }
    let mut a = Asm::new();
    a.var(1, "result", "I").var(2, "k", "I").var(3, "v", "I");
    a.int(0).istore(1).int(0).istore(2);
    a.label("head").iload(2).aload(0).i(I::ArrayLength);
    a.jump(I::IfICmp(Cond::Ge, 0), "exit");
    a.int(0).iload(2);
    lib.op(&mut a, "lte", "(II)Z");
    a.iload(1).int(0);
    lib.op(&mut a, "gte", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.aload(0).iload(2).i(I::ArrayLoad(ArrayKind::Int)).istore(3);
    a.iload(3).jump(I::If(Cond::Lt, 0), "next");
    a.iload(3).jump(I::If(Cond::Ne, 0), "positive");
    a.i(I::Iinc(1, 1)).jump(I::Goto(0), "next");
    a.label("positive").iload(1).iload(3).arith(ArithOp::Add).istore(1);
    a.label("next").i(I::Iinc(2, 1)).jump(I::Goto(0), "head");
    a.label("exit").iload(1).i(I::Return(Some(ValueKind::Int)));
    let summary = static_method("summary", "([I)I", &["values"], a.finish())
        .annotate(lib.require("no_ones"))
        .annotate(lib.ensure("nonnegative"));

    ClassPlan::new("Summary")
        .method(contains)
        .method(no_ones)
        .method(nonnegative)
        .method(summary)
}

/// `for (int k = 0; k < 3; k++) { boolean a = lte(0, k); boolean b = lte(k, 3); invariant(a & b); }`
/// with the loop test at the head.
pub fn table_loop(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.var(0, "k", "I").var(1, "a", "Z").var(2, "b", "Z");
    a.int(0).istore(0);
    a.label("head").iload(0).int(3).jump(I::IfICmp(Cond::Ge, 0), "exit");
    a.int(0).iload(0);
    lib.op(&mut a, "lte", "(II)Z");
    a.istore(1).iload(0).int(3);
    lib.op(&mut a, "lte", "(II)Z");
    a.istore(2).iload(1).iload(2).arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.i(I::Iinc(0, 1)).jump(I::Goto(0), "head");
    a.label("exit").i(I::Return(None));
    ClassPlan::new("Loop").method(static_method("loop", "()V", &[], a.finish()))
}

/// The same loop in the layout `javac` emits: a jump to a bottom test.
pub fn bottom_test_loop(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.var(0, "k", "I");
    a.int(0).istore(0).jump(I::Goto(0), "cond");
    a.label("body").int(0).iload(0);
    lib.op(&mut a, "lte", "(II)Z");
    a.iload(0).int(3);
    lib.op(&mut a, "lte", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.i(I::Iinc(0, 1));
    a.label("cond").iload(0).int(3).jump(I::IfICmp(Cond::Lt, 0), "body");
    a.i(I::Return(None));
    ClassPlan::new("BottomLoop").method(static_method("loop", "()V", &[], a.finish()))
}

pub fn gcd(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.iload(0).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.iload(1).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.arith(ArithOp::And).i(I::Return(Some(ValueKind::Int)));
    let positive = static_method("positive", "(II)Z", &["a", "b"], a.finish()).annotate(lib.predicate());

    let mut a = Asm::new();
    a.iload(2).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let result_positive =
        static_method("result_positive", "(III)Z", &["a", "b", "r"], a.finish()).annotate(lib.predicate());

    let mut a = Asm::new();
    a.label("head").iload(0).iload(1).jump(I::IfICmp(Cond::Eq, 0), "exit");
    a.iload(0).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.iload(1).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.iload(0).iload(1).jump(I::IfICmp(Cond::Le, 0), "else");
    a.iload(0).iload(1).arith(ArithOp::Sub).istore(0).jump(I::Goto(0), "head");
    a.label("else").iload(1).iload(0).arith(ArithOp::Sub).istore(1).jump(I::Goto(0), "head");
    a.label("exit").iload(0).i(I::Return(Some(ValueKind::Int)));
    let gcd = static_method("gcd", "(II)I", &["a", "b"], a.finish())
        .annotate(lib.require("positive"))
        .annotate(lib.ensure("result_positive"));
    ClassPlan::new("GCD").method(positive).method(result_positive).method(gcd)
}

pub fn linear_search(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.iload(2).int(-1);
    lib.op(&mut a, "gte", "(II)Z");
    a.iload(2).aload(0).i(I::ArrayLength);
    lib.op(&mut a, "lt", "(II)Z");
    a.arith(ArithOp::And).i(I::Return(Some(ValueKind::Int)));
    let bounded = static_method("bounded", "([III)Z", &["a", "x", "r"], a.finish()).annotate(lib.predicate());

    let mut a = Asm::new();
    a.var(2, "i", "I");
    a.int(0).istore(2);
    a.label("head").iload(2).aload(0).i(I::ArrayLength).jump(I::IfICmp(Cond::Ge, 0), "exit");
    a.iload(2).int(0);
    lib.op(&mut a, "gte", "(II)Z");
    a.iload(2).aload(0).i(I::ArrayLength);
    lib.op(&mut a, "lte", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.aload(0).iload(2).i(I::ArrayLoad(ArrayKind::Int)).iload(1).jump(I::IfICmp(Cond::Ne, 0), "next");
    a.iload(2).i(I::Return(Some(ValueKind::Int)));
    a.label("next").i(I::Iinc(2, 1)).jump(I::Goto(0), "head");
    a.label("exit").int(-1).i(I::Return(Some(ValueKind::Int)));
    let search = static_method("search", "([II)I", &["a", "x"], a.finish()).annotate(lib.ensure("bounded"));
    ClassPlan::new("LinearSearch").method(bounded).method(search)
}

/// Insertion sort over an `int[]`, with an inner loop whose test has two
/// conditions.
pub fn insertion_sort(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.var(1, "i", "I").var(2, "j", "I").var(3, "t", "I");
    a.int(1).istore(1);
    a.label("outer").iload(1).aload(0).i(I::ArrayLength).jump(I::IfICmp(Cond::Ge, 0), "done");
    a.iload(1).int(1);
    lib.op(&mut a, "gte", "(II)Z");
    lib.op(&mut a, "invariant", "(Z)V");
    a.iload(1).istore(2);
    a.label("inner").iload(2).jump(I::If(Cond::Le, 0), "next");
    a.aload(0).iload(2).int(1).arith(ArithOp::Sub).i(I::ArrayLoad(ArrayKind::Int));
    a.aload(0).iload(2).i(I::ArrayLoad(ArrayKind::Int)).jump(I::IfICmp(Cond::Le, 0), "next");
    a.iload(2).int(0);
    lib.op(&mut a, "gte", "(II)Z");
    a.iload(2).iload(1);
    lib.op(&mut a, "lte", "(II)Z");
    a.arith(ArithOp::And);
    lib.op(&mut a, "invariant", "(Z)V");
    a.aload(0).iload(2).i(I::ArrayLoad(ArrayKind::Int)).istore(3);
    a.aload(0).iload(2).aload(0).iload(2).int(1).arith(ArithOp::Sub).i(I::ArrayLoad(ArrayKind::Int));
    a.i(I::ArrayStore(ArrayKind::Int));
    a.aload(0).iload(2).int(1).arith(ArithOp::Sub).iload(3).i(I::ArrayStore(ArrayKind::Int));
    a.i(I::Iinc(2, -1)).jump(I::Goto(0), "inner");
    a.label("next").i(I::Iinc(1, 1)).jump(I::Goto(0), "outer");
    a.label("done").i(I::Return(None));
    ClassPlan::new("InsertionSort").method(static_method("sort", "([I)V", &["a"], a.finish()))
}

/// A class with state, a constructor, an `old`-based postcondition and a
/// client that allocates.
pub fn counter(lib: &Lib) -> ClassPlan {
    let count = FieldRef::new("Counter", "count", FieldType::Int);
    let mut a = Asm::new();
    a.aload(0).i(I::GetField(count.clone()));
    a.aload(0).i(I::GetField(count.clone()));
    lib.op(&mut a, "old", "(I)I");
    lib.op(&mut a, "gt", "(II)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let incremented = MethodPlan::new(ACC_PUBLIC, "incremented", "()Z")
        .code(a.finish())
        .annotate(lib.predicate());

    let mut a = Asm::new();
    a.aload(0).aload(0).i(I::GetField(count.clone())).int(1).arith(ArithOp::Add);
    a.i(I::PutField(count.clone())).i(I::Return(None));
    let increment = MethodPlan::new(ACC_PUBLIC, "increment", "()V")
        .code(a.finish())
        .annotate(lib.ensure("incremented"));

    let mut a = Asm::new();
    a.aload(0).i(I::GetField(count.clone())).i(I::Return(Some(ValueKind::Int)));
    let get = MethodPlan::new(ACC_PUBLIC, "get", "()I").code(a.finish()).annotate(lib.pure());

    // Counter c = new Counter(); c.increment(); int[] a = new int[5]; return c.get() + a.length;
    let mut a = Asm::new();
    a.var(0, "c", "LCounter;").var(1, "arr", "[I");
    a.i(I::New("Counter".into())).i(I::Dup);
    a.call(InvokeKind::Special, "Counter", "<init>", "()V");
    a.i(I::Store(ValueKind::Ref, 0));
    a.aload(0).call(InvokeKind::Virtual, "Counter", "increment", "()V");
    a.int(5).i(I::NewArray(FieldType::Int)).i(I::Store(ValueKind::Ref, 1));
    a.aload(0).call(InvokeKind::Virtual, "Counter", "get", "()I");
    a.aload(1).i(I::ArrayLength).arith(ArithOp::Add);
    a.i(I::Return(Some(ValueKind::Int)));
    let client = static_method("client", "()I", &[], a.finish());

    ClassPlan::new("Counter")
        .field(FieldInfo::new(ACC_PUBLIC, "count", FieldType::Int))
        .method(object_init())
        .method(incremented)
        .method(increment)
        .method(get)
        .method(client)
}

/// Recursion with and without `@Pure`, and a pure caller of a pure function.
pub fn pure_recursion(lib: &Lib) -> ClassPlan {
    let mut f = Asm::new();
    f.iload(0).jump(I::If(Cond::Gt, 0), "rec");
    f.int(1).i(I::Return(Some(ValueKind::Int)));
    f.label("rec").iload(0).iload(0).int(1).arith(ArithOp::Sub);
    f.invoke_static("Fact", "fact", "(I)I").arith(ArithOp::Mul);
    f.i(I::Return(Some(ValueKind::Int)));
    let fact = static_method("fact", "(I)I", &["n"], f.finish());

    // conditional(lte(n, 0), 1, n * pfact(n - 1))
    let mut a = Asm::new();
    a.iload(0).int(0);
    lib.op(&mut a, "lte", "(II)Z");
    a.int(1).iload(0).iload(0).int(1).arith(ArithOp::Sub);
    a.invoke_static("Fact", "pfact", "(I)I").arith(ArithOp::Mul);
    lib.op(&mut a, "conditional", "(ZII)I");
    a.i(I::Return(Some(ValueKind::Int)));
    let pfact = static_method("pfact", "(I)I", &["n"], a.finish()).annotate(lib.pure());

    let mut a = Asm::new();
    a.iload(0).iload(0).arith(ArithOp::Mul).iload(0).invoke_static("Fact", "pfact", "(I)I");
    a.arith(ArithOp::Add).i(I::Return(Some(ValueKind::Int)));
    let square = static_method("square", "(I)I", &["n"], a.finish()).annotate(lib.pure());

    let mut a = Asm::new();
    a.iload(0).invoke_static("Fact", "fact", "(I)I").i(I::Return(Some(ValueKind::Int)));
    let caller = static_method("caller", "(I)I", &["n"], a.finish());

    ClassPlan::new("Fact").method(fact).method(pfact).method(square).method(caller)
}

/// Inline `assumption` and `assertion` calls.
pub fn checks(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.var(0, "n", "I").var(1, "x", "I");
    a.iload(0).int(0);
    lib.op(&mut a, "gt", "(II)Z");
    lib.op(&mut a, "assumption", "(Z)V");
    a.iload(0).int(1).arith(ArithOp::Sub).istore(1);
    a.iload(1).int(0);
    lib.op(&mut a, "gte", "(II)Z");
    lib.op(&mut a, "assertion", "(Z)V");
    a.iload(1).i(I::Return(Some(ValueKind::Int)));
    ClassPlan::new("Checks").method(static_method("pred", "(I)I", &["n"], a.finish()))
}

/// Every annotated program of the corpus, by class name.
pub fn programs(lib: &Lib) -> Vec<ClassPlan> {
    vec![
        summary(lib),
        table_loop(lib),
        bottom_test_loop(lib),
        gcd(lib),
        linear_search(lib),
        insertion_sort(lib),
        counter(lib),
        pure_recursion(lib),
        checks(lib),
    ]
}

/// `@Require("missing")` with no such method.
pub fn missing_predicate(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.i(I::Return(None));
    ClassPlan::new("MissingPredicate").method(
        static_method("run", "(I)V", &["x"], a.finish()).annotate(lib.require("missing")),
    )
}

/// A predicate containing a conditional jump.
pub fn branching_predicate(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.iload(0).jump(I::If(Cond::Le, 0), "no");
    a.int(1).i(I::Return(Some(ValueKind::Int)));
    a.label("no").int(0).i(I::Return(Some(ValueKind::Int)));
    let p = static_method("positive", "(I)Z", &["x"], a.finish()).annotate(lib.predicate());
    let mut a = Asm::new();
    a.i(I::Return(None));
    let run = static_method("run", "(I)V", &["x"], a.finish()).annotate(lib.require("positive"));
    ClassPlan::new("BranchingPredicate").method(p).method(run)
}

/// A `@Pure` method that writes a static field.
pub fn impure_pure(lib: &Lib) -> ClassPlan {
    let f = FieldRef::new("ImpurePure", "calls", FieldType::Int);
    let mut a = Asm::new();
    a.i(I::GetStatic(f.clone())).int(1).arith(ArithOp::Add).i(I::PutStatic(f));
    a.iload(0).i(I::Return(Some(ValueKind::Int)));
    ClassPlan::new("ImpurePure")
        .field(FieldInfo::new(PS, "calls", FieldType::Int))
        .method(static_method("id", "(I)I", &["x"], a.finish()).annotate(lib.pure()))
}

/// A method using `invokedynamic`.
pub fn uses_invokedynamic() -> ClassPlan {
    let mut a = Asm::new();
    a.i(I::InvokeDynamic {
        name: "run".into(),
        descriptor: MethodDescriptor::parse("()Ljava/lang/Runnable;").expect("descriptor"),
    });
    a.i(I::Pop).i(I::Return(None));
    ClassPlan::new("Lambda").method(static_method("make", "()V", &[], a.finish()))
}

/// A cycle with two entry points.
pub fn irreducible() -> ClassPlan {
    let mut a = Asm::new();
    a.var(1, "x", "I");
    a.int(0).istore(1);
    a.iload(0).jump(I::If(Cond::Eq, 0), "b");
    a.label("a").i(I::Iinc(1, 1)).iload(1).int(10).jump(I::IfICmp(Cond::Ge, 0), "out");
    a.label("b").i(I::Iinc(1, 2)).jump(I::Goto(0), "a");
    a.label("out").iload(1).i(I::Return(Some(ValueKind::Int)));
    ClassPlan::new("Irreducible").method(static_method("spin", "(I)I", &["c"], a.finish()))
}

/// A precondition that mentions `old`.
pub fn old_in_requires(lib: &Lib) -> ClassPlan {
    let mut a = Asm::new();
    a.iload(0).iload(0);
    lib.op(&mut a, "old", "(I)I");
    lib.op(&mut a, "eq", "(II)Z");
    a.i(I::Return(Some(ValueKind::Int)));
    let p = static_method("same", "(I)Z", &["x"], a.finish()).annotate(lib.predicate());
    let mut a = Asm::new();
    a.i(I::Return(None));
    let run = static_method("run", "(I)V", &["x"], a.finish()).annotate(lib.require("same"));
    ClassPlan::new("OldRequires").method(p).method(run)
}

/// Error fixtures with the code and exit status each must produce.
pub fn error_cases(lib: &Lib) -> Vec<(ClassPlan, &'static str, i32)> {
    vec![
        (missing_predicate(lib), "E_NO_SUCH_PREDICATE", 2),
        (branching_predicate(lib), "E_NOT_AGGREGABLE", 2),
        (impure_pure(lib), "E_IMPURE_SPEC", 2),
        (uses_invokedynamic(), "E_UNSUPPORTED", 1),
        (irreducible(), "E_IRREDUCIBLE", 1),
        (old_in_requires(lib), "E_OLD_OUTSIDE_ENSURES", 2),
    ]
}

/// Serialize plans, keyed by internal class name.
pub fn build_all(plans: &[ClassPlan]) -> BTreeMap<String, Vec<u8>> {
    plans
        .iter()
        .map(|p| (p.name.clone(), build_class(p).expect("corpus classes build")))
        .collect()
}
