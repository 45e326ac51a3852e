// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared generators and checks for the integration tests.

#![allow(dead_code)]

pub mod criteria;

use bcb_core::boogie::*;
use bcb_core::classfile::{
    build_class, parse_class, ArithOp, ArrayKind, ClassFile, ClassPlan, CmpKind, Cond, Constant,
    FieldType, Instruction as I, MethodPlan, Narrow, NumKind, ValueKind, ACC_PUBLIC, ACC_STATIC,
};
use bcb_core::corpus::{Asm, Lib};
use bcb_core::lift::Value;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CONDS: [Cond; 6] = [Cond::Eq, Cond::Ne, Cond::Lt, Cond::Ge, Cond::Gt, Cond::Le];

pub fn random_int(r: &mut ChaCha8Rng) -> i64 {
    match r.gen_range(0..10) {
        0 => *[i32::MIN, i32::MAX, -1, 0, 1].choose(r).unwrap() as i64,
        1..=3 => r.gen::<i32>() as i64,
        _ => r.gen_range(-20..=20),
    }
}

pub fn static_plan(class: &str, name: &str, desc: &str, a: &mut Asm) -> ClassPlan {
    ClassPlan::new(class).method(MethodPlan::new(ACC_PUBLIC | ACC_STATIC, name, desc).code(a.finish()))
}

pub fn compile(plan: &ClassPlan) -> ClassFile {
    parse_class(&build_class(plan).expect("generated class builds")).expect("generated class parses")
}

/// Straight-line specification bodies over `(int, int, int, boolean, boolean)`
/// using only aggregable operators.
pub struct AggGen<'a> {
    pub r: &'a mut ChaCha8Rng,
    lib: Lib,
    ints: Vec<u16>,
    bools: Vec<u16>,
    bitwise: bool,
}

pub const AGG_DESC_INT: &str = "(IIIZZ)I";
pub const AGG_DESC_BOOL: &str = "(IIIZZ)Z";

impl<'a> AggGen<'a> {
    pub fn new(r: &'a mut ChaCha8Rng) -> AggGen<'a> {
        AggGen {
            r,
            lib: Lib::default(),
            ints: vec![0, 1, 2],
            bools: vec![3, 4],
            bitwise: true,
        }
    }

    /// Without bitwise operators, which the prelude leaves uninterpreted.
    pub fn arithmetic(r: &'a mut ChaCha8Rng) -> AggGen<'a> {
        AggGen {
            bitwise: false,
            ..AggGen::new(r)
        }
    }

    fn op(&self, a: &mut Asm, name: &str, desc: &str) {
        self.lib.op(a, name, desc);
    }

    pub fn int(&mut self, a: &mut Asm, depth: u32) {
        if depth == 0 || self.r.gen_bool(0.25) {
            if self.r.gen_bool(0.6) {
                let s = *self.ints.choose(self.r).unwrap();
                a.iload(s);
            } else {
                let v = random_int(self.r) as i32;
                a.int(v);
            }
            return;
        }
        match self.r.gen_range(0..6) {
            0..=2 => {
                use ArithOp::*;
                let ops: &[ArithOp] = if self.bitwise {
                    &[Add, Sub, Mul, And, Or, Xor, Shl, Shr, Ushr]
                } else {
                    &[Add, Sub, Mul]
                };
                let op = *ops.choose(self.r).unwrap();
                self.int(a, depth - 1);
                self.int(a, depth - 1);
                a.arith(op);
            }
            3 => {
                // Odd divisors never trap.
                let op = if self.r.gen() { ArithOp::Div } else { ArithOp::Rem };
                self.int(a, depth - 1);
                if self.bitwise {
                    self.int(a, depth - 1);
                    a.int(1).arith(ArithOp::Or);
                } else {
                    // d == 0 ? 1 : d
                    let d = *self.ints.choose(self.r).unwrap();
                    a.iload(d).int(0);
                    self.op(a, "eq", "(II)Z");
                    a.int(1).iload(d);
                    self.op(a, "conditional", "(ZII)I");
                }
                a.arith(op);
            }
            4 => {
                self.int(a, depth - 1);
                a.arith(ArithOp::Neg);
            }
            _ => {
                self.bool(a, depth - 1);
                self.int(a, depth - 1);
                self.int(a, depth - 1);
                self.op(a, "conditional", "(ZII)I");
            }
        }
    }

    pub fn bool(&mut self, a: &mut Asm, depth: u32) {
        if depth == 0 || self.r.gen_bool(0.2) {
            if self.r.gen_bool(0.7) {
                let s = *self.bools.choose(self.r).unwrap();
                a.iload(s);
            } else {
                let v = self.r.gen_range(0..2);
                a.int(v);
            }
            return;
        }
        match self.r.gen_range(0..7) {
            0..=1 => {
                let name = *["eq", "neq", "lt", "lte", "gt", "gte"].choose(self.r).unwrap();
                self.int(a, depth - 1);
                self.int(a, depth - 1);
                self.op(a, name, "(II)Z");
            }
            2 => {
                let name = *["eq", "neq"].choose(self.r).unwrap();
                self.bool(a, depth - 1);
                self.bool(a, depth - 1);
                self.op(a, name, "(ZZ)Z");
            }
            3 => {
                self.bool(a, depth - 1);
                self.op(a, "not", "(Z)Z");
            }
            4 => {
                self.bool(a, depth - 1);
                self.bool(a, depth - 1);
                self.op(a, "implies", "(ZZ)Z");
            }
            5 => {
                let op = *[ArithOp::And, ArithOp::Or, ArithOp::Xor].choose(self.r).unwrap();
                self.bool(a, depth - 1);
                self.bool(a, depth - 1);
                a.arith(op);
            }
            _ => {
                self.bool(a, depth - 1);
                self.bool(a, depth - 1);
                self.bool(a, depth - 1);
                self.op(a, "conditional", "(ZZZ)Z");
            }
        }
    }

    pub fn method(&mut self) -> (ClassFile, &'static str) {
        let (plan, desc) = self.plan();
        (compile(&plan), desc)
    }

    /// A method `m` with up to four local definitions before the return.
    pub fn plan(&mut self) -> (ClassPlan, &'static str) {
        let mut a = Asm::new();
        let mut slot = 5;
        for _ in 0..self.r.gen_range(0..=4) {
            let depth = self.r.gen_range(0..=6);
            if self.r.gen() {
                self.int(&mut a, depth);
                a.istore(slot);
                self.ints.push(slot);
            } else {
                self.bool(&mut a, depth);
                a.istore(slot);
                self.bools.push(slot);
            }
            slot += 1;
        }
        let depth = self.r.gen_range(1..=6);
        let desc = if self.r.gen() {
            self.int(&mut a, depth);
            AGG_DESC_INT
        } else {
            self.bool(&mut a, depth);
            AGG_DESC_BOOL
        };
        a.i(I::Return(Some(ValueKind::Int)));
        (static_plan("G", "m", desc, &mut a), desc)
    }

    pub fn inputs(&mut self) -> Vec<Value> {
        let mut v: Vec<Value> = (0..3).map(|_| Value::Int(random_int(self.r))).collect();
        v.extend((0..2).map(|_| Value::bool(self.r.gen())));
        v
    }
}

/// Call-free methods `(int, int, int) -> int` with branches, bounded loops,
/// stack merges, an `int[4]` and a `long` accumulator.
pub struct LiftGen<'a> {
    pub r: &'a mut ChaCha8Rng,
    labels: usize,
    loops: u16,
}

const ARR: u16 = 7;
const LONG: u16 = 12;
const INT_SLOTS: u16 = 7;

impl<'a> LiftGen<'a> {
    pub fn new(r: &'a mut ChaCha8Rng) -> LiftGen<'a> {
        LiftGen { r, labels: 0, loops: 0 }
    }

    fn fresh(&mut self) -> String {
        self.labels += 1;
        format!("g{}", self.labels)
    }

    fn index(&mut self, a: &mut Asm) {
        self.int(a, 1);
        a.int(3).arith(ArithOp::And);
    }

    pub fn int(&mut self, a: &mut Asm, depth: u32) {
        if depth == 0 || self.r.gen_bool(0.3) {
            match self.r.gen_range(0..6) {
                0..=2 => {
                    let s = self.r.gen_range(0..INT_SLOTS);
                    a.iload(s);
                }
                3 => {
                    let v = random_int(self.r) as i32;
                    a.int(v);
                }
                4 => {
                    a.aload(ARR).i(I::ArrayLength);
                }
                _ => {
                    a.i(I::Load(ValueKind::Long, LONG)).i(I::Convert(NumKind::Long, NumKind::Int));
                }
            }
            return;
        }
        match self.r.gen_range(0..9) {
            0..=2 => {
                use ArithOp::*;
                let op = *[Add, Sub, Mul, Div, Rem, And, Or, Xor, Shl, Shr, Ushr].choose(self.r).unwrap();
                self.int(a, depth - 1);
                self.int(a, depth - 1);
                a.arith(op);
            }
            3 => {
                self.int(a, depth - 1);
                a.arith(ArithOp::Neg);
            }
            4 => {
                let n = *[Narrow::Byte, Narrow::Char, Narrow::Short].choose(self.r).unwrap();
                self.int(a, depth - 1);
                a.i(I::Narrow(n));
            }
            5 => {
                // cond ? x : y, merged on the operand stack
                let (t, end) = (self.fresh(), self.fresh());
                self.cond(a, &t, depth - 1);
                self.int(a, depth - 1);
                a.jump(I::Goto(0), &end).label(&t);
                self.int(a, depth - 1);
                a.label(&end);
            }
            6 => {
                a.aload(ARR);
                self.index(a);
                a.i(I::ArrayLoad(ArrayKind::Int));
            }
            7 => {
                let op = *[ArithOp::Add, ArithOp::Mul, ArithOp::Sub, ArithOp::Shr].choose(self.r).unwrap();
                self.int(a, depth - 1);
                a.i(I::Convert(NumKind::Int, NumKind::Long));
                if op == ArithOp::Shr {
                    self.int(a, depth - 1);
                } else {
                    self.int(a, depth - 1);
                    a.i(I::Convert(NumKind::Int, NumKind::Long));
                }
                a.i(I::Arith(NumKind::Long, op)).i(I::Convert(NumKind::Long, NumKind::Int));
            }
            _ => {
                if self.r.gen() {
                    self.int(a, depth - 1);
                    a.i(I::Dup).arith(ArithOp::Mul);
                } else {
                    self.int(a, depth - 1);
                    self.int(a, depth - 1);
                    a.i(I::Swap).arith(ArithOp::Sub);
                }
            }
        }
    }

    /// Jump to `target` when a random condition holds.
    fn cond(&mut self, a: &mut Asm, target: &str, depth: u32) {
        let c = *CONDS.choose(self.r).unwrap();
        match self.r.gen_range(0..3) {
            0 => {
                self.int(a, depth);
                a.jump(I::If(c, 0), target);
            }
            1 => {
                self.int(a, depth);
                self.int(a, depth);
                a.jump(I::IfICmp(c, 0), target);
            }
            _ => {
                a.i(I::Load(ValueKind::Long, LONG));
                self.int(a, depth);
                a.i(I::Convert(NumKind::Int, NumKind::Long)).i(I::Compare(CmpKind::Lcmp));
                a.jump(I::If(c, 0), target);
            }
        }
    }

    /// Emit a statement; returns whether control can fall through it.
    fn stmt(&mut self, a: &mut Asm, depth: u32, tail: bool) -> bool {
        let k = self.r.gen_range(0..if depth == 0 { 5 } else { 8 });
        match k {
            0 | 1 => {
                let d = self.r.gen_range(0..=3);
                self.int(a, d);
                let s = self.r.gen_range(0..INT_SLOTS);
                a.istore(s);
            }
            2 => {
                let s = self.r.gen_range(0..INT_SLOTS);
                let by = self.r.gen_range(-3..=3);
                a.i(I::Iinc(s, by));
            }
            3 => {
                a.aload(ARR);
                self.index(a);
                self.int(a, 2);
                a.i(I::ArrayStore(ArrayKind::Int));
            }
            4 => {
                let op = *[ArithOp::Add, ArithOp::Mul, ArithOp::Xor].choose(self.r).unwrap();
                a.i(I::Load(ValueKind::Long, LONG));
                self.int(a, 2);
                a.i(I::Convert(NumKind::Int, NumKind::Long));
                a.i(I::Arith(NumKind::Long, op)).i(I::Store(ValueKind::Long, LONG));
            }
            5 | 6 => {
                let (els, end) = (self.fresh(), self.fresh());
                self.cond(a, &els, 2);
                let falls = self.block(a, depth - 1, tail);
                if falls {
                    a.jump(I::Goto(0), &end);
                }
                a.label(&els);
                self.block(a, depth - 1, false);
                a.label(&end);
            }
            _ if self.loops < 2 => {
                let ctr = 8 + self.loops;
                self.loops += 1;
                let (head, exit) = (self.fresh(), self.fresh());
                let n = self.r.gen_range(0..4);
                a.int(0).istore(ctr);
                a.label(&head).iload(ctr).int(n).jump(I::IfICmp(Cond::Ge, 0), &exit);
                self.block(a, depth - 1, false);
                a.i(I::Iinc(ctr, 1)).jump(I::Goto(0), &head).label(&exit);
                self.loops -= 1;
            }
            _ => {
                if tail {
                    self.int(a, 2);
                    a.i(I::Return(Some(ValueKind::Int)));
                    return false;
                }
                a.i(I::Iinc(3, 1));
            }
        }
        true
    }

    fn block(&mut self, a: &mut Asm, depth: u32, tail: bool) -> bool {
        let n = self.r.gen_range(1..=3);
        for i in 0..n {
            if !self.stmt(a, depth, tail && i + 1 == n) {
                return false;
            }
        }
        true
    }

    pub fn method(&mut self) -> ClassFile {
        compile(&self.plan())
    }

    pub fn plan(&mut self) -> ClassPlan {
        let mut a = Asm::new();
        for s in 3..INT_SLOTS {
            let v = self.r.gen_range(-5..=5);
            a.int(v).istore(s);
        }
        a.int(4).i(I::NewArray(FieldType::Int)).i(I::Store(ValueKind::Ref, ARR));
        a.i(I::Const(Constant::Long(self.r.gen_range(-9..=9))))
            .i(I::Store(ValueKind::Long, LONG));
        if self.block(&mut a, 3, true) {
            self.int(&mut a, 3);
            a.i(I::Return(Some(ValueKind::Int)));
        }
        static_plan("L", "m", "(III)I", &mut a)
    }

    pub fn inputs(&mut self) -> Vec<Value> {
        (0..3).map(|_| Value::Int(random_int(self.r))).collect()
    }
}

/// Random Boogie ASTs in the printed subset.
pub struct AstGen<'a> {
    pub r: &'a mut ChaCha8Rng,
}

const IDENTS: [&str; 12] = [
    "x", "y", "h", "#heap", "@ret", "a.b", "C.f#1a2b3c4d", "$t0", "i$1", "#r0", "k'", "Counter.count",
];

impl<'a> AstGen<'a> {
    fn ident(&mut self) -> String {
        IDENTS.choose(self.r).unwrap().to_string()
    }

    pub fn ty(&mut self, depth: u32) -> BType {
        match if depth == 0 { self.r.gen_range(0..4) } else { self.r.gen_range(0..6) } {
            0 => BType::Int,
            1 => BType::Real,
            2 => BType::Bool,
            3 => BType::named(["Reference", "Heap", "a", "Type"].choose(self.r).unwrap()),
            4 => BType::Named("Field".into(), vec![self.ty(depth - 1)]),
            _ => {
                let tparams = if self.r.gen() { vec!["a".to_string()] } else { vec![] };
                let domain = (0..self.r.gen_range(1..=2)).map(|_| self.ty(depth - 1)).collect();
                BType::Map {
                    tparams,
                    domain,
                    range: Box::new(self.ty(depth - 1)),
                }
            }
        }
    }

    pub fn expr(&mut self, depth: u32) -> BExpr {
        if depth == 0 || self.r.gen_bool(0.2) {
            return match self.r.gen_range(0..5) {
                0 => BExpr::Int(self.r.gen_range(-1000..=1000)),
                1 => {
                    let sign = if self.r.gen() { "-" } else { "" };
                    let exp = if self.r.gen() { format!("e{}", self.r.gen_range(-3..=3)) } else { String::new() };
                    BExpr::Real(format!("{sign}{}.{}{exp}", self.r.gen_range(0..100), self.r.gen_range(0..100)))
                }
                2 => BExpr::Bool(self.r.gen()),
                _ => BExpr::Id(self.ident()),
            };
        }
        let d = depth - 1;
        match self.r.gen_range(0..11) {
            0 => {
                let n = self.r.gen_range(0..=3);
                BExpr::App(self.ident(), (0..n).map(|_| self.expr(d)).collect())
            }
            1 => BExpr::Select(Box::new(self.expr(d)), vec![self.expr(d)]),
            2 => BExpr::Store(Box::new(self.expr(d)), vec![self.expr(d)], Box::new(self.expr(d))),
            3 => BExpr::Old(Box::new(self.expr(d))),
            4 => BExpr::Unary(
                if self.r.gen() { UnOp::Not } else { UnOp::Neg },
                Box::new(self.expr(d)),
            ),
            5..=7 => {
                let op = *BinOp::all().choose(self.r).unwrap();
                BExpr::bin(op, self.expr(d), self.expr(d))
            }
            8 => BExpr::ite(self.expr(d), self.expr(d), self.expr(d)),
            9 => BExpr::Quant {
                kind: if self.r.gen() { Quantifier::Forall } else { Quantifier::Exists },
                tparams: if self.r.gen() { vec!["a".into()] } else { vec![] },
                vars: (0..self.r.gen_range(1..=2)).map(|_| (self.ident(), self.ty(1))).collect(),
                body: Box::new(self.expr(d)),
            },
            _ => BExpr::Coerce(Box::new(self.expr(d)), self.ty(1)),
        }
    }

    fn stmt(&mut self, depth: u32) -> BStmt {
        match self.r.gen_range(0..if depth == 0 { 7 } else { 8 }) {
            0 => BStmt::Label(format!("L{}", self.r.gen_range(0..9))),
            1 => BStmt::Assign(self.ident(), self.expr(3)),
            2 => BStmt::Call {
                outs: (0..self.r.gen_range(0..=2)).map(|_| self.ident()).collect(),
                proc: self.ident(),
                args: (0..self.r.gen_range(0..=2)).map(|_| self.expr(2)).collect(),
            },
            3 => BStmt::Goto((0..self.r.gen_range(1..=2)).map(|i| format!("L{i}")).collect()),
            4 => BStmt::Assert(self.expr(3)),
            5 => BStmt::Assume(self.expr(3)),
            6 => BStmt::Return,
            _ => BStmt::If {
                cond: self.expr(2),
                then: (0..self.r.gen_range(0..=2)).map(|_| self.stmt(depth - 1)).collect(),
                els: if self.r.gen() {
                    Some((0..self.r.gen_range(0..=2)).map(|_| self.stmt(depth - 1)).collect())
                } else {
                    None
                },
            },
        }
    }

    fn params(&mut self, max: usize) -> Vec<Param> {
        (0..self.r.gen_range(0..=max)).map(|_| Param::new(&self.ident(), self.ty(1))).collect()
    }

    pub fn decl(&mut self) -> Decl {
        match self.r.gen_range(0..7) {
            0 => Decl::Type {
                name: ["Reference", "Field", "Heap", "Type"].choose(self.r).unwrap().to_string(),
                params: if self.r.gen() { vec!["a".into()] } else { vec![] },
                def: if self.r.gen() { Some(self.ty(2)) } else { None },
            },
            1 => Decl::Const {
                name: self.ident(),
                ty: self.ty(1),
                unique: self.r.gen(),
            },
            2 => Decl::Var(Param::new(&self.ident(), self.ty(2))),
            3 => Decl::Function(Function {
                name: self.ident(),
                tparams: if self.r.gen() { vec!["a".into()] } else { vec![] },
                params: self.params(3),
                ret: self.ty(1),
                body: if self.r.gen() { Some(self.expr(4)) } else { None },
            }),
            4 => Decl::Axiom(self.expr(4)),
            _ => {
                let mut specs = Vec::new();
                for _ in 0..self.r.gen_range(0..=3) {
                    specs.push(match self.r.gen_range(0..3) {
                        0 => Spec::Requires(self.expr(3)),
                        1 => Spec::Ensures(self.expr(3)),
                        _ => Spec::Modifies(vec![self.ident()]),
                    });
                }
                Decl::Procedure(Procedure {
                    name: self.ident(),
                    params: self.params(2),
                    returns: self.params(1),
                    specs,
                    body: if self.r.gen() {
                        Some(ProcBody {
                            locals: self.params(2),
                            stmts: (0..self.r.gen_range(0..=6)).map(|_| self.stmt(2)).collect(),
                        })
                    } else {
                        None
                    },
                })
            }
        }
    }

    pub fn program(&mut self) -> Program {
        Program {
            decls: (0..self.r.gen_range(1..=6)).map(|_| self.decl()).collect(),
        }
    }
}

/// Replace mangled names `Pkg.Cls.member#1234abcd` with `member`.
pub fn demangle(text: &str) -> String {
    static RE: std::sync::LazyLock<regex::Regex> =
        std::sync::LazyLock::new(|| regex::Regex::new(r"(?:[\w$]+\.)+([\w$]+)#[0-9a-f]{8}").unwrap());
    RE.replace_all(text, "$1").into_owned()
}

/// Collapse runs of whitespace and drop blank lines.
pub fn normalize(text: &str) -> String {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn golden(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The printed text of the declaration named `name` (after demangling), up
/// to and excluding any procedure body.
pub fn decl_text(program: &Program, name: &str, header_only: bool) -> Option<String> {
    let d = program
        .decls
        .iter()
        .find(|d| d.name().is_some_and(|n| demangle(n) == name))?;
    let d = match (d, header_only) {
        (Decl::Procedure(p), true) => Decl::Procedure(Procedure { body: None, ..p.clone() }),
        _ => d.clone(),
    };
    Some(demangle(&print_decl(&d)))
}
