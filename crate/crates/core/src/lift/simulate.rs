// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::LiftError;
use crate::classfile::{
    ArithOp, ArrayKind, CmpKind, Cond, Constant, FieldType, Instruction, MethodInfo, NumKind,
    ValueKind,
};
use crate::classfile::insn::Narrow;
use crate::ir::*;
use crate::spec::Namespace;

type Result<T> = std::result::Result<T, LiftError>;

fn kind_of(t: &Type) -> ValueKind {
    match t {
        Type::Long => ValueKind::Long,
        Type::Float => ValueKind::Float,
        Type::Double => ValueKind::Double,
        t if t.is_reference() => ValueKind::Ref,
        _ => ValueKind::Int,
    }
}

fn default_type(k: ValueKind) -> Type {
    match k {
        ValueKind::Int => Type::Int,
        ValueKind::Long => Type::Long,
        ValueKind::Float => Type::Float,
        ValueKind::Double => Type::Double,
        ValueKind::Ref => Type::object(),
    }
}

fn num_type(k: NumKind) -> Type {
    default_type(k.value_kind())
}

fn cond_op(c: Cond) -> BinOp {
    match c {
        Cond::Eq => BinOp::Eq,
        Cond::Ne => BinOp::Ne,
        Cond::Lt => BinOp::Lt,
        Cond::Ge => BinOp::Ge,
        Cond::Gt => BinOp::Gt,
        Cond::Le => BinOp::Le,
    }
}

fn arith_op(op: ArithOp) -> BinOp {
    match op {
        ArithOp::Add => BinOp::Add,
        ArithOp::Sub => BinOp::Sub,
        ArithOp::Mul => BinOp::Mul,
        ArithOp::Div => BinOp::Div,
        ArithOp::Rem => BinOp::Rem,
        ArithOp::Shl => BinOp::Shl,
        ArithOp::Shr => BinOp::Shr,
        ArithOp::Ushr => BinOp::Ushr,
        ArithOp::And => BinOp::And,
        ArithOp::Or => BinOp::Or,
        ArithOp::Xor => BinOp::Xor,
        ArithOp::Neg => unreachable!("negation is unary"),
    }
}

fn array_elem_type(k: ArrayKind, array: &Type) -> Type {
    if let Type::Array(e) = array {
        let fits = match k {
            ArrayKind::Byte => matches!(**e, Type::Byte | Type::Bool),
            ArrayKind::Ref => e.is_reference(),
            _ => kind_of(e) == k.value_kind() && !matches!(**e, Type::Bool | Type::Byte),
        };
        if fits {
            return (**e).clone();
        }
    }
    match k {
        ArrayKind::Int => Type::Int,
        ArrayKind::Long => Type::Long,
        ArrayKind::Float => Type::Float,
        ArrayKind::Double => Type::Double,
        ArrayKind::Ref => Type::object(),
        ArrayKind::Byte => Type::Byte,
        ArrayKind::Char => Type::Char,
        ArrayKind::Short => Type::Short,
    }
}

fn literal(c: &Constant) -> Expr {
    let (lit, ty) = match c {
        Constant::Null => (Literal::Null, Type::Null),
        Constant::Int(v) => (Literal::Int(*v as i64), Type::Int),
        Constant::Long(v) => (Literal::Int(*v), Type::Long),
        Constant::Float(v) => (Literal::Float(*v as f64), Type::Float),
        Constant::Double(v) => (Literal::Float(*v), Type::Double),
        Constant::String(s) => (Literal::String(s.clone()), Type::Ref("java/lang/String".into())),
        Constant::Class(s) => (Literal::Class(s.clone()), Type::Ref("java/lang/Class".into())),
    };
    Expr::new(ExprKind::Lit(lit), ty)
}

struct Lifter<'a> {
    m: &'a MethodInfo,
    ns: &'a Namespace,
    body: Body,
    locals: HashMap<(u16, ValueKind), LocalId>,
}

/// Per-block simulation state.
struct Frame {
    stack: Vec<Expr>,
    out: Vec<Stmt>,
    offset: u32,
}

impl Frame {
    fn bad(&self, message: &str) -> LiftError {
        LiftError::BadCode {
            offset: self.offset,
            message: message.to_string(),
        }
    }

    fn pop(&mut self) -> Result<Expr> {
        self.stack.pop().ok_or_else(|| self.bad("operand stack underflow"))
    }

    /// Pop entries covering exactly `slots` stack slots, bottom first.
    fn pop_slots(&mut self, slots: u16) -> Result<Vec<Expr>> {
        let mut taken = 0;
        let mut out = Vec::new();
        while taken < slots {
            let e = self.pop()?;
            taken += e.ty.slots();
            out.push(e);
        }
        if taken != slots {
            return Err(self.bad("stack manipulation splits a two-slot value"));
        }
        out.reverse();
        Ok(out)
    }

    fn emit(&mut self, kind: StmtKind) {
        self.out.push(Stmt::new(kind, Some(self.offset)));
    }
}

impl<'a> Lifter<'a> {
    fn spill(&mut self, f: &mut Frame, pred: &dyn Fn(&Expr) -> bool) {
        for i in 0..f.stack.len() {
            if pred(&f.stack[i]) {
                let e = f.stack[i].clone();
                let t = self.body.new_temp(e.ty.clone());
                f.emit(StmtKind::Assign(LValue::Local(t), e));
                f.stack[i] = self.body.local_expr(t);
            }
        }
    }

    /// Fix the evaluation point of every pending non-trivial value before a
    /// side effect happens.
    fn spill_all(&mut self, f: &mut Frame) {
        self.spill(f, &|e| !e.is_atomic());
    }

    fn local(&self, slot: u16, kind: ValueKind, offset: u32) -> Result<LocalId> {
        self.locals
            .get(&(slot, kind))
            .copied()
            .ok_or_else(|| LiftError::BadCode {
                offset,
                message: format!("local slot {slot} not available"),
            })
    }

    fn step(&mut self, f: &mut Frame, insn: &Instruction) -> Result<()> {
        use Instruction as I;
        match insn {
            I::Nop => {}
            I::Const(c) => f.stack.push(literal(c)),
            I::Load(k, slot) => {
                let id = self.local(*slot, *k, f.offset)?;
                f.stack.push(self.body.local_expr(id));
            }
            I::Store(k, slot) => {
                let id = self.local(*slot, *k, f.offset)?;
                let v = f.pop()?;
                self.spill(f, &|e| e.reads_local(id));
                f.emit(StmtKind::Assign(LValue::Local(id), v));
            }
            I::Iinc(slot, delta) => {
                let id = self.local(*slot, ValueKind::Int, f.offset)?;
                self.spill(f, &|e| e.reads_local(id));
                let sum = Expr::binary(
                    BinOp::Add,
                    self.body.local_expr(id),
                    Expr::int(*delta as i64),
                    Type::Int,
                );
                f.emit(StmtKind::Assign(LValue::Local(id), sum));
            }
            I::ArrayLoad(k) => {
                let i = f.pop()?;
                let a = f.pop()?;
                let ty = array_elem_type(*k, &a.ty);
                f.stack
                    .push(Expr::new(ExprKind::ArrayRead(Box::new(a), Box::new(i)), ty));
            }
            I::ArrayStore(_) => {
                let v = f.pop()?;
                let i = f.pop()?;
                let a = f.pop()?;
                self.spill_all(f);
                f.emit(StmtKind::Assign(LValue::Array(a, i), v));
            }
            I::Pop | I::Pop2 => {
                let vals = f.pop_slots(if matches!(insn, I::Pop) { 1 } else { 2 })?;
                self.spill_all(f);
                for v in vals {
                    if matches!(v.kind, ExprKind::Call(_)) {
                        f.emit(StmtKind::Invoke(v));
                    } else if !v.is_atomic() {
                        let t = self.body.new_temp(v.ty.clone());
                        f.emit(StmtKind::Assign(LValue::Local(t), v));
                    }
                }
            }
            I::Dup | I::DupX1 | I::DupX2 | I::Dup2 | I::Dup2X1 | I::Dup2X2 => {
                let (a, b) = match insn {
                    I::Dup => (1, 0),
                    I::DupX1 => (1, 1),
                    I::DupX2 => (1, 2),
                    I::Dup2 => (2, 0),
                    I::Dup2X1 => (2, 1),
                    _ => (2, 2),
                };
                let n = f.stack.len();
                let top = f.pop_slots(a)?;
                let under = f.pop_slots(b)?;
                let depth = top.len() + under.len();
                f.stack.extend(under);
                f.stack.extend(top);
                if f.stack[n - depth..].iter().any(|e| !e.is_atomic()) {
                    self.spill_all(f);
                }
                let top = f.pop_slots(a)?;
                let under = f.pop_slots(b)?;
                f.stack.extend(top.iter().cloned());
                f.stack.extend(under);
                f.stack.extend(top);
            }
            I::Swap => {
                self.spill_all(f);
                let top = f.pop()?;
                let under = f.pop()?;
                if top.ty.slots() != 1 || under.ty.slots() != 1 {
                    return Err(f.bad("swap of a two-slot value"));
                }
                f.stack.push(top);
                f.stack.push(under);
            }
            I::Arith(k, op) => {
                let ty = num_type(*k);
                if *op == ArithOp::Neg {
                    let a = f.pop()?;
                    f.stack.push(Expr::new(ExprKind::Neg(Box::new(a)), ty));
                } else {
                    let b = f.pop()?;
                    let a = f.pop()?;
                    f.stack.push(Expr::binary(arith_op(*op), a, b, ty));
                }
            }
            I::Convert(_, to) => {
                let a = f.pop()?;
                f.stack.push(Expr::new(ExprKind::Cast(Box::new(a)), num_type(*to)));
            }
            I::Narrow(n) => {
                let a = f.pop()?;
                let ty = match n {
                    Narrow::Byte => Type::Byte,
                    Narrow::Char => Type::Char,
                    Narrow::Short => Type::Short,
                };
                f.stack.push(Expr::new(ExprKind::Cast(Box::new(a)), ty));
            }
            I::Compare(c) => {
                let b = f.pop()?;
                let a = f.pop()?;
                let op = match c {
                    CmpKind::Lcmp => BinOp::Cmp,
                    CmpKind::Fcmpl | CmpKind::Dcmpl => BinOp::Cmpl,
                    CmpKind::Fcmpg | CmpKind::Dcmpg => BinOp::Cmpg,
                };
                f.stack.push(Expr::binary(op, a, b, Type::Int));
            }
            I::ArrayLength => {
                let a = f.pop()?;
                f.stack
                    .push(Expr::new(ExprKind::ArrayLength(Box::new(a)), Type::Int));
            }
            I::GetStatic(r) => f.stack.push(Expr::new(
                ExprKind::Static(r.clone()),
                Type::from_field(&r.descriptor),
            )),
            I::PutStatic(r) => {
                let v = f.pop()?;
                self.spill_all(f);
                f.emit(StmtKind::Assign(LValue::Static(r.clone()), v));
            }
            I::GetField(r) => {
                let o = f.pop()?;
                f.stack.push(Expr::new(
                    ExprKind::Field(Box::new(o), r.clone()),
                    Type::from_field(&r.descriptor),
                ));
            }
            I::PutField(r) => {
                let v = f.pop()?;
                let o = f.pop()?;
                self.spill_all(f);
                f.emit(StmtKind::Assign(LValue::Field(o, r.clone()), v));
            }
            I::Invoke { kind, method, .. } => {
                let mut args = Vec::new();
                for _ in &method.descriptor.params {
                    args.push(f.pop()?);
                }
                args.reverse();
                let receiver = if kind.has_receiver() {
                    Some(f.pop()?)
                } else {
                    None
                };
                let ret = method.descriptor.ret.as_ref().map(Type::from_field);
                let intrinsic = if receiver.is_none() {
                    self.ns.recognize(method)
                } else {
                    None
                };
                let e = match intrinsic {
                    Some(ik) => Expr::new(
                        ExprKind::Intrinsic(Box::new(Intrinsic {
                            kind: ik,
                            descriptor: method.descriptor.clone(),
                            args,
                        })),
                        ret.clone().unwrap_or(Type::Bool),
                    ),
                    None => {
                        self.spill_all(f);
                        Expr::new(
                            ExprKind::Call(Box::new(Call {
                                kind: *kind,
                                method: method.clone(),
                                receiver,
                                args,
                            })),
                            ret.clone().unwrap_or(Type::Int),
                        )
                    }
                };
                if ret.is_none() {
                    self.spill_all(f);
                    f.emit(StmtKind::Invoke(e));
                } else {
                    f.stack.push(e);
                }
            }
            I::New(c) => {
                self.spill_all(f);
                let t = self.body.new_temp(Type::Ref(c.clone()));
                f.emit(StmtKind::Assign(
                    LValue::Local(t),
                    Expr::new(ExprKind::New(c.clone()), Type::Ref(c.clone())),
                ));
                f.stack.push(self.body.local_expr(t));
            }
            I::NewArray(elem) => {
                let n = f.pop()?;
                self.spill_all(f);
                let elem = Type::from_field(elem);
                let ty = Type::Array(Box::new(elem.clone()));
                let t = self.body.new_temp(ty.clone());
                f.emit(StmtKind::Assign(
                    LValue::Local(t),
                    Expr::new(ExprKind::NewArray(elem, Box::new(n)), ty),
                ));
                f.stack.push(self.body.local_expr(t));
            }
            I::CheckCast(c) => {
                let a = f.pop()?;
                let ty = Type::from_class_operand(c);
                f.stack.push(Expr::new(ExprKind::Cast(Box::new(a)), ty));
            }
            I::InstanceOf(c) => {
                let a = f.pop()?;
                f.stack.push(Expr::new(
                    ExprKind::InstanceOf(Box::new(a), Type::from_class_operand(c)),
                    Type::Bool,
                ));
            }
            I::MultiANewArray(..)
            | I::AThrow
            | I::InvokeDynamic { .. }
            | I::MonitorEnter
            | I::MonitorExit => {
                return Err(LiftError::Unsupported {
                    feature: insn.mnemonic(),
                    offset: Some(f.offset),
                })
            }
            I::If(..)
            | I::IfICmp(..)
            | I::IfACmp(..)
            | I::IfNull(_)
            | I::IfNonNull(_)
            | I::Goto(_)
            | I::TableSwitch { .. }
            | I::LookupSwitch { .. }
            | I::Return(_) => unreachable!("control transfer handled by block simulation"),
        }
        Ok(())
    }

    fn branch_condition(&mut self, f: &mut Frame, insn: &Instruction) -> Result<Expr> {
        use Instruction as I;
        let cond = match insn {
            I::If(c, _) => {
                let v = f.pop()?;
                match v.kind {
                    ExprKind::Binary(BinOp::Cmp, a, b) => Expr::binary(cond_op(*c), *a, *b, Type::Bool),
                    _ => Expr::binary(cond_op(*c), v, Expr::int(0), Type::Bool),
                }
            }
            I::IfICmp(c, _) | I::IfACmp(c, _) => {
                let b = f.pop()?;
                let a = f.pop()?;
                Expr::binary(cond_op(*c), a, b, Type::Bool)
            }
            I::IfNull(_) | I::IfNonNull(_) => {
                let a = f.pop()?;
                let op = if matches!(insn, I::IfNull(_)) {
                    BinOp::Eq
                } else {
                    BinOp::Ne
                };
                let null = Expr::new(ExprKind::Lit(Literal::Null), Type::Null);
                Expr::binary(op, a, null, Type::Bool)
            }
            _ => unreachable!(),
        };
        Ok(cond)
    }
}

struct BlockInfo {
    start: usize,
    end: usize,
}

/// Lift a method body into the IR. Branches become `if`/`goto` statements,
/// operand-stack values become expression trees, and values live across
/// block boundaries go through per-block merge temporaries.
pub fn simulate_stack(class: &str, m: &MethodInfo, ns: &Namespace) -> Result<Body> {
    let code = m.code.as_ref().ok_or_else(|| LiftError::Unsupported {
        feature: "method without code".into(),
        offset: None,
    })?;
    if let Some(h) = code.exception_table.first() {
        return Err(LiftError::Unsupported {
            feature: "exception handlers".into(),
            offset: Some(h.handler),
        });
    }
    let insns = &code.instructions;
    if insns.is_empty() {
        return Err(LiftError::BadCode {
            offset: 0,
            message: "empty code".into(),
        });
    }
    for (off, insn) in insns {
        if matches!(
            insn,
            Instruction::AThrow
                | Instruction::InvokeDynamic { .. }
                | Instruction::MultiANewArray(..)
                | Instruction::MonitorEnter
                | Instruction::MonitorExit
        ) {
            return Err(LiftError::Unsupported {
                feature: insn.mnemonic(),
                offset: Some(*off),
            });
        }
    }
    let index_of = |off: u32, at: u32| {
        code.index_of(off).ok_or(LiftError::BadCode {
            offset: at,
            message: format!("branch to {off} is not an instruction boundary"),
        })
    };

    // Basic blocks.
    let mut leaders = BTreeSet::new();
    leaders.insert(0usize);
    let mut targeted = BTreeSet::new();
    for (i, (off, insn)) in insns.iter().enumerate() {
        let ts = insn.targets();
        for t in &ts {
            let ti = index_of(*t, *off)?;
            leaders.insert(ti);
            targeted.insert(ti);
        }
        if (!ts.is_empty() || insn.is_terminal()) && i + 1 < insns.len() {
            leaders.insert(i + 1);
        }
    }
    let starts: Vec<usize> = leaders.into_iter().collect();
    let blocks: Vec<BlockInfo> = starts
        .iter()
        .enumerate()
        .map(|(b, &s)| BlockInfo {
            start: s,
            end: starts.get(b + 1).copied().unwrap_or(insns.len()),
        })
        .collect();
    let block_of: HashMap<usize, usize> = starts.iter().enumerate().map(|(b, &s)| (s, b)).collect();

    let mut lifter = Lifter {
        m,
        ns,
        body: Body::new(m.method_ref(class), m.is_static()),
        locals: HashMap::new(),
    };
    let entry = lifter.declare_locals(code)?;

    let mut labels: HashMap<usize, Label> = HashMap::new();
    for (b, blk) in blocks.iter().enumerate() {
        if targeted.contains(&blk.start) {
            let l = lifter.body.new_label();
            labels.insert(b, l);
        }
    }

    let mut entry_stacks: Vec<Option<Vec<Expr>>> = vec![None; blocks.len()];
    let mut lowered: Vec<Option<Vec<Stmt>>> = vec![None; blocks.len()];
    entry_stacks[0] = Some(Vec::new());
    let mut queue = VecDeque::from([0usize]);
    let mut queued = vec![false; blocks.len()];
    queued[0] = true;

    while let Some(b) = queue.pop_front() {
        let blk = &blocks[b];
        let mut f = Frame {
            stack: entry_stacks[b].clone().unwrap_or_default(),
            out: Vec::new(),
            offset: insns[blk.start].0,
        };
        let mut succs: Vec<usize> = Vec::new();
        let mut terminated = false;
        for (off, insn) in &insns[blk.start..blk.end] {
            f.offset = *off;
            use Instruction as I;
            match insn {
                I::If(_, t) | I::IfICmp(_, t) | I::IfACmp(_, t) | I::IfNull(t) | I::IfNonNull(t) => {
                    let cond = lifter.branch_condition(&mut f, insn)?;
                    let tb = block_of[&index_of(*t, *off)?];
                    let fall = b + 1;
                    if fall >= blocks.len() {
                        return Err(f.bad("conditional branch falls off the end of the code"));
                    }
                    let cond = lifter.transfer(&mut f, &[tb, fall], Some(cond), &mut entry_stacks, &blocks, insns)?;
                    f.emit(StmtKind::If(cond.expect("condition kept"), labels[&tb]));
                    succs = vec![tb, fall];
                    terminated = true;
                }
                I::Goto(t) => {
                    let tb = block_of[&index_of(*t, *off)?];
                    lifter.transfer(&mut f, &[tb], None, &mut entry_stacks, &blocks, insns)?;
                    f.emit(StmtKind::Goto(labels[&tb]));
                    succs = vec![tb];
                    terminated = true;
                }
                I::TableSwitch { default, .. } | I::LookupSwitch { default, .. } => {
                    let cases: Vec<(i64, u32)> = match insn {
                        I::TableSwitch { low, targets, .. } => targets
                            .iter()
                            .enumerate()
                            .map(|(k, t)| (*low as i64 + k as i64, *t))
                            .collect(),
                        I::LookupSwitch { pairs, .. } => {
                            pairs.iter().map(|(k, t)| (*k as i64, *t)).collect()
                        }
                        _ => unreachable!(),
                    };
                    let key = f.pop()?;
                    lifter.spill_all(&mut f);
                    let key = if key.is_atomic() {
                        key
                    } else {
                        let t = lifter.body.new_temp(Type::Int);
                        f.emit(StmtKind::Assign(LValue::Local(t), key));
                        lifter.body.local_expr(t)
                    };
                    let db = block_of[&index_of(*default, *off)?];
                    let mut targets = Vec::new();
                    for (_, t) in &cases {
                        targets.push(block_of[&index_of(*t, *off)?]);
                    }
                    let mut all = targets.clone();
                    all.push(db);
                    all.sort();
                    all.dedup();
                    let key = lifter
                        .transfer(&mut f, &all, Some(key), &mut entry_stacks, &blocks, insns)?
                        .expect("key kept");
                    for ((v, _), tb) in cases.iter().zip(&targets) {
                        let c = Expr::binary(BinOp::Eq, key.clone(), Expr::int(*v), Type::Bool);
                        f.emit(StmtKind::If(c, labels[tb]));
                    }
                    f.emit(StmtKind::Goto(labels[&db]));
                    succs = all;
                    terminated = true;
                }
                I::Return(k) => {
                    let v = match k {
                        Some(_) => Some(f.pop()?),
                        None => None,
                    };
                    f.emit(StmtKind::Return(v));
                    terminated = true;
                }
                _ => lifter.step(&mut f, insn)?,
            }
            if terminated {
                break;
            }
        }
        if !terminated {
            let fall = b + 1;
            if fall >= blocks.len() {
                return Err(f.bad("control falls off the end of the code"));
            }
            lifter.transfer(&mut f, &[fall], None, &mut entry_stacks, &blocks, insns)?;
            succs = vec![fall];
        }
        lowered[b] = Some(f.out);
        for s in succs {
            if !queued[s] {
                queued[s] = true;
                queue.push_back(s);
            }
        }
    }

    let mut stmts = entry;
    for (b, out) in lowered.into_iter().enumerate() {
        if let Some(out) = out {
            if let Some(l) = labels.get(&b) {
                stmts.push(Stmt::new(StmtKind::Label(*l), Some(insns[blocks[b].start].0)));
            }
            stmts.extend(out);
        }
    }
    lifter.body.stmts = stmts;
    Ok(lifter.body)
}

impl<'a> Lifter<'a> {
    /// Move the operand stack into the merge temporaries of `succs`, keeping
    /// `keep` (a branch condition or switch key) valid afterwards.
    fn transfer(
        &mut self,
        f: &mut Frame,
        succs: &[usize],
        keep: Option<Expr>,
        entry_stacks: &mut [Option<Vec<Expr>>],
        blocks: &[BlockInfo],
        insns: &[(u32, Instruction)],
    ) -> Result<Option<Expr>> {
        if f.stack.is_empty() {
            for &s in succs {
                match &entry_stacks[s] {
                    None => entry_stacks[s] = Some(Vec::new()),
                    Some(st) if !st.is_empty() => {
                        return Err(LiftError::StackMismatch {
                            offset: insns[blocks[s].start].0,
                        })
                    }
                    _ => {}
                }
            }
            return Ok(keep);
        }
        self.spill_all(f);
        let mut targets: Vec<LocalId> = Vec::new();
        for &s in succs {
            let entry = match &entry_stacks[s] {
                Some(st) => {
                    let same = st.len() == f.stack.len()
                        && st
                            .iter()
                            .zip(&f.stack)
                            .all(|(a, b)| kind_of(&a.ty) == kind_of(&b.ty));
                    if !same {
                        return Err(LiftError::StackMismatch {
                            offset: insns[blocks[s].start].0,
                        });
                    }
                    st.clone()
                }
                None => {
                    let st: Vec<Expr> = f
                        .stack
                        .iter()
                        .map(|e| {
                            let t = self.body.new_temp(e.ty.clone());
                            self.body.local_expr(t)
                        })
                        .collect();
                    entry_stacks[s] = Some(st.clone());
                    st
                }
            };
            targets.extend(entry.iter().filter_map(Expr::as_local));
        }
        let mut keep = keep;
        if let Some(k) = &keep {
            if targets.iter().any(|t| k.reads_local(*t)) {
                let t = self.body.new_temp(k.ty.clone());
                f.emit(StmtKind::Assign(LValue::Local(t), k.clone()));
                keep = Some(self.body.local_expr(t));
            }
        }
        // Values that read a temporary about to be overwritten are copied first.
        for i in 0..f.stack.len() {
            let v = &f.stack[i];
            let clobbered = targets
                .iter()
                .any(|t| v.reads_local(*t) && v.as_local() != Some(*t));
            if clobbered {
                let e = v.clone();
                let t = self.body.new_temp(e.ty.clone());
                f.emit(StmtKind::Assign(LValue::Local(t), e));
                f.stack[i] = self.body.local_expr(t);
            }
        }
        for &s in succs {
            let entry = entry_stacks[s].clone().expect("entry stack set above");
            for (slot, v) in entry.iter().zip(f.stack.clone().iter()) {
                let t = slot.as_local().expect("merge slots are locals");
                if v.as_local() != Some(t) {
                    f.emit(StmtKind::Assign(LValue::Local(t), v.clone()));
                }
            }
        }
        Ok(keep)
    }

    /// Create parameters and slot locals; returns the entry statements that
    /// copy reassigned parameters into locals.
    fn declare_locals(&mut self, code: &crate::classfile::CodeAttribute) -> Result<Vec<Stmt>> {
        let m = self.m;
        let lvt_at = |slot: u16, kind: ValueKind, start_only: bool| {
            code.local_variables
                .iter()
                .filter(|v| v.index == slot && (!start_only || v.start == 0))
                .filter_map(|v| FieldType::parse(&v.descriptor).ok().map(|t| (v, t)))
                .filter(|(_, t)| ValueKind::of(t) == kind)
                .collect::<Vec<_>>()
        };
        let mut stored: BTreeSet<(u16, ValueKind)> = BTreeSet::new();
        let mut used: BTreeSet<(u16, ValueKind)> = BTreeSet::new();
        for (_, insn) in &code.instructions {
            match insn {
                Instruction::Store(k, s) => {
                    stored.insert((*s, *k));
                    used.insert((*s, *k));
                }
                Instruction::Iinc(s, _) => {
                    stored.insert((*s, ValueKind::Int));
                    used.insert((*s, ValueKind::Int));
                }
                Instruction::Load(k, s) => {
                    used.insert((*s, *k));
                }
                _ => {}
            }
        }

        let mut entry = Vec::new();
        let mut slot = 0u16;
        if !m.is_static() {
            let ty = Type::Ref(self.body.class.clone());
            let id = self.body.add_local("this", Some(0), ty, Role::Receiver);
            self.body.params.push(id);
            self.locals.insert((0, ValueKind::Ref), id);
            slot = 1;
        }
        let names_from_attr = m.parameter_names.len() == m.descriptor.params.len();
        for (i, p) in m.descriptor.params.iter().enumerate() {
            let kind = ValueKind::of(p);
            let name = if names_from_attr && !m.parameter_names[i].is_empty() {
                m.parameter_names[i].clone()
            } else {
                lvt_at(slot, kind, true)
                    .first()
                    .map(|(v, _)| v.name.clone())
                    .unwrap_or_else(|| format!("p{i}"))
            };
            let ty = Type::from_field(p);
            let id = self.body.add_local(&name, Some(slot), ty.clone(), Role::Param(i));
            self.body.params.push(id);
            self.locals.insert((slot, kind), id);
            slot += p.slots();
        }
        // Parameters that are reassigned get a local copy.
        let param_keys: Vec<((u16, ValueKind), LocalId)> = self
            .locals
            .iter()
            .map(|(k, v)| (*k, *v))
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .collect();
        for (key, pid) in param_keys {
            if stored.contains(&key) {
                let p = self.body.locals[pid].clone();
                let id = self.body.add_local(&p.name, p.slot, p.ty.clone(), Role::Local);
                self.body.locals[id].declared = true;
                entry.push(Stmt::new(
                    StmtKind::Assign(LValue::Local(id), self.body.local_expr(pid)),
                    None,
                ));
                self.locals.insert(key, id);
            }
        }
        for key in used {
            if self.locals.contains_key(&key) {
                continue;
            }
            let (s, kind) = key;
            let infos = lvt_at(s, kind, false);
            let (name, ty, declared) = match infos.first() {
                Some((v, t)) => {
                    let agree = infos.iter().all(|(_, u)| u == t);
                    if agree {
                        (v.name.clone(), Type::from_field(t), true)
                    } else {
                        (v.name.clone(), default_type(kind), false)
                    }
                }
                None => (format!("l{s}"), default_type(kind), false),
            };
            let id = self.body.add_local(&name, Some(s), ty, Role::Local);
            self.body.locals[id].declared = declared;
            self.locals.insert(key, id);
        }
        Ok(entry)
    }
}
