// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Direct interpreter for raw bytecode, the other half of the lifting oracle.
//! Method invocation is not supported.

use std::collections::BTreeMap;

use super::interp::{arith, convert, default_value, normalize, Heap, Obj, Trap, Value};
use crate::classfile::{
    ArithOp, ArrayKind, CmpKind, Cond, Constant, Instruction, MethodInfo, NumKind, ValueKind,
};
use crate::classfile::insn::Narrow;
use crate::ir::{BinOp, Type};

fn num_type(k: NumKind) -> Type {
    match k.value_kind() {
        ValueKind::Long => Type::Long,
        ValueKind::Float => Type::Float,
        ValueKind::Double => Type::Double,
        _ => Type::Int,
    }
}

fn is_wide_kind(k: ValueKind) -> bool {
    matches!(k, ValueKind::Long | ValueKind::Double)
}

fn array_type(k: ArrayKind) -> Type {
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

fn cond(c: Cond, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match c {
        Cond::Eq => ord == Equal,
        Cond::Ne => ord != Equal,
        Cond::Lt => ord == Less,
        Cond::Ge => ord != Less,
        Cond::Gt => ord == Greater,
        Cond::Le => ord != Greater,
    }
}

/// Execute `m` on `args` (receiver first, if any).
pub fn run_bytecode(m: &MethodInfo, args: &[Value], heap: &mut Heap) -> Result<Option<Value>, Trap> {
    let code = m
        .code
        .as_ref()
        .ok_or_else(|| Trap::Unsupported("no code".into()))?;
    let mut locals: Vec<Option<Value>> = vec![None; code.max_locals.max(1) as usize + 4];
    let mut slot = 0usize;
    let mut kinds: Vec<bool> = Vec::new();
    if !m.is_static() {
        kinds.push(false);
    }
    for p in &m.descriptor.params {
        kinds.push(p.is_wide());
    }
    if kinds.len() != args.len() {
        return Err(Trap::Confused("argument count".into()));
    }
    for (a, wide) in args.iter().zip(kinds) {
        locals[slot] = Some(*a);
        slot += if wide { 2 } else { 1 };
    }
    // (value, occupies two slots)
    let mut stack: Vec<(Value, bool)> = Vec::new();
    let mut pc = 0usize;
    let mut fuel = 1_000_000u64;
    let insns = &code.instructions;
    let goto = |off: u32| code.index_of(off).ok_or_else(|| Trap::Confused("bad target".into()));
    let pop = |stack: &mut Vec<(Value, bool)>| {
        stack
            .pop()
            .map(|(v, _)| v)
            .ok_or_else(|| Trap::Confused("stack underflow".into()))
    };
    let pop_slots = |stack: &mut Vec<(Value, bool)>, n: usize| -> Result<Vec<(Value, bool)>, Trap> {
        let mut taken = 0;
        let mut out = Vec::new();
        while taken < n {
            let e = stack.pop().ok_or_else(|| Trap::Confused("stack underflow".into()))?;
            taken += if e.1 { 2 } else { 1 };
            out.push(e);
        }
        out.reverse();
        Ok(out)
    };
    loop {
        if fuel == 0 {
            return Err(Trap::Fuel);
        }
        fuel -= 1;
        let (_, insn) = insns
            .get(pc)
            .ok_or_else(|| Trap::Confused("fell off code".into()))?;
        pc += 1;
        use Instruction as I;
        match insn {
            I::Nop => {}
            I::Const(c) => {
                let v = match c {
                    Constant::Null => Value::Null,
                    Constant::Int(v) => Value::Int(*v as i64),
                    Constant::Long(v) => Value::Int(*v),
                    Constant::Float(v) => Value::Float(*v as f64),
                    Constant::Double(v) => Value::Float(*v),
                    Constant::String(s) | Constant::Class(s) => heap.alloc(Obj::Str(s.clone())),
                };
                stack.push((v, is_wide_kind(c.value_kind())));
            }
            I::Load(k, s) => {
                let v = locals[*s as usize].ok_or_else(|| Trap::Uninitialized(format!("slot {s}")))?;
                stack.push((v, is_wide_kind(*k)));
            }
            I::Store(_, s) => {
                let v = pop(&mut stack)?;
                locals[*s as usize] = Some(v);
            }
            I::Iinc(s, d) => {
                let v = locals[*s as usize]
                    .and_then(Value::as_int)
                    .ok_or_else(|| Trap::Uninitialized(format!("slot {s}")))?;
                locals[*s as usize] = Some(Value::Int(normalize(v + *d as i64, &Type::Int)));
            }
            I::ArrayLoad(k) => {
                let i = pop(&mut stack)?.as_int().unwrap_or(0);
                let a = pop(&mut stack)?;
                if a == Value::Null {
                    return Err(Trap::NullPointer);
                }
                let data = heap.array_data(a).ok_or_else(|| Trap::Confused("not an array".into()))?;
                if i < 0 || i as usize >= data.len() {
                    return Err(Trap::OutOfBounds);
                }
                stack.push((data[i as usize], is_wide_kind(k.value_kind())));
            }
            I::ArrayStore(_) => {
                let v = pop(&mut stack)?;
                let i = pop(&mut stack)?.as_int().unwrap_or(0);
                let a = pop(&mut stack)?;
                match a {
                    Value::Ref(r) => match heap.objects.get_mut(r) {
                        Some(Obj::Array { elem, data }) => {
                            if i < 0 || i as usize >= data.len() {
                                return Err(Trap::OutOfBounds);
                            }
                            let v = match v {
                                Value::Int(x) => Value::Int(normalize(x, elem)),
                                Value::Float(x) if *elem == Type::Float => Value::Float(x as f32 as f64),
                                v => v,
                            };
                            data[i as usize] = v;
                        }
                        _ => return Err(Trap::Confused("not an array".into())),
                    },
                    _ => return Err(Trap::NullPointer),
                }
            }
            I::Pop => {
                pop_slots(&mut stack, 1)?;
            }
            I::Pop2 => {
                pop_slots(&mut stack, 2)?;
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
                let top = pop_slots(&mut stack, a)?;
                let under = pop_slots(&mut stack, b)?;
                stack.extend(top.iter().copied());
                stack.extend(under);
                stack.extend(top);
            }
            I::Swap => {
                let x = stack.pop().ok_or_else(|| Trap::Confused("underflow".into()))?;
                let y = stack.pop().ok_or_else(|| Trap::Confused("underflow".into()))?;
                stack.push(x);
                stack.push(y);
            }
            I::Arith(k, op) => {
                let ty = num_type(*k);
                let wide = is_wide_kind(k.value_kind());
                let r = if *op == ArithOp::Neg {
                    match pop(&mut stack)? {
                        Value::Int(x) => Value::Int(normalize(x.wrapping_neg(), &ty)),
                        Value::Float(x) => Value::Float(-x),
                        v => return Err(Trap::Confused(format!("negate {v:?}"))),
                    }
                } else {
                    let y = pop(&mut stack)?;
                    let x = pop(&mut stack)?;
                    let bop = match op {
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
                        ArithOp::Neg => unreachable!(),
                    };
                    arith(bop, &ty, x, y)?
                };
                stack.push((r, wide));
            }
            I::Convert(_, to) => {
                let v = pop(&mut stack)?;
                stack.push((convert(v, &num_type(*to))?, is_wide_kind(to.value_kind())));
            }
            I::Narrow(n) => {
                let v = pop(&mut stack)?;
                let t = match n {
                    Narrow::Byte => Type::Byte,
                    Narrow::Char => Type::Char,
                    Narrow::Short => Type::Short,
                };
                stack.push((convert(v, &t)?, false));
            }
            I::Compare(c) => {
                let y = pop(&mut stack)?;
                let x = pop(&mut stack)?;
                let op = match c {
                    CmpKind::Lcmp => BinOp::Cmp,
                    CmpKind::Fcmpl | CmpKind::Dcmpl => BinOp::Cmpl,
                    CmpKind::Fcmpg | CmpKind::Dcmpg => BinOp::Cmpg,
                };
                stack.push((arith(op, &Type::Int, x, y)?, false));
            }
            I::If(c, t) => {
                let v = pop(&mut stack)?.as_int().ok_or_else(|| Trap::Confused("if".into()))?;
                if cond(*c, v.cmp(&0)) {
                    pc = goto(*t)?;
                }
            }
            I::IfICmp(c, t) => {
                let y = pop(&mut stack)?.as_int().unwrap_or(0);
                let x = pop(&mut stack)?.as_int().unwrap_or(0);
                if cond(*c, x.cmp(&y)) {
                    pc = goto(*t)?;
                }
            }
            I::IfACmp(c, t) => {
                let y = pop(&mut stack)?;
                let x = pop(&mut stack)?;
                let eq = x == y;
                if (*c == Cond::Eq) == eq {
                    pc = goto(*t)?;
                }
            }
            I::IfNull(t) | I::IfNonNull(t) => {
                let is_null = pop(&mut stack)? == Value::Null;
                if is_null == matches!(insn, I::IfNull(_)) {
                    pc = goto(*t)?;
                }
            }
            I::Goto(t) => pc = goto(*t)?,
            I::TableSwitch {
                default,
                low,
                targets,
            } => {
                let k = pop(&mut stack)?.as_int().unwrap_or(0);
                let i = k - *low as i64;
                let t = if i >= 0 && (i as usize) < targets.len() {
                    targets[i as usize]
                } else {
                    *default
                };
                pc = goto(t)?;
            }
            I::LookupSwitch { default, pairs } => {
                let k = pop(&mut stack)?.as_int().unwrap_or(0);
                let t = pairs
                    .iter()
                    .find(|(v, _)| *v as i64 == k)
                    .map(|(_, t)| *t)
                    .unwrap_or(*default);
                pc = goto(t)?;
            }
            I::Return(None) => return Ok(None),
            I::Return(Some(_)) => return Ok(Some(pop(&mut stack)?)),
            I::GetStatic(f) => {
                let v = heap
                    .statics
                    .get(&(f.owner.clone(), f.name.clone()))
                    .copied()
                    .unwrap_or_else(|| default_value(&Type::from_field(&f.descriptor)));
                stack.push((v, f.descriptor.is_wide()));
            }
            I::PutStatic(f) => {
                let v = pop(&mut stack)?;
                heap.statics.insert((f.owner.clone(), f.name.clone()), v);
            }
            I::GetField(f) => {
                let o = pop(&mut stack)?;
                let v = match o {
                    Value::Ref(r) => match &heap.objects[r] {
                        Obj::Instance { fields, .. } => fields
                            .get(&f.name)
                            .copied()
                            .unwrap_or_else(|| default_value(&Type::from_field(&f.descriptor))),
                        _ => return Err(Trap::Confused("field of non-object".into())),
                    },
                    _ => return Err(Trap::NullPointer),
                };
                stack.push((v, f.descriptor.is_wide()));
            }
            I::PutField(f) => {
                let v = pop(&mut stack)?;
                let o = pop(&mut stack)?;
                match o {
                    Value::Ref(r) => match &mut heap.objects[r] {
                        Obj::Instance { fields, .. } => {
                            fields.insert(f.name.clone(), v);
                        }
                        _ => return Err(Trap::Confused("field of non-object".into())),
                    },
                    _ => return Err(Trap::NullPointer),
                }
            }
            I::New(c) => {
                let v = heap.alloc(Obj::Instance {
                    class: c.clone(),
                    fields: BTreeMap::new(),
                });
                stack.push((v, false));
            }
            I::NewArray(t) => {
                let n = pop(&mut stack)?.as_int().unwrap_or(0);
                if n < 0 {
                    return Err(Trap::NegativeSize);
                }
                let t = Type::from_field(t);
                let v = heap.array(t.clone(), vec![default_value(&t); n as usize]);
                stack.push((v, false));
            }
            I::ArrayLength => {
                let a = pop(&mut stack)?;
                if a == Value::Null {
                    return Err(Trap::NullPointer);
                }
                let n = heap.array_data(a).ok_or_else(|| Trap::Confused("not an array".into()))?.len();
                stack.push((Value::Int(n as i64), false));
            }
            I::CheckCast(_) => {}
            I::InstanceOf(c) => {
                let v = pop(&mut stack)?;
                let t = Type::from_class_operand(c);
                let r = match v {
                    Value::Ref(r) => match (&heap.objects[r], &t) {
                        (_, Type::Ref(n)) if n == "java/lang/Object" => true,
                        (Obj::Instance { class, .. }, Type::Ref(n)) => class == n,
                        (Obj::Array { elem, .. }, Type::Array(e)) => elem == &**e,
                        (Obj::Str(_), Type::Ref(n)) => n == "java/lang/String",
                        _ => false,
                    },
                    _ => false,
                };
                stack.push((Value::bool(r), false));
            }
            I::Invoke { .. }
            | I::InvokeDynamic { .. }
            | I::MultiANewArray(..)
            | I::AThrow
            | I::MonitorEnter
            | I::MonitorExit => return Err(Trap::Unsupported(insn.mnemonic())),
        }
    }
}

/// Interpreting an array element type from a primitive array kind.
pub fn element_type(k: ArrayKind) -> Type {
    array_type(k)
}
