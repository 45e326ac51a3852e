// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Resolved JVM instructions.
//!
//! Every constant-pool operand is already resolved, and the short/wide
//! opcode families (`iload_0`, `iload`, `wide iload`; `goto`, `goto_w`;
//! `iconst_*`, `bipush`, `sipush`, `ldc`) collapse into one variant each.
//! Branch targets are absolute byte offsets in parsed code and instruction
//! indices in a [`CodePlan`](super::CodePlan).

use std::fmt;

use super::descriptor::{FieldType, MethodDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Int,
    Long,
    Float,
    Double,
    Ref,
}

impl ValueKind {
    pub fn slots(self) -> u16 {
        match self {
            ValueKind::Long | ValueKind::Double => 2,
            _ => 1,
        }
    }

    fn prefix(self) -> char {
        match self {
            ValueKind::Int => 'i',
            ValueKind::Long => 'l',
            ValueKind::Float => 'f',
            ValueKind::Double => 'd',
            ValueKind::Ref => 'a',
        }
    }

    pub fn of(ty: &FieldType) -> ValueKind {
        match ty {
            FieldType::Long => ValueKind::Long,
            FieldType::Float => ValueKind::Float,
            FieldType::Double => ValueKind::Double,
            FieldType::Object(_) | FieldType::Array(_) => ValueKind::Ref,
            _ => ValueKind::Int,
        }
    }
}

/// Element kind of `xaload`/`xastore`. `Byte` covers both byte and boolean arrays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrayKind {
    Int,
    Long,
    Float,
    Double,
    Ref,
    Byte,
    Char,
    Short,
}

impl ArrayKind {
    pub fn value_kind(self) -> ValueKind {
        match self {
            ArrayKind::Long => ValueKind::Long,
            ArrayKind::Float => ValueKind::Float,
            ArrayKind::Double => ValueKind::Double,
            ArrayKind::Ref => ValueKind::Ref,
            _ => ValueKind::Int,
        }
    }

    fn prefix(self) -> char {
        match self {
            ArrayKind::Int => 'i',
            ArrayKind::Long => 'l',
            ArrayKind::Float => 'f',
            ArrayKind::Double => 'd',
            ArrayKind::Ref => 'a',
            ArrayKind::Byte => 'b',
            ArrayKind::Char => 'c',
            ArrayKind::Short => 's',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumKind {
    Int,
    Long,
    Float,
    Double,
}

impl NumKind {
    pub fn value_kind(self) -> ValueKind {
        match self {
            NumKind::Int => ValueKind::Int,
            NumKind::Long => ValueKind::Long,
            NumKind::Float => ValueKind::Float,
            NumKind::Double => ValueKind::Double,
        }
    }

    fn prefix(self) -> char {
        self.value_kind().prefix()
    }

    pub(crate) fn index(self) -> u8 {
        match self {
            NumKind::Int => 0,
            NumKind::Long => 1,
            NumKind::Float => 2,
            NumKind::Double => 3,
        }
    }

    pub(crate) fn from_index(i: u8) -> NumKind {
        [NumKind::Int, NumKind::Long, NumKind::Float, NumKind::Double][i as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Neg,
    Shl,
    Shr,
    Ushr,
    And,
    Or,
    Xor,
}

impl ArithOp {
    fn name(self) -> &'static str {
        match self {
            ArithOp::Add => "add",
            ArithOp::Sub => "sub",
            ArithOp::Mul => "mul",
            ArithOp::Div => "div",
            ArithOp::Rem => "rem",
            ArithOp::Neg => "neg",
            ArithOp::Shl => "shl",
            ArithOp::Shr => "shr",
            ArithOp::Ushr => "ushr",
            ArithOp::And => "and",
            ArithOp::Or => "or",
            ArithOp::Xor => "xor",
        }
    }

    /// Shifts and bitwise operators exist only for int and long.
    pub fn is_integral_only(self) -> bool {
        matches!(
            self,
            ArithOp::Shl | ArithOp::Shr | ArithOp::Ushr | ArithOp::And | ArithOp::Or | ArithOp::Xor
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    Eq,
    Ne,
    Lt,
    Ge,
    Gt,
    Le,
}

impl Cond {
    fn name(self) -> &'static str {
        match self {
            Cond::Eq => "eq",
            Cond::Ne => "ne",
            Cond::Lt => "lt",
            Cond::Ge => "ge",
            Cond::Gt => "gt",
            Cond::Le => "le",
        }
    }

    pub fn negate(self) -> Cond {
        match self {
            Cond::Eq => Cond::Ne,
            Cond::Ne => Cond::Eq,
            Cond::Lt => Cond::Ge,
            Cond::Ge => Cond::Lt,
            Cond::Gt => Cond::Le,
            Cond::Le => Cond::Gt,
        }
    }

    pub(crate) fn index(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_index(i: u8) -> Cond {
        [Cond::Eq, Cond::Ne, Cond::Lt, Cond::Ge, Cond::Gt, Cond::Le][i as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpKind {
    Lcmp,
    Fcmpl,
    Fcmpg,
    Dcmpl,
    Dcmpg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Narrow {
    Byte,
    Char,
    Short,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvokeKind {
    Virtual,
    Special,
    Static,
    Interface,
}

impl InvokeKind {
    pub fn has_receiver(self) -> bool {
        self != InvokeKind::Static
    }
}

#[derive(Clone, Debug)]
pub enum Constant {
    Null,
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    String(String),
    /// Class literal; internal name or array descriptor.
    Class(String),
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        use Constant::*;
        match (self, other) {
            (Null, Null) => true,
            (Int(a), Int(b)) => a == b,
            (Long(a), Long(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Double(a), Double(b)) => a.to_bits() == b.to_bits(),
            (String(a), String(b)) => a == b,
            (Class(a), Class(b)) => a == b,
            _ => false,
        }
    }
}

impl Constant {
    pub fn value_kind(&self) -> ValueKind {
        match self {
            Constant::Int(_) => ValueKind::Int,
            Constant::Long(_) => ValueKind::Long,
            Constant::Float(_) => ValueKind::Float,
            Constant::Double(_) => ValueKind::Double,
            _ => ValueKind::Ref,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldRef {
    pub owner: String,
    pub name: String,
    pub descriptor: FieldType,
}

impl FieldRef {
    pub fn new(owner: &str, name: &str, descriptor: FieldType) -> Self {
        FieldRef {
            owner: owner.replace('.', "/"),
            name: name.to_string(),
            descriptor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodRef {
    pub owner: String,
    pub name: String,
    pub descriptor: MethodDescriptor,
}

impl MethodRef {
    pub fn new(owner: &str, name: &str, descriptor: MethodDescriptor) -> Self {
        MethodRef {
            owner: owner.replace('.', "/"),
            name: name.to_string(),
            descriptor,
        }
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.owner, self.name, self.descriptor)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Nop,
    Const(Constant),
    Load(ValueKind, u16),
    Store(ValueKind, u16),
    ArrayLoad(ArrayKind),
    ArrayStore(ArrayKind),
    Pop,
    Pop2,
    Dup,
    DupX1,
    DupX2,
    Dup2,
    Dup2X1,
    Dup2X2,
    Swap,
    Arith(NumKind, ArithOp),
    Iinc(u16, i16),
    Convert(NumKind, NumKind),
    Narrow(Narrow),
    Compare(CmpKind),
    /// Compare the int on top of the stack against zero.
    If(Cond, u32),
    IfICmp(Cond, u32),
    /// Only `Eq`/`Ne`.
    IfACmp(Cond, u32),
    IfNull(u32),
    IfNonNull(u32),
    Goto(u32),
    TableSwitch {
        default: u32,
        low: i32,
        targets: Vec<u32>,
    },
    LookupSwitch {
        default: u32,
        pairs: Vec<(i32, u32)>,
    },
    Return(Option<ValueKind>),
    GetStatic(FieldRef),
    PutStatic(FieldRef),
    GetField(FieldRef),
    PutField(FieldRef),
    Invoke {
        kind: InvokeKind,
        method: MethodRef,
        /// Whether the constant-pool entry is an `InterfaceMethodref`.
        interface: bool,
    },
    InvokeDynamic {
        name: String,
        descriptor: MethodDescriptor,
    },
    New(String),
    /// `newarray` for primitive elements, `anewarray` otherwise.
    NewArray(FieldType),
    MultiANewArray(FieldType, u8),
    ArrayLength,
    AThrow,
    CheckCast(String),
    InstanceOf(String),
    MonitorEnter,
    MonitorExit,
}

impl Instruction {
    pub fn mnemonic(&self) -> String {
        use Instruction::*;
        match self {
            Nop => "nop".into(),
            Const(c) => match c {
                Constant::Null => "aconst_null".into(),
                Constant::Int(_) => "iconst".into(),
                Constant::Long(_) => "lconst".into(),
                Constant::Float(_) => "fconst".into(),
                Constant::Double(_) => "dconst".into(),
                Constant::String(_) | Constant::Class(_) => "ldc".into(),
            },
            Load(k, _) => format!("{}load", k.prefix()),
            Store(k, _) => format!("{}store", k.prefix()),
            ArrayLoad(k) => format!("{}aload", k.prefix()),
            ArrayStore(k) => format!("{}astore", k.prefix()),
            Pop => "pop".into(),
            Pop2 => "pop2".into(),
            Dup => "dup".into(),
            DupX1 => "dup_x1".into(),
            DupX2 => "dup_x2".into(),
            Dup2 => "dup2".into(),
            Dup2X1 => "dup2_x1".into(),
            Dup2X2 => "dup2_x2".into(),
            Swap => "swap".into(),
            Arith(k, op) => format!("{}{}", k.prefix(), op.name()),
            Iinc(..) => "iinc".into(),
            Convert(a, b) => format!("{}2{}", a.prefix(), b.prefix()),
            Narrow(n) => match n {
                self::Narrow::Byte => "i2b".into(),
                self::Narrow::Char => "i2c".into(),
                self::Narrow::Short => "i2s".into(),
            },
            Compare(c) => match c {
                CmpKind::Lcmp => "lcmp".into(),
                CmpKind::Fcmpl => "fcmpl".into(),
                CmpKind::Fcmpg => "fcmpg".into(),
                CmpKind::Dcmpl => "dcmpl".into(),
                CmpKind::Dcmpg => "dcmpg".into(),
            },
            If(c, _) => format!("if{}", c.name()),
            IfICmp(c, _) => format!("if_icmp{}", c.name()),
            IfACmp(c, _) => format!("if_acmp{}", c.name()),
            IfNull(_) => "ifnull".into(),
            IfNonNull(_) => "ifnonnull".into(),
            Goto(_) => "goto".into(),
            TableSwitch { .. } => "tableswitch".into(),
            LookupSwitch { .. } => "lookupswitch".into(),
            Return(None) => "return".into(),
            Return(Some(k)) => format!("{}return", k.prefix()),
            GetStatic(_) => "getstatic".into(),
            PutStatic(_) => "putstatic".into(),
            GetField(_) => "getfield".into(),
            PutField(_) => "putfield".into(),
            Invoke { kind, .. } => match kind {
                InvokeKind::Virtual => "invokevirtual".into(),
                InvokeKind::Special => "invokespecial".into(),
                InvokeKind::Static => "invokestatic".into(),
                InvokeKind::Interface => "invokeinterface".into(),
            },
            InvokeDynamic { .. } => "invokedynamic".into(),
            New(_) => "new".into(),
            NewArray(t) if t.is_reference() => "anewarray".into(),
            NewArray(_) => "newarray".into(),
            MultiANewArray(..) => "multianewarray".into(),
            ArrayLength => "arraylength".into(),
            AThrow => "athrow".into(),
            CheckCast(_) => "checkcast".into(),
            InstanceOf(_) => "instanceof".into(),
            MonitorEnter => "monitorenter".into(),
            MonitorExit => "monitorexit".into(),
        }
    }

    /// Branch targets, in operand order (default last for switches).
    pub fn targets(&self) -> Vec<u32> {
        use Instruction::*;
        match self {
            If(_, t) | IfICmp(_, t) | IfACmp(_, t) | IfNull(t) | IfNonNull(t) | Goto(t) => vec![*t],
            TableSwitch { default, targets, .. } => {
                targets.iter().copied().chain(std::iter::once(*default)).collect()
            }
            LookupSwitch { default, pairs } => pairs
                .iter()
                .map(|(_, t)| *t)
                .chain(std::iter::once(*default))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn map_targets(&mut self, mut f: impl FnMut(u32) -> u32) {
        use Instruction::*;
        match self {
            If(_, t) | IfICmp(_, t) | IfACmp(_, t) | IfNull(t) | IfNonNull(t) | Goto(t) => *t = f(*t),
            TableSwitch { default, targets, .. } => {
                for t in targets.iter_mut() {
                    *t = f(*t);
                }
                *default = f(*default);
            }
            LookupSwitch { default, pairs } => {
                for (_, t) in pairs.iter_mut() {
                    *t = f(*t);
                }
                *default = f(*default);
            }
            _ => {}
        }
    }

    /// Control never falls through to the next instruction.
    pub fn is_terminal(&self) -> bool {
        use Instruction::*;
        matches!(
            self,
            Goto(_) | TableSwitch { .. } | LookupSwitch { .. } | Return(_) | AThrow
        )
    }

    /// Operand-stack effect in slots: `(popped, pushed)`.
    pub fn stack_effect(&self) -> (u16, u16) {
        use Instruction::*;
        match self {
            Nop | Goto(_) | Iinc(..) | Return(None) => (0, 0),
            Const(c) => (0, c.value_kind().slots()),
            Load(k, _) => (0, k.slots()),
            Store(k, _) => (k.slots(), 0),
            ArrayLoad(k) => (2, k.value_kind().slots()),
            ArrayStore(k) => (2 + k.value_kind().slots(), 0),
            Pop => (1, 0),
            Pop2 => (2, 0),
            Dup => (1, 2),
            DupX1 => (2, 3),
            DupX2 => (3, 4),
            Dup2 => (2, 4),
            Dup2X1 => (3, 5),
            Dup2X2 => (4, 6),
            Swap => (2, 2),
            Arith(k, op) => {
                let s = k.value_kind().slots();
                match op {
                    ArithOp::Neg => (s, s),
                    // shift distance is always an int
                    ArithOp::Shl | ArithOp::Shr | ArithOp::Ushr => (s + 1, s),
                    _ => (2 * s, s),
                }
            }
            Convert(a, b) => (a.value_kind().slots(), b.value_kind().slots()),
            Narrow(_) => (1, 1),
            Compare(c) => match c {
                CmpKind::Lcmp | CmpKind::Dcmpl | CmpKind::Dcmpg => (4, 1),
                CmpKind::Fcmpl | CmpKind::Fcmpg => (2, 1),
            },
            If(..) | IfNull(_) | IfNonNull(_) => (1, 0),
            IfICmp(..) | IfACmp(..) => (2, 0),
            TableSwitch { .. } | LookupSwitch { .. } => (1, 0),
            Return(Some(k)) => (k.slots(), 0),
            GetStatic(f) => (0, f.descriptor.slots()),
            PutStatic(f) => (f.descriptor.slots(), 0),
            GetField(f) => (1, f.descriptor.slots()),
            PutField(f) => (1 + f.descriptor.slots(), 0),
            Invoke { kind, method, .. } => {
                let recv = u16::from(kind.has_receiver());
                (
                    recv + method.descriptor.param_slots(),
                    method.descriptor.ret.as_ref().map_or(0, FieldType::slots),
                )
            }
            InvokeDynamic { descriptor, .. } => (
                descriptor.param_slots(),
                descriptor.ret.as_ref().map_or(0, FieldType::slots),
            ),
            New(_) => (0, 1),
            NewArray(_) => (1, 1),
            MultiANewArray(_, dims) => (*dims as u16, 1),
            ArrayLength => (1, 1),
            AThrow => (1, 0),
            CheckCast(_) => (1, 1),
            InstanceOf(_) => (1, 1),
            MonitorEnter | MonitorExit => (1, 0),
        }
    }

    /// Highest local slot touched, exclusive.
    pub fn locals_touched(&self) -> u16 {
        match self {
            Instruction::Load(k, i) | Instruction::Store(k, i) => i + k.slots(),
            Instruction::Iinc(i, _) => i + 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instruction::*;
        let m = self.mnemonic();
        match self {
            Const(c) => match c {
                Constant::Null => write!(f, "{m}"),
                Constant::Int(v) => write!(f, "{m} {v}"),
                Constant::Long(v) => write!(f, "{m} {v}"),
                Constant::Float(v) => write!(f, "{m} {v}"),
                Constant::Double(v) => write!(f, "{m} {v}"),
                Constant::String(s) => write!(f, "{m} {s:?}"),
                Constant::Class(s) => write!(f, "{m} class {s}"),
            },
            Load(_, i) | Store(_, i) => write!(f, "{m} {i}"),
            Iinc(i, d) => write!(f, "{m} {i} {d}"),
            If(_, t) | IfICmp(_, t) | IfACmp(_, t) | IfNull(t) | IfNonNull(t) | Goto(t) => {
                write!(f, "{m} {t}")
            }
            TableSwitch { default, low, targets } => {
                write!(f, "{m} low={low} {targets:?} default={default}")
            }
            LookupSwitch { default, pairs } => write!(f, "{m} {pairs:?} default={default}"),
            GetStatic(r) | PutStatic(r) | GetField(r) | PutField(r) => {
                write!(f, "{m} {}.{}:{}", r.owner, r.name, r.descriptor)
            }
            Invoke { method, .. } => write!(f, "{m} {method}"),
            InvokeDynamic { name, descriptor } => write!(f, "{m} {name}{descriptor}"),
            New(c) | CheckCast(c) | InstanceOf(c) => write!(f, "{m} {c}"),
            NewArray(t) => write!(f, "{m} {t}"),
            MultiANewArray(t, d) => write!(f, "{m} {t} {d}"),
            _ => write!(f, "{m}"),
        }
    }
}
