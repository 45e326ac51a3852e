// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference interpreter for lifted bodies, used as a differential-testing
//! oracle. Arithmetic wraps at the JVM operand width.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::classfile::MethodRef;
use crate::ir::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    /// Every integral value, booleans as 0/1.
    Int(i64),
    Float(f64),
    Null,
    Ref(usize),
}

impl Value {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn truthy(self) -> bool {
        !matches!(self, Value::Int(0))
    }

    pub fn bool(b: bool) -> Value {
        Value::Int(b as i64)
    }

    /// Bitwise equality, so that NaN results compare equal in oracles.
    pub fn same(self, other: Value) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            _ => self == other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Obj {
    Instance {
        class: String,
        fields: BTreeMap<String, Value>,
    },
    Array {
        elem: Type,
        data: Vec<Value>,
    },
    Str(String),
}

/// Objects, arrays and static fields visible to an execution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Heap {
    pub objects: Vec<Obj>,
    pub statics: BTreeMap<(String, String), Value>,
}

impl Heap {
    pub fn alloc(&mut self, o: Obj) -> Value {
        self.objects.push(o);
        Value::Ref(self.objects.len() - 1)
    }

    pub fn array(&mut self, elem: Type, data: Vec<Value>) -> Value {
        self.alloc(Obj::Array { elem, data })
    }

    pub fn int_array(&mut self, data: &[i64]) -> Value {
        let data = data.iter().map(|v| Value::Int(*v)).collect();
        self.array(Type::Int, data)
    }

    pub fn array_data(&self, v: Value) -> Option<&[Value]> {
        match v {
            Value::Ref(r) => match self.objects.get(r) {
                Some(Obj::Array { data, .. }) => Some(data),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Trap {
    #[error("null dereference")]
    NullPointer,
    #[error("array index out of bounds")]
    OutOfBounds,
    #[error("division by zero")]
    DivByZero,
    #[error("negative array size")]
    NegativeSize,
    #[error("read of unassigned local `{0}`")]
    Uninitialized(String),
    #[error("specification check failed")]
    CheckFailed,
    #[error("execution step budget exhausted")]
    Fuel,
    #[error("no body for `{0}`")]
    NoSuchMethod(String),
    #[error("not executable: {0}")]
    Unsupported(String),
    #[error("type confusion: {0}")]
    Confused(String),
}

impl Trap {
    pub fn code(&self) -> &'static str {
        "E_TRAP"
    }
}

pub fn default_value(t: &Type) -> Value {
    match t {
        Type::Float | Type::Double => Value::Float(0.0),
        t if t.is_reference() => Value::Null,
        _ => Value::Int(0),
    }
}

/// Wrap an integral value to the width of `t`.
pub fn normalize(v: i64, t: &Type) -> i64 {
    match t {
        Type::Bool => v & 1,
        Type::Byte => v as i8 as i64,
        Type::Char => v as u16 as i64,
        Type::Short => v as i16 as i64,
        Type::Long => v,
        _ => v as i32 as i64,
    }
}

fn round_float(v: f64, t: &Type) -> f64 {
    if *t == Type::Float {
        v as f32 as f64
    } else {
        v
    }
}

pub fn arith(op: BinOp, ty: &Type, a: Value, b: Value) -> Result<Value, Trap> {
    use BinOp::*;
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => {
            let long = *ty == Type::Long;
            let r = match op {
                Add => x.wrapping_add(y),
                Sub => x.wrapping_sub(y),
                Mul => x.wrapping_mul(y),
                Div | Rem => {
                    if y == 0 {
                        return Err(Trap::DivByZero);
                    }
                    if long {
                        if op == Div {
                            x.wrapping_div(y)
                        } else {
                            x.wrapping_rem(y)
                        }
                    } else {
                        let (x, y) = (x as i32, y as i32);
                        (if op == Div { x.wrapping_div(y) } else { x.wrapping_rem(y) }) as i64
                    }
                }
                Shl | Shr | Ushr => {
                    if long {
                        let s = (y & 63) as u32;
                        match op {
                            Shl => x.wrapping_shl(s),
                            Shr => x >> s,
                            _ => ((x as u64) >> s) as i64,
                        }
                    } else {
                        let s = (y & 31) as u32;
                        let x = x as i32;
                        (match op {
                            Shl => x.wrapping_shl(s),
                            Shr => x >> s,
                            _ => ((x as u32) >> s) as i32,
                        }) as i64
                    }
                }
                And => x & y,
                Or => x | y,
                Xor => x ^ y,
                Eq => (x == y) as i64,
                Ne => (x != y) as i64,
                Lt => (x < y) as i64,
                Le => (x <= y) as i64,
                Gt => (x > y) as i64,
                Ge => (x >= y) as i64,
                Cmp | Cmpl | Cmpg => (x.cmp(&y) as i64).signum(),
            };
            let t = if op.is_comparison() || matches!(op, Cmp | Cmpl | Cmpg) {
                &Type::Int
            } else {
                ty
            };
            Ok(Value::Int(normalize(r, t)))
        }
        (Value::Float(x), Value::Float(y)) => Ok(match op {
            Add => Value::Float(round_float(x + y, ty)),
            Sub => Value::Float(round_float(x - y, ty)),
            Mul => Value::Float(round_float(x * y, ty)),
            Div => Value::Float(round_float(x / y, ty)),
            Rem => Value::Float(round_float(x % y, ty)),
            Eq => Value::bool(x == y),
            Ne => Value::bool(x != y),
            Lt => Value::bool(x < y),
            Le => Value::bool(x <= y),
            Gt => Value::bool(x > y),
            Ge => Value::bool(x >= y),
            Cmp | Cmpl | Cmpg => Value::Int(match x.partial_cmp(&y) {
                Some(o) => o as i64,
                None if op == Cmpg => 1,
                None => -1,
            }),
            _ => return Err(Trap::Confused(format!("{op:?} on floating values"))),
        }),
        (x, y) if matches!(op, Eq | Ne) => {
            let same = x == y;
            Ok(Value::bool(if op == Eq { same } else { !same }))
        }
        _ => Err(Trap::Confused(format!("{op:?} on {a:?}, {b:?}"))),
    }
}

pub fn convert(v: Value, to: &Type) -> Result<Value, Trap> {
    Ok(match (v, to) {
        (Value::Int(x), t) if t.is_floating() => Value::Float(round_float(x as f64, t)),
        (Value::Int(x), t) if !t.is_reference() => Value::Int(normalize(x, t)),
        (Value::Float(x), Type::Long) => Value::Int(x as i64),
        (Value::Float(x), t) if t.is_floating() => Value::Float(round_float(x, t)),
        (Value::Float(x), t) if !t.is_reference() => Value::Int(normalize(x as i32 as i64, t)),
        (v, t) if t.is_reference() => v,
        _ => return Err(Trap::Confused(format!("convert {v:?} to {to}"))),
    })
}

/// Executes IR bodies against a heap, resolving calls among known bodies.
pub struct Interpreter<'a> {
    pub heap: &'a mut Heap,
    pub methods: &'a HashMap<MethodRef, Body>,
    pub fuel: u64,
}

struct Env<'b> {
    vars: &'b [LocalVar],
    locals: Vec<Option<Value>>,
}

impl Interpreter<'_> {
    pub fn run(&mut self, body: &Body, args: &[Value]) -> Result<Option<Value>, Trap> {
        let mut env = Env {
            vars: &body.locals,
            locals: vec![None; body.locals.len()],
        };
        if args.len() != body.params.len() {
            return Err(Trap::Confused(format!(
                "{} arguments for {} parameters",
                args.len(),
                body.params.len()
            )));
        }
        for (p, a) in body.params.iter().zip(args) {
            env.locals[*p] = Some(*a);
        }
        let labels: HashMap<Label, usize> = body
            .stmts
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s.kind {
                StmtKind::Label(l) => Some((l, i)),
                _ => None,
            })
            .collect();
        let jump = |l: &Label| {
            labels
                .get(l)
                .copied()
                .ok_or_else(|| Trap::Confused(format!("missing label L{l}")))
        };
        let mut pc = 0;
        while pc < body.stmts.len() {
            if self.fuel == 0 {
                return Err(Trap::Fuel);
            }
            self.fuel -= 1;
            let s = &body.stmts[pc];
            pc += 1;
            match &s.kind {
                StmtKind::Label(_) => {}
                StmtKind::Goto(l) => pc = jump(l)?,
                StmtKind::If(c, l) => {
                    if self.eval(&mut env, c)?.truthy() {
                        pc = jump(l)?;
                    }
                }
                StmtKind::Return(None) => return Ok(None),
                StmtKind::Return(Some(e)) => return Ok(Some(self.eval(&mut env, e)?)),
                StmtKind::Invoke(e) => {
                    self.eval_any(&mut env, e)?;
                }
                StmtKind::Check(_, e) => {
                    if !self.eval(&mut env, e)?.truthy() {
                        return Err(Trap::CheckFailed);
                    }
                }
                StmtKind::Assign(lv, e) => match lv {
                    LValue::Local(l) => {
                        let v = self.eval(&mut env, e)?;
                        env.locals[*l] = Some(v);
                    }
                    LValue::Field(o, f) => {
                        let o = self.eval(&mut env, o)?;
                        let v = self.eval(&mut env, e)?;
                        match o {
                            Value::Ref(r) => match self.heap.objects.get_mut(r) {
                                Some(Obj::Instance { fields, .. }) => {
                                    fields.insert(f.name.clone(), v);
                                }
                                _ => return Err(Trap::Confused("field write on non-object".into())),
                            },
                            _ => return Err(Trap::NullPointer),
                        }
                    }
                    LValue::Static(f) => {
                        let v = self.eval(&mut env, e)?;
                        self.heap
                            .statics
                            .insert((f.owner.clone(), f.name.clone()), v);
                    }
                    LValue::Array(a, i) => {
                        let a = self.eval(&mut env, a)?;
                        let i = self.eval(&mut env, i)?;
                        let v = self.eval(&mut env, e)?;
                        let idx = i.as_int().ok_or_else(|| Trap::Confused("index".into()))?;
                        match a {
                            Value::Ref(r) => match self.heap.objects.get_mut(r) {
                                Some(Obj::Array { elem, data }) => {
                                    if idx < 0 || idx as usize >= data.len() {
                                        return Err(Trap::OutOfBounds);
                                    }
                                    let v = match v {
                                        Value::Int(x) => Value::Int(normalize(x, elem)),
                                        Value::Float(x) => Value::Float(round_float(x, elem)),
                                        v => v,
                                    };
                                    data[idx as usize] = v;
                                }
                                _ => return Err(Trap::Confused("array write on non-array".into())),
                            },
                            _ => return Err(Trap::NullPointer),
                        }
                    }
                },
            }
        }
        Err(Trap::Confused("control fell off the end of the body".into()))
    }

    /// Evaluate a standalone expression over `vars` with the given bindings.
    pub fn eval_expr(
        &mut self,
        vars: &[LocalVar],
        bindings: &[(LocalId, Value)],
        e: &Expr,
    ) -> Result<Value, Trap> {
        let mut env = Env {
            vars,
            locals: vec![None; vars.len()],
        };
        for (id, v) in bindings {
            env.locals[*id] = Some(*v);
        }
        self.eval(&mut env, e)
    }

    fn eval(&mut self, env: &mut Env, e: &Expr) -> Result<Value, Trap> {
        self.eval_any(env, e)?
            .ok_or_else(|| Trap::Confused("void value used".into()))
    }

    fn eval_any(&mut self, env: &mut Env, e: &Expr) -> Result<Option<Value>, Trap> {
        let v = match &e.kind {
            ExprKind::Local(id) => env.locals[*id]
                .ok_or_else(|| Trap::Uninitialized(env.vars[*id].name.clone()))?,
            ExprKind::Lit(l) => match l {
                Literal::Int(v) => Value::Int(*v),
                Literal::Float(v) => Value::Float(*v),
                Literal::Null => Value::Null,
                Literal::String(s) | Literal::Class(s) => self.heap.alloc(Obj::Str(s.clone())),
            },
            ExprKind::Field(o, f) => match self.eval(env, o)? {
                Value::Ref(r) => match self.heap.objects.get(r) {
                    Some(Obj::Instance { fields, .. }) => fields
                        .get(&f.name)
                        .copied()
                        .unwrap_or_else(|| default_value(&Type::from_field(&f.descriptor))),
                    _ => return Err(Trap::Confused("field read on non-object".into())),
                },
                _ => return Err(Trap::NullPointer),
            },
            ExprKind::Static(f) => self
                .heap
                .statics
                .get(&(f.owner.clone(), f.name.clone()))
                .copied()
                .unwrap_or_else(|| default_value(&Type::from_field(&f.descriptor))),
            ExprKind::ArrayRead(a, i) => {
                let a = self.eval(env, a)?;
                let i = self.eval(env, i)?.as_int().ok_or_else(|| Trap::Confused("index".into()))?;
                match a {
                    Value::Null => return Err(Trap::NullPointer),
                    a => {
                        let data = self
                            .heap
                            .array_data(a)
                            .ok_or_else(|| Trap::Confused("array read on non-array".into()))?;
                        if i < 0 || i as usize >= data.len() {
                            return Err(Trap::OutOfBounds);
                        }
                        data[i as usize]
                    }
                }
            }
            ExprKind::ArrayLength(a) => match self.eval(env, a)? {
                Value::Null => return Err(Trap::NullPointer),
                a => Value::Int(
                    self.heap
                        .array_data(a)
                        .ok_or_else(|| Trap::Confused("length of non-array".into()))?
                        .len() as i64,
                ),
            },
            ExprKind::Neg(a) => match self.eval(env, a)? {
                Value::Int(x) => Value::Int(normalize(x.wrapping_neg(), &e.ty)),
                Value::Float(x) => Value::Float(-x),
                v => return Err(Trap::Confused(format!("negate {v:?}"))),
            },
            ExprKind::Binary(op, a, b) => {
                let x = self.eval(env, a)?;
                let y = self.eval(env, b)?;
                arith(*op, &e.ty, x, y)?
            }
            ExprKind::Cast(a) => {
                let v = self.eval(env, a)?;
                convert(v, &e.ty)?
            }
            ExprKind::InstanceOf(a, t) => {
                let v = self.eval(env, a)?;
                Value::bool(match v {
                    Value::Ref(r) => match (&self.heap.objects[r], t) {
                        (_, Type::Ref(n)) if n == "java/lang/Object" => true,
                        (Obj::Instance { class, .. }, Type::Ref(n)) => class == n,
                        (Obj::Array { elem, .. }, Type::Array(e)) => elem == &**e,
                        (Obj::Str(_), Type::Ref(n)) => n == "java/lang/String",
                        _ => false,
                    },
                    _ => false,
                })
            }
            ExprKind::New(c) => self.heap.alloc(Obj::Instance {
                class: c.clone(),
                fields: BTreeMap::new(),
            }),
            ExprKind::NewArray(t, n) => {
                let n = self.eval(env, n)?.as_int().ok_or_else(|| Trap::Confused("size".into()))?;
                if n < 0 {
                    return Err(Trap::NegativeSize);
                }
                self.heap.array(t.clone(), vec![default_value(t); n as usize])
            }
            ExprKind::Call(c) => {
                let mut args = Vec::new();
                if let Some(r) = &c.receiver {
                    let r = self.eval(env, r)?;
                    if r == Value::Null {
                        return Err(Trap::NullPointer);
                    }
                    args.push(r);
                }
                for a in &c.args {
                    args.push(self.eval(env, a)?);
                }
                if c.method.name == "<init>" && c.method.owner == "java/lang/Object" {
                    return Ok(None);
                }
                let methods = self.methods;
                let callee = methods
                    .get(&c.method)
                    .ok_or_else(|| Trap::NoSuchMethod(c.method.to_string()))?;
                return self.run(callee, &args);
            }
            ExprKind::Intrinsic(i) => return self.intrinsic(env, i),
        };
        Ok(Some(v))
    }

    fn intrinsic(&mut self, env: &mut Env, i: &Intrinsic) -> Result<Option<Value>, Trap> {
        use IntrinsicKind as K;
        let mut args = Vec::new();
        match &i.kind {
            K::Forall | K::Exists => return Err(Trap::Unsupported("quantifier".into())),
            K::Binding(_) => return Err(Trap::Unsupported("binding".into())),
            _ => {}
        }
        for a in &i.args {
            args.push(self.eval(env, a)?);
        }
        let cmp = |op: BinOp| arith(op, &Type::Bool, args[0], args[1]).map(Some);
        match &i.kind {
            K::Eq => cmp(BinOp::Eq),
            K::Neq => cmp(BinOp::Ne),
            K::Lt => cmp(BinOp::Lt),
            K::Lte => cmp(BinOp::Le),
            K::Gt => cmp(BinOp::Gt),
            K::Gte => cmp(BinOp::Ge),
            K::Not => Ok(Some(Value::bool(!args[0].truthy()))),
            K::Implies => Ok(Some(Value::bool(!args[0].truthy() || args[1].truthy()))),
            K::Conditional => Ok(Some(if args[0].truthy() { args[1] } else { args[2] })),
            K::Old => Ok(Some(args[0])),
            K::Invariant | K::Assertion | K::Assumption => {
                if args[0].truthy() {
                    Ok(None)
                } else {
                    Err(Trap::CheckFailed)
                }
            }
            K::Forall | K::Exists | K::Binding(_) => unreachable!(),
        }
    }
}

/// Run `body` on `args` with no callees available.
pub fn eval_grimp(body: &Body, args: &[Value], heap: &mut Heap) -> Result<Option<Value>, Trap> {
    let methods = HashMap::new();
    let mut it = Interpreter {
        heap,
        methods: &methods,
        fuel: 1_000_000,
    };
    it.run(body, args)
}
