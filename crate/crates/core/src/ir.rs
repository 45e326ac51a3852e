// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Grimp-style three-address IR with expression trees.

use std::collections::BTreeSet;
use std::fmt;

use crate::classfile::{FieldRef, FieldType, InvokeKind, MethodDescriptor, MethodRef};

pub type LocalId = usize;
pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Bool,
    Byte,
    Char,
    Short,
    Int,
    Long,
    Float,
    Double,
    /// Internal class name.
    Ref(String),
    Array(Box<Type>),
    Null,
}

impl Type {
    pub fn from_field(t: &FieldType) -> Type {
        match t {
            FieldType::Boolean => Type::Bool,
            FieldType::Byte => Type::Byte,
            FieldType::Char => Type::Char,
            FieldType::Short => Type::Short,
            FieldType::Int => Type::Int,
            FieldType::Long => Type::Long,
            FieldType::Float => Type::Float,
            FieldType::Double => Type::Double,
            FieldType::Object(n) => Type::Ref(n.clone()),
            FieldType::Array(e) => Type::Array(Box::new(Type::from_field(e))),
        }
    }

    /// Parse the operand of `checkcast`/`instanceof`/`anewarray`: an internal
    /// class name or an array descriptor.
    pub fn from_class_operand(name: &str) -> Type {
        if name.starts_with('[') {
            if let Ok(t) = FieldType::parse(name) {
                return Type::from_field(&t);
            }
        }
        Type::Ref(name.to_string())
    }

    pub fn object() -> Type {
        Type::Ref("java/lang/Object".into())
    }

    pub fn is_reference(&self) -> bool {
        matches!(self, Type::Ref(_) | Type::Array(_) | Type::Null)
    }

    pub fn is_floating(&self) -> bool {
        matches!(self, Type::Float | Type::Double)
    }

    /// Byte, char, short, int and long.
    pub fn is_integral(&self) -> bool {
        matches!(self, Type::Byte | Type::Char | Type::Short | Type::Int | Type::Long)
    }

    pub fn is_numeric(&self) -> bool {
        self.is_integral() || self.is_floating()
    }

    pub fn is_wide(&self) -> bool {
        matches!(self, Type::Long | Type::Double)
    }

    pub fn slots(&self) -> u16 {
        if self.is_wide() {
            2
        } else {
            1
        }
    }

    pub fn element(&self) -> Option<&Type> {
        match self {
            Type::Array(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "boolean"),
            Type::Byte => write!(f, "byte"),
            Type::Char => write!(f, "char"),
            Type::Short => write!(f, "short"),
            Type::Int => write!(f, "int"),
            Type::Long => write!(f, "long"),
            Type::Float => write!(f, "float"),
            Type::Double => write!(f, "double"),
            Type::Ref(n) => write!(f, "{}", n.replace('/', ".")),
            Type::Array(e) => write!(f, "{e}[]"),
            Type::Null => write!(f, "null_type"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Literal {
    /// Any integral constant; the expression's type says which.
    Int(i64),
    Float(f64),
    Null,
    String(String),
    Class(String),
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a == b,
            (Literal::Float(a), Literal::Float(b)) => a.to_bits() == b.to_bits(),
            (Literal::Null, Literal::Null) => true,
            (Literal::String(a), Literal::String(b)) => a == b,
            (Literal::Class(a), Literal::Class(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Ushr,
    And,
    Or,
    Xor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    /// `lcmp`
    Cmp,
    /// `fcmpl`/`dcmpl`: NaN compares as -1.
    Cmpl,
    /// `fcmpg`/`dcmpg`: NaN compares as 1.
    Cmpg,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Ushr => ">>>",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Cmp => "cmp",
            BinOp::Cmpl => "cmpl",
            BinOp::Cmpg => "cmpg",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_bitwise(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor)
    }

    pub fn is_shift(self) -> bool {
        matches!(self, BinOp::Shl | BinOp::Shr | BinOp::Ushr)
    }

    /// The comparison that holds exactly when `self` does not.
    pub fn negate(self) -> Option<BinOp> {
        Some(match self {
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            BinOp::Lt => BinOp::Ge,
            BinOp::Ge => BinOp::Lt,
            BinOp::Gt => BinOp::Le,
            BinOp::Le => BinOp::Gt,
            _ => return None,
        })
    }
}

/// Specification-library operations recognized in lifted code.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntrinsicKind {
    Eq,
    Neq,
    Lt,
    Lte,
    Gt,
    Gte,
    Not,
    Implies,
    Conditional,
    Forall,
    Exists,
    Old,
    Invariant,
    Assertion,
    Assumption,
    Binding(Type),
}

impl IntrinsicKind {
    pub fn name(&self) -> String {
        match self {
            IntrinsicKind::Eq => "eq".into(),
            IntrinsicKind::Neq => "neq".into(),
            IntrinsicKind::Lt => "lt".into(),
            IntrinsicKind::Lte => "lte".into(),
            IntrinsicKind::Gt => "gt".into(),
            IntrinsicKind::Gte => "gte".into(),
            IntrinsicKind::Not => "not".into(),
            IntrinsicKind::Implies => "implies".into(),
            IntrinsicKind::Conditional => "conditional".into(),
            IntrinsicKind::Forall => "forall".into(),
            IntrinsicKind::Exists => "exists".into(),
            IntrinsicKind::Old => "old".into(),
            IntrinsicKind::Invariant => "invariant".into(),
            IntrinsicKind::Assertion => "assertion".into(),
            IntrinsicKind::Assumption => "assumption".into(),
            IntrinsicKind::Binding(t) => format!("Binding.{t}"),
        }
    }

    pub fn is_quantifier(&self) -> bool {
        matches!(self, IntrinsicKind::Forall | IntrinsicKind::Exists)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Call {
    pub kind: InvokeKind,
    pub method: MethodRef,
    pub receiver: Option<Expr>,
    pub args: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Intrinsic {
    pub kind: IntrinsicKind,
    /// Descriptor of the library method, which fixes the argument types.
    pub descriptor: MethodDescriptor,
    pub args: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Local(LocalId),
    Lit(Literal),
    Field(Box<Expr>, FieldRef),
    Static(FieldRef),
    ArrayRead(Box<Expr>, Box<Expr>),
    ArrayLength(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Box<Call>),
    /// Conversion to the node's own type.
    Cast(Box<Expr>),
    InstanceOf(Box<Expr>, Type),
    New(String),
    NewArray(Type, Box<Expr>),
    Intrinsic(Box<Intrinsic>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    /// Type as produced by the bytecode (refined for locals and eager
    /// boolean operators by type inference).
    pub ty: Type,
    /// Type required by the context, once inferred.
    pub expected: Option<Type>,
}

impl Expr {
    pub fn new(kind: ExprKind, ty: Type) -> Expr {
        Expr {
            kind,
            ty,
            expected: None,
        }
    }

    pub fn local(id: LocalId, ty: Type) -> Expr {
        Expr::new(ExprKind::Local(id), ty)
    }

    pub fn int(v: i64) -> Expr {
        Expr::new(ExprKind::Lit(Literal::Int(v)), Type::Int)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr, ty: Type) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), ty)
    }

    /// The expected type if inferred, else the raw type.
    pub fn ex(&self) -> &Type {
        self.expected.as_ref().unwrap_or(&self.ty)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, ExprKind::Local(_) | ExprKind::Lit(_))
    }

    pub fn as_local(&self) -> Option<LocalId> {
        match self.kind {
            ExprKind::Local(id) => Some(id),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.kind {
            ExprKind::Lit(Literal::Int(v)) => Some(v),
            _ => None,
        }
    }

    pub fn as_intrinsic(&self) -> Option<&Intrinsic> {
        match &self.kind {
            ExprKind::Intrinsic(i) => Some(i),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Local(_) | ExprKind::Lit(_) | ExprKind::Static(_) | ExprKind::New(_) => {
                Vec::new()
            }
            ExprKind::Field(o, _) => vec![o],
            ExprKind::ArrayRead(a, i) => vec![a, i],
            ExprKind::ArrayLength(a)
            | ExprKind::Neg(a)
            | ExprKind::Cast(a)
            | ExprKind::InstanceOf(a, _)
            | ExprKind::NewArray(_, a) => vec![a],
            ExprKind::Binary(_, a, b) => vec![a, b],
            ExprKind::Call(c) => c.receiver.iter().chain(c.args.iter()).collect(),
            ExprKind::Intrinsic(i) => i.args.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Local(_) | ExprKind::Lit(_) | ExprKind::Static(_) | ExprKind::New(_) => {
                Vec::new()
            }
            ExprKind::Field(o, _) => vec![o],
            ExprKind::ArrayRead(a, i) => vec![a, i],
            ExprKind::ArrayLength(a)
            | ExprKind::Neg(a)
            | ExprKind::Cast(a)
            | ExprKind::InstanceOf(a, _)
            | ExprKind::NewArray(_, a) => vec![a],
            ExprKind::Binary(_, a, b) => vec![a, b],
            ExprKind::Call(c) => {
                let c = &mut **c;
                c.receiver.iter_mut().chain(c.args.iter_mut()).collect()
            }
            ExprKind::Intrinsic(i) => i.args.iter_mut().collect(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Post-order mutable traversal.
    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        for c in self.children_mut() {
            c.walk_mut(f);
        }
        f(self);
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn reads_local(&self, id: LocalId) -> bool {
        self.any(&|e| e.kind == ExprKind::Local(id))
    }

    pub fn locals(&self) -> BTreeSet<LocalId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let ExprKind::Local(id) = e.kind {
                out.insert(id);
            }
        });
        out
    }

    pub fn has_call(&self) -> bool {
        self.any(&|e| matches!(e.kind, ExprKind::Call(_)))
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn replace_locals(&mut self, f: &dyn Fn(LocalId) -> Option<Expr>) {
        if let ExprKind::Local(id) = self.kind {
            if let Some(mut new) = f(id) {
                new.expected = self.expected.clone().or(new.expected);
                *self = new;
            }
            return;
        }
        for c in self.children_mut() {
            c.replace_locals(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LValue {
    Local(LocalId),
    Field(Expr, FieldRef),
    Static(FieldRef),
    Array(Expr, Expr),
}

impl LValue {
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            LValue::Local(_) | LValue::Static(_) => Vec::new(),
            LValue::Field(o, _) => vec![o],
            LValue::Array(a, i) => vec![a, i],
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            LValue::Local(_) | LValue::Static(_) => Vec::new(),
            LValue::Field(o, _) => vec![o],
            LValue::Array(a, i) => vec![a, i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Assert,
    Assume,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign(LValue, Expr),
    If(Expr, Label),
    Goto(Label),
    Return(Option<Expr>),
    /// A call (or intrinsic) evaluated for its effect.
    Invoke(Expr),
    Label(Label),
    Check(CheckKind, Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    /// Bytecode offset of the instruction this statement came from.
    pub offset: Option<u32>,
}

impl Stmt {
    pub fn new(kind: StmtKind, offset: Option<u32>) -> Stmt {
        Stmt { kind, offset }
    }

    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign(lv, e) => {
                let mut v = lv.exprs();
                v.push(e);
                v
            }
            StmtKind::If(e, _) | StmtKind::Invoke(e) | StmtKind::Check(_, e) => vec![e],
            StmtKind::Return(Some(e)) => vec![e],
            _ => Vec::new(),
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign(lv, e) => {
                let mut v = lv.exprs_mut();
                v.push(e);
                v
            }
            StmtKind::If(e, _) | StmtKind::Invoke(e) | StmtKind::Check(_, e) => vec![e],
            StmtKind::Return(Some(e)) => vec![e],
            _ => Vec::new(),
        }
    }

    pub fn reads_local(&self, id: LocalId) -> bool {
        self.exprs().iter().any(|e| e.reads_local(id))
    }

    pub fn defines(&self) -> Option<LocalId> {
        match self.kind {
            StmtKind::Assign(LValue::Local(id), _) => Some(id),
            _ => None,
        }
    }

    /// Jump target, if this statement can branch.
    pub fn target(&self) -> Option<Label> {
        match self.kind {
            StmtKind::If(_, l) | StmtKind::Goto(l) => Some(l),
            _ => None,
        }
    }

    pub fn falls_through(&self) -> bool {
        !matches!(self.kind, StmtKind::Goto(_) | StmtKind::Return(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Receiver,
    /// Index among the declared (non-receiver) parameters.
    Param(usize),
    Local,
    Temp,
    /// Bound by a quantifier; introduced by a `Binding` factory call.
    Bound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalVar {
    pub name: String,
    pub slot: Option<u16>,
    pub ty: Type,
    pub role: Role,
    /// Type fixed by a descriptor or debug info rather than inferred.
    pub declared: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Body {
    /// Internal name of the declaring class.
    pub class: String,
    pub method: MethodRef,
    pub is_static: bool,
    /// Receiver first (for instance methods), then declared parameters.
    pub params: Vec<LocalId>,
    pub ret: Option<Type>,
    pub locals: Vec<LocalVar>,
    pub stmts: Vec<Stmt>,
    pub next_label: Label,
}

impl Body {
    pub fn new(method: MethodRef, is_static: bool) -> Body {
        Body {
            class: method.owner.clone(),
            ret: method.descriptor.ret.as_ref().map(Type::from_field),
            method,
            is_static,
            params: Vec::new(),
            locals: Vec::new(),
            stmts: Vec::new(),
            next_label: 0,
        }
    }

    pub fn add_local(&mut self, name: &str, slot: Option<u16>, ty: Type, role: Role) -> LocalId {
        let mut unique = name.to_string();
        let mut n = 1;
        while self.locals.iter().any(|l| l.name == unique) {
            unique = format!("{name}${n}");
            n += 1;
        }
        self.locals.push(LocalVar {
            name: unique,
            slot,
            ty,
            role,
            declared: matches!(role, Role::Receiver | Role::Param(_)),
        });
        self.locals.len() - 1
    }

    pub fn new_temp(&mut self, ty: Type) -> LocalId {
        let n = self.locals.iter().filter(|l| l.role == Role::Temp).count();
        self.add_local(&format!("$t{n}"), None, ty, Role::Temp)
    }

    pub fn new_label(&mut self) -> Label {
        self.next_label += 1;
        self.next_label - 1
    }

    pub fn local_expr(&self, id: LocalId) -> Expr {
        Expr::local(id, self.locals[id].ty.clone())
    }

    pub fn receiver(&self) -> Option<LocalId> {
        self.params
            .first()
            .copied()
            .filter(|&p| self.locals[p].role == Role::Receiver)
    }

    /// Declared parameters without the receiver.
    pub fn data_params(&self) -> &[LocalId] {
        if self.receiver().is_some() {
            &self.params[1..]
        } else {
            &self.params
        }
    }

    pub fn label_index(&self, l: Label) -> Option<usize> {
        self.stmts
            .iter()
            .position(|s| s.kind == StmtKind::Label(l))
    }

    pub fn defs_of(&self, id: LocalId) -> Vec<usize> {
        self.stmts
            .iter()
            .enumerate()
            .filter(|(_, s)| s.defines() == Some(id))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn uses_of(&self, id: LocalId) -> Vec<usize> {
        self.stmts
            .iter()
            .enumerate()
            .filter(|(_, s)| s.reads_local(id))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn for_each_expr(&self, f: &mut dyn FnMut(&Expr)) {
        for s in &self.stmts {
            for e in s.exprs() {
                e.walk(&mut |x| f(x));
            }
        }
    }

    pub fn display_expr(&self, e: &Expr) -> String {
        ExprDisplay { body: self, expr: e }.to_string()
    }
}

struct ExprDisplay<'a> {
    body: &'a Body,
    expr: &'a Expr,
}

impl ExprDisplay<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            body: self.body,
            expr: e,
        }
    }

    fn operand(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(e.kind, ExprKind::Binary(..)) {
            write!(f, "({})", self.sub(e))
        } else {
            write!(f, "{}", self.sub(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.expr;
        match &e.kind {
            ExprKind::Local(id) => match self.body.locals.get(*id) {
                Some(l) => write!(f, "{}", l.name),
                None => write!(f, "?{id}"),
            },
            ExprKind::Lit(l) => match l {
                Literal::Int(v) => match e.ty {
                    Type::Long => write!(f, "{v}L"),
                    _ => write!(f, "{v}"),
                },
                Literal::Float(v) => write!(f, "{v:?}"),
                Literal::Null => write!(f, "null"),
                Literal::String(s) => write!(f, "{s:?}"),
                Literal::Class(c) => write!(f, "class {c}"),
            },
            ExprKind::Field(o, r) => {
                self.operand(o, f)?;
                write!(f, ".{}", r.name)
            }
            ExprKind::Static(r) => write!(f, "{}.{}", r.owner.replace('/', "."), r.name),
            ExprKind::ArrayRead(a, i) => {
                self.operand(a, f)?;
                write!(f, "[{}]", self.sub(i))
            }
            ExprKind::ArrayLength(a) => {
                write!(f, "lengthof ")?;
                self.operand(a, f)
            }
            ExprKind::Neg(a) => {
                write!(f, "neg ")?;
                self.operand(a, f)
            }
            ExprKind::Binary(op, a, b) => {
                self.operand(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.operand(b, f)
            }
            ExprKind::Call(c) => {
                match &c.receiver {
                    Some(r) => {
                        self.operand(r, f)?;
                        write!(f, ".{}(", c.method.name)?;
                    }
                    None => write!(f, "{}.{}(", c.method.owner.replace('/', "."), c.method.name)?,
                }
                for (i, a) in c.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", self.sub(a))?;
                }
                write!(f, ")")
            }
            ExprKind::Cast(a) => {
                write!(f, "({}) ", e.ty)?;
                self.operand(a, f)
            }
            ExprKind::InstanceOf(a, t) => {
                self.operand(a, f)?;
                write!(f, " instanceof {t}")
            }
            ExprKind::New(c) => write!(f, "new {}", c.replace('/', ".")),
            ExprKind::NewArray(t, n) => write!(f, "newarray ({t})[{}]", self.sub(n)),
            ExprKind::Intrinsic(i) => {
                write!(f, "{}(", i.kind.name())?;
                for (k, a) in i.args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", self.sub(a))?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {{", self.method)?;
        for s in &self.stmts {
            let d = |e: &Expr| self.display_expr(e);
            match &s.kind {
                StmtKind::Assign(lv, e) => {
                    let lhs = match lv {
                        LValue::Local(id) => self.locals[*id].name.clone(),
                        LValue::Field(o, r) => format!("{}.{}", d(o), r.name),
                        LValue::Static(r) => format!("{}.{}", r.owner.replace('/', "."), r.name),
                        LValue::Array(a, i) => format!("{}[{}]", d(a), d(i)),
                    };
                    writeln!(f, "  {lhs} = {}", d(e))?
                }
                StmtKind::If(c, l) => writeln!(f, "  if {} goto L{l}", d(c))?,
                StmtKind::Goto(l) => writeln!(f, "  goto L{l}")?,
                StmtKind::Return(None) => writeln!(f, "  return")?,
                StmtKind::Return(Some(e)) => writeln!(f, "  return {}", d(e))?,
                StmtKind::Invoke(e) => writeln!(f, "  {}", d(e))?,
                StmtKind::Label(l) => writeln!(f, " L{l}:")?,
                StmtKind::Check(CheckKind::Assert, e) => writeln!(f, "  assert {}", d(e))?,
                StmtKind::Check(CheckKind::Assume, e) => writeln!(f, "  assume {}", d(e))?,
            }
        }
        write!(f, "}}")
    }
}
