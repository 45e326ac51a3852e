// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Local type recovery and expected-type reconstruction.
//!
//! Bytecode erases `boolean` (and the small integral types) into `int`.
//! Locals without declared types are solved over the lattice
//! unknown < boolean < int, then every expression node receives the type its
//! context requires.

use super::LiftError;
use crate::ir::*;

const UNKNOWN: u8 = 0;
const BOOL: u8 = 1;
const INT: u8 = 2;

fn is_int_kind(t: &Type) -> bool {
    matches!(t, Type::Bool | Type::Byte | Type::Char | Type::Short | Type::Int)
}

fn is_01(e: &Expr) -> bool {
    matches!(e.as_int(), Some(0 | 1)) && is_int_kind(&e.ty)
}

fn boolish(e: &Expr) -> bool {
    e.ty == Type::Bool || is_01(e)
}

struct Solver {
    inferable: Vec<bool>,
    level: Vec<u8>,
    hint: Vec<bool>,
}

impl Solver {
    fn nat(&self, body: &Body, e: &Expr) -> u8 {
        match &e.kind {
            ExprKind::Local(m) if self.inferable[*m] => self.level[*m],
            ExprKind::Lit(Literal::Int(0 | 1)) => UNKNOWN,
            ExprKind::Binary(op, a, b) if op.is_bitwise() => {
                self.nat(body, a).max(self.nat(body, b))
            }
            ExprKind::Binary(op, _, _) if op.is_comparison() => BOOL,
            ExprKind::Local(_) => {
                if body.locals.get(e.as_local().unwrap()).map(|l| &l.ty) == Some(&Type::Bool) {
                    BOOL
                } else {
                    INT
                }
            }
            _ => {
                if e.ty == Type::Bool {
                    BOOL
                } else {
                    INT
                }
            }
        }
    }

    fn raise(&mut self, e: &Expr, to: u8) -> bool {
        if let ExprKind::Local(m) = e.kind {
            if self.inferable[m] && self.level[m] < to {
                self.level[m] = to;
                return true;
            }
        }
        false
    }

    fn hint(&mut self, e: &Expr) {
        if let ExprKind::Local(m) = e.kind {
            if self.inferable[m] {
                self.hint[m] = true;
            }
        }
    }

    /// Demand a formal type from an argument.
    fn formal(&mut self, e: &Expr, t: &Type) -> bool {
        match t {
            Type::Bool => {
                self.hint(e);
                false
            }
            t if is_int_kind(t) => self.raise(e, INT),
            _ => false,
        }
    }

    fn uses(&mut self, body: &Body, e: &Expr) -> bool {
        let mut changed = false;
        match &e.kind {
            ExprKind::Binary(op, a, b) => {
                if op.is_bitwise() {
                    let n = self.nat(body, e);
                    if n == INT && is_int_kind(&e.ty) || !is_int_kind(&e.ty) {
                        changed |= self.raise(a, INT);
                        changed |= self.raise(b, INT);
                    } else {
                        self.hint(a);
                        self.hint(b);
                    }
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let (na, nb) = (self.nat(body, a), self.nat(body, b));
                    if na == INT && is_int_kind(&b.ty) {
                        changed |= self.raise(b, INT);
                    }
                    if nb == INT && is_int_kind(&a.ty) {
                        changed |= self.raise(a, INT);
                    }
                    if na == BOOL {
                        self.hint(b);
                    }
                    if nb == BOOL {
                        self.hint(a);
                    }
                } else {
                    changed |= self.raise(a, INT);
                    changed |= self.raise(b, INT);
                }
            }
            ExprKind::Neg(a) | ExprKind::NewArray(_, a) => changed |= self.raise(a, INT),
            ExprKind::Cast(a) if e.ty != Type::Bool => changed |= self.raise(a, INT),
            ExprKind::ArrayRead(_, i) => changed |= self.raise(i, INT),
            ExprKind::Call(c) => {
                let formals: Vec<Type> =
                    c.method.descriptor.params.iter().map(Type::from_field).collect();
                for (a, t) in c.args.iter().zip(&formals) {
                    changed |= self.formal(a, t);
                }
            }
            ExprKind::Intrinsic(i) => {
                let formals: Vec<Type> =
                    i.descriptor.params.iter().map(Type::from_field).collect();
                for (a, t) in i.args.iter().zip(&formals) {
                    changed |= self.formal(a, t);
                }
            }
            _ => {}
        }
        for c in e.children() {
            changed |= self.uses(body, c);
        }
        changed
    }
}

fn join_ref(a: Option<Type>, b: &Type) -> Option<Type> {
    match a {
        None => Some(b.clone()),
        Some(Type::Null) => Some(b.clone()),
        Some(a) if *b == Type::Null || a == *b => Some(a),
        Some(_) => Some(Type::object()),
    }
}

fn solve_locals(body: &mut Body) {
    let n = body.locals.len();
    let mut s = Solver {
        inferable: body
            .locals
            .iter()
            .map(|l| !l.declared && is_int_kind(&l.ty))
            .collect(),
        level: vec![UNKNOWN; n],
        hint: vec![false; n],
    };
    loop {
        let mut changed = false;
        for st in &body.stmts {
            match &st.kind {
                StmtKind::Assign(lv, e) => {
                    match lv {
                        LValue::Local(l) => {
                            if s.inferable[*l] {
                                let v = s.nat(body, e);
                                if s.level[*l] < v {
                                    s.level[*l] = v;
                                    changed = true;
                                }
                            } else {
                                changed |= s.formal(e, &body.locals[*l].ty.clone());
                            }
                        }
                        LValue::Field(_, f) | LValue::Static(f) => {
                            changed |= s.formal(e, &Type::from_field(&f.descriptor));
                        }
                        LValue::Array(a, i) => {
                            changed |= s.raise(i, INT);
                            if let Some(t) = a.ty.element() {
                                changed |= s.formal(e, &t.clone());
                            }
                        }
                    }
                }
                StmtKind::Return(Some(e)) => {
                    if let Some(t) = body.ret.clone() {
                        changed |= s.formal(e, &t);
                    }
                }
                StmtKind::If(c, _) => {
                    if let ExprKind::Binary(BinOp::Eq | BinOp::Ne, a, b) = &c.kind {
                        if is_01(b) {
                            s.hint(a);
                        }
                    }
                }
                StmtKind::Check(_, e) => s.hint(e),
                _ => {}
            }
            for e in st.exprs() {
                changed |= s.uses(body, e);
            }
        }
        if !changed {
            break;
        }
    }
    for (id, l) in body.locals.iter_mut().enumerate() {
        if s.inferable[id] {
            l.ty = match s.level[id] {
                INT => Type::Int,
                BOOL => Type::Bool,
                _ if s.hint[id] => Type::Bool,
                _ => Type::Int,
            };
        }
    }

    // Reference locals: join of assigned types.
    let refs: Vec<bool> = body
        .locals
        .iter()
        .map(|l| !l.declared && l.ty.is_reference())
        .collect();
    let mut joined: Vec<Option<Type>> = vec![None; n];
    loop {
        let mut changed = false;
        for st in &body.stmts {
            if let StmtKind::Assign(LValue::Local(l), e) = &st.kind {
                if refs[*l] {
                    let t = match e.as_local() {
                        Some(m) if refs[m] => match &joined[m] {
                            Some(t) => t.clone(),
                            None => continue,
                        },
                        _ => e.ty.clone(),
                    };
                    let j = join_ref(joined[*l].clone(), &t);
                    if j != joined[*l] {
                        joined[*l] = j;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for (id, l) in body.locals.iter_mut().enumerate() {
        if refs[id] {
            l.ty = match joined[id].take() {
                Some(Type::Null) | None => Type::object(),
                Some(t) => t,
            };
        }
    }
}

/// Recompute node types that depend on local types.
fn refresh(body: &mut Body) {
    let locals: Vec<Type> = body.locals.iter().map(|l| l.ty.clone()).collect();
    let fix = |e: &mut Expr| match &mut e.kind {
        ExprKind::Local(id) => e.ty = locals[*id].clone(),
        ExprKind::Binary(op, a, b) if op.is_bitwise() && is_int_kind(&e.ty) => {
            let any_bool = a.ty == Type::Bool || b.ty == Type::Bool;
            e.ty = if any_bool && boolish(a) && boolish(b) {
                Type::Bool
            } else {
                Type::Int
            };
        }
        ExprKind::ArrayRead(a, _) => {
            if let Type::Array(el) = &a.ty {
                let same_kind = (is_int_kind(el) && is_int_kind(&e.ty))
                    || (el.is_reference() && e.ty.is_reference())
                    || **el == e.ty;
                if same_kind {
                    e.ty = (**el).clone();
                }
            }
        }
        _ => {}
    };
    for st in &mut body.stmts {
        for e in st.exprs_mut() {
            e.walk_mut(&mut |x| fix(x));
        }
    }
}

fn numeric_join(a: &Type, b: &Type) -> Type {
    let rank = |t: &Type| match t {
        Type::Double => 3,
        Type::Float => 2,
        Type::Long => 1,
        _ => 0,
    };
    match rank(a).max(rank(b)) {
        3 => Type::Double,
        2 => Type::Float,
        1 => Type::Long,
        _ => Type::Int,
    }
}

fn widen_bool(t: &Type) -> Type {
    if is_int_kind(t) {
        Type::Int
    } else {
        t.clone()
    }
}

fn check(e: &Expr, t: &Type, body: &Body) -> Result<(), LiftError> {
    let bad = (t.is_reference() && !e.ty.is_reference())
        || (!t.is_reference() && e.ty.is_reference());
    if bad {
        return Err(LiftError::TypeConflict(format!(
            "`{}` of type {} used where {} is expected",
            body.display_expr(e),
            e.ty,
            t
        )));
    }
    Ok(())
}

fn expect(e: &mut Expr, t: Type, body: &Body) -> Result<(), LiftError> {
    check(e, &t, body)?;
    e.expected = Some(t);
    let own = |x: &Expr| x.ty.clone();
    match &mut e.kind {
        ExprKind::Local(_)
        | ExprKind::Lit(_)
        | ExprKind::Static(_)
        | ExprKind::New(_) => {}
        ExprKind::Field(o, _) | ExprKind::ArrayLength(o) | ExprKind::InstanceOf(o, _) => {
            let t = own(o);
            expect(o, t, body)?;
        }
        ExprKind::ArrayRead(a, i) => {
            let t = own(a);
            expect(a, t, body)?;
            expect(i, Type::Int, body)?;
        }
        ExprKind::NewArray(_, n) => expect(n, Type::Int, body)?,
        ExprKind::Neg(a) => {
            let t = widen_bool(&e.ty);
            expect(a, t, body)?;
        }
        ExprKind::Cast(a) => {
            let t = if e.ty.is_reference() {
                own(a)
            } else {
                widen_bool(&a.ty)
            };
            expect(a, t, body)?;
        }
        ExprKind::Binary(op, a, b) => {
            let op = *op;
            let (ta, tb) = if op.is_bitwise() {
                if e.ty == Type::Bool {
                    (Type::Bool, Type::Bool)
                } else {
                    (widen_bool(&e.ty), widen_bool(&e.ty))
                }
            } else if op.is_shift() {
                (widen_bool(&e.ty), Type::Int)
            } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                if a.ty.is_reference() || b.ty.is_reference() {
                    (own(a), own(b))
                } else if boolish(a) && boolish(b) && (a.ty == Type::Bool || b.ty == Type::Bool) {
                    (Type::Bool, Type::Bool)
                } else {
                    let j = numeric_join(&a.ty, &b.ty);
                    (j.clone(), j)
                }
            } else if op.is_comparison() || matches!(op, BinOp::Cmp | BinOp::Cmpl | BinOp::Cmpg) {
                let j = numeric_join(&a.ty, &b.ty);
                (j.clone(), j)
            } else {
                (widen_bool(&e.ty), widen_bool(&e.ty))
            };
            expect(a, ta, body)?;
            expect(b, tb, body)?;
        }
        ExprKind::Call(c) => {
            if let Some(r) = &mut c.receiver {
                let t = Type::Ref(c.method.owner.clone());
                expect(r, t, body)?;
            }
            let formals: Vec<Type> =
                c.method.descriptor.params.iter().map(Type::from_field).collect();
            for (a, t) in c.args.iter_mut().zip(formals) {
                expect(a, t, body)?;
            }
        }
        ExprKind::Intrinsic(i) => {
            let formals: Vec<Type> = i.descriptor.params.iter().map(Type::from_field).collect();
            for (a, t) in i.args.iter_mut().zip(formals) {
                let t = if t.is_reference() { own(a) } else { t };
                expect(a, t, body)?;
            }
        }
    }
    Ok(())
}

/// Annotate every expression with the type its context expects. Local types
/// not fixed by descriptors or debug information are inferred first.
pub fn infer_expected_types(body: &mut Body) -> Result<(), LiftError> {
    for _ in 0..3 {
        let before: Vec<Type> = body.locals.iter().map(|l| l.ty.clone()).collect();
        solve_locals(body);
        refresh(body);
        let after: Vec<Type> = body.locals.iter().map(|l| l.ty.clone()).collect();
        if before == after {
            break;
        }
    }
    let mut stmts = std::mem::take(&mut body.stmts);
    let result = (|| {
        for st in &mut stmts {
            match &mut st.kind {
                StmtKind::Assign(lv, e) => {
                    let target = match lv {
                        LValue::Local(l) => body.locals[*l].ty.clone(),
                        LValue::Field(o, f) => {
                            let t = Type::Ref(f.owner.clone());
                            expect(o, t, body)?;
                            Type::from_field(&f.descriptor)
                        }
                        LValue::Static(f) => Type::from_field(&f.descriptor),
                        LValue::Array(a, i) => {
                            let at = a.ty.clone();
                            expect(a, at.clone(), body)?;
                            expect(i, Type::Int, body)?;
                            at.element().cloned().unwrap_or_else(|| e.ty.clone())
                        }
                    };
                    expect(e, target, body)?;
                }
                StmtKind::If(c, _) | StmtKind::Check(_, c) => expect(c, Type::Bool, body)?,
                StmtKind::Return(Some(e)) => {
                    let t = body.ret.clone().unwrap_or_else(|| e.ty.clone());
                    expect(e, t, body)?;
                }
                StmtKind::Invoke(e) => {
                    let t = e.ty.clone();
                    expect(e, t, body)?;
                }
                _ => {}
            }
        }
        Ok(())
    })();
    body.stmts = stmts;
    result
}
