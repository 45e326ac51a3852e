// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Recovery of a single pure expression from straight-line specification
//! code by substituting each assigned local with its definition.

use std::collections::HashMap;

use super::{SpecError, Violation, ViolationKind};
use crate::classfile::MethodRef;
use crate::ir::*;
use crate::lift::interp::Interpreter;
use crate::lift::{Heap, Trap, Value};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// A pure expression over the locals of the body it was recovered from.
/// Free occurrences are parameters; `Role::Bound` locals are quantified.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub method: MethodRef,
    pub locals: Vec<LocalVar>,
    pub params: Vec<LocalId>,
    pub expr: Expr,
}

impl Aggregate {
    pub fn display(&self) -> String {
        let mut b = Body::new(self.method.clone(), true);
        b.locals = self.locals.clone();
        b.display_expr(&self.expr)
    }
}

/// The first reason `e` cannot appear in a pure expression, if any.
pub(crate) fn impurity(e: &Expr, is_pure: &dyn Fn(&MethodRef) -> bool) -> Option<ViolationKind> {
    let mut found = None;
    e.walk(&mut |x| {
        if found.is_some() {
            return;
        }
        match &x.kind {
            ExprKind::New(_) | ExprKind::NewArray(..) => found = Some(ViolationKind::Allocation),
            ExprKind::Call(c) if !is_pure(&c.method) => found = Some(ViolationKind::ImpureCall),
            ExprKind::Intrinsic(i)
                if matches!(
                    i.kind,
                    IntrinsicKind::Invariant | IntrinsicKind::Assertion | IntrinsicKind::Assumption
                ) =>
            {
                found = Some(ViolationKind::ImpureCall)
            }
            _ => {}
        }
    });
    found
}

/// Check that `body` is a straight-line sequence of local assignments of
/// pure expressions ending in a single return.
pub fn check_aggregable(body: &Body, is_pure: &dyn Fn(&MethodRef) -> bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = body.stmts.len();
    let mut push = |kind, index: usize, offset| {
        out.push(Violation {
            kind,
            index,
            offset,
        })
    };
    for (i, s) in body.stmts.iter().enumerate() {
        let at = s.offset;
        match &s.kind {
            StmtKind::Label(_) | StmtKind::If(..) | StmtKind::Goto(_) => {
                push(ViolationKind::Branching, i, at)
            }
            StmtKind::Assign(LValue::Local(_), e) | StmtKind::Invoke(e) => {
                if let Some(k) = impurity(e, is_pure) {
                    push(k, i, at);
                }
            }
            StmtKind::Assign(..) => push(ViolationKind::ImpureWrite, i, at),
            StmtKind::Check(..) => push(ViolationKind::ImpureCall, i, at),
            StmtKind::Return(None) => push(ViolationKind::MissingReturn, i, at),
            StmtKind::Return(Some(e)) => {
                if i + 1 != n {
                    push(ViolationKind::NonTrailingReturn, i, at);
                }
                if let Some(k) = impurity(e, is_pure) {
                    push(k, i, at);
                }
            }
        }
    }
    let ends_in_return = matches!(
        body.stmts.last().map(|s| &s.kind),
        Some(StmtKind::Return(Some(_)))
    );
    if !ends_in_return && !out.iter().any(|v| v.kind == ViolationKind::MissingReturn) {
        out.push(Violation {
            kind: ViolationKind::MissingReturn,
            index: n,
            offset: None,
        });
    }
    out
}

/// Size of `e` after substituting `env`, without building it.
fn substituted_size(e: &Expr, env: &HashMap<LocalId, (Expr, usize)>) -> usize {
    match e.kind {
        ExprKind::Local(id) => env.get(&id).map_or(1, |(_, n)| *n),
        _ => {
            1 + e
                .children()
                .iter()
                .map(|c| substituted_size(c, env))
                .fold(0usize, |a, b| a.saturating_add(b))
        }
    }
}

fn substitute(e: &Expr, env: &HashMap<LocalId, (Expr, usize)>) -> Expr {
    let mut out = e.clone();
    out.replace_locals(&|id| env.get(&id).map(|(x, _)| x.clone()));
    out
}

pub(crate) fn binding_type(e: &Expr) -> Option<Type> {
    match e.as_intrinsic() {
        Some(Intrinsic {
            kind: IntrinsicKind::Binding(t),
            ..
        }) => Some(t.clone()),
        _ => None,
    }
}

pub(crate) fn fresh_bound(locals: &mut Vec<LocalVar>, base: &str, ty: Type) -> LocalId {
    let mut name = base.to_string();
    let mut k = 1;
    while locals.iter().any(|l| l.name == name) {
        name = format!("{base}${k}");
        k += 1;
    }
    locals.push(LocalVar {
        name,
        slot: None,
        ty,
        role: Role::Bound,
        declared: true,
    });
    locals.len() - 1
}

/// Check that every bound variable occurs only under the quantifier that
/// binds it, and that quantifiers bind such variables.
pub(crate) fn check_binders(e: &Expr, locals: &[LocalVar]) -> Result<(), SpecError> {
    fn go(e: &Expr, locals: &[LocalVar], scope: &mut Vec<LocalId>) -> Result<(), SpecError> {
        match &e.kind {
            ExprKind::Intrinsic(i) if i.kind.is_quantifier() => {
                let b = i.args[0]
                    .as_local()
                    .filter(|b| locals[*b].role == Role::Bound)
                    .ok_or(SpecError::BadQuantifier)?;
                scope.push(b);
                let r = go(&i.args[1], locals, scope);
                scope.pop();
                r
            }
            ExprKind::Intrinsic(i) if matches!(i.kind, IntrinsicKind::Binding(_)) => {
                Err(SpecError::BadQuantifier)
            }
            ExprKind::Local(id) => {
                if locals[*id].role == Role::Bound && !scope.contains(id) {
                    Err(SpecError::BindingEscape(locals[*id].name.clone()))
                } else {
                    Ok(())
                }
            }
            _ => {
                for c in e.children() {
                    go(c, locals, scope)?;
                }
                Ok(())
            }
        }
    }
    go(e, locals, &mut Vec::new())
}

/// Build the aggregate of an aggregable body. Locals assigned more than
/// once are handled by substituting in statement order, which is the same as
/// renaming each assignment first.
pub fn aggregate(
    body: &Body,
    is_pure: &dyn Fn(&MethodRef) -> bool,
    budget: usize,
) -> Result<Aggregate, SpecError> {
    let violations = check_aggregable(body, is_pure);
    if !violations.is_empty() {
        return Err(SpecError::NotAggregable { violations });
    }
    let mut locals = body.locals.clone();
    let mut env: HashMap<LocalId, (Expr, usize)> = HashMap::new();
    let mut result = None;
    for s in &body.stmts {
        match &s.kind {
            StmtKind::Assign(LValue::Local(v), e) => {
                if let Some(t) = binding_type(e) {
                    let name = locals[*v].name.clone();
                    let b = fresh_bound(&mut locals, &name, t.clone());
                    env.insert(*v, (Expr::local(b, t), 1));
                    continue;
                }
                let size = substituted_size(e, &env);
                if size > budget {
                    return Err(SpecError::AggregateTooLarge { size, budget });
                }
                env.insert(*v, (substitute(e, &env), size));
            }
            StmtKind::Return(Some(e)) => {
                let size = substituted_size(e, &env);
                if size > budget {
                    return Err(SpecError::AggregateTooLarge { size, budget });
                }
                result = Some(substitute(e, &env));
            }
            _ => {}
        }
    }
    let expr = result.expect("aggregable bodies end in a return");
    check_binders(&expr, &locals)?;
    Ok(Aggregate {
        method: body.method.clone(),
        locals,
        params: body.params.clone(),
        expr,
    })
}

/// Evaluate an aggregate on parameter values (receiver first, if any).
pub fn evaluate(agg: &Aggregate, args: &[Value], heap: &mut Heap) -> Result<Value, Trap> {
    let methods = HashMap::new();
    let mut it = Interpreter {
        heap,
        methods: &methods,
        fuel: 1_000_000,
    };
    let bindings: Vec<(LocalId, Value)> = agg.params.iter().copied().zip(args.iter().copied()).collect();
    it.eval_expr(&agg.locals, &bindings, &agg.expr)
}
