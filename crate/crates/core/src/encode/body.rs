// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Procedures: signatures, contracts and statement translation.

use std::collections::{BTreeSet, HashMap};

use super::expr::{assign_names, convert, fresh, sort_of, Scope, Sort, Translator};
use super::*;
use crate::boogie::{BExpr, BStmt, Param, ProcBody, Procedure, Spec, HEAP};
use crate::ir::*;
use crate::spec::MethodContracts;

pub struct ProcedureInput<'b> {
    pub body: &'b Body,
    pub contracts: &'b MethodContracts,
    pub modifies_heap: bool,
}

fn is_effect(e: &Expr, ctx: &Context) -> bool {
    match &e.kind {
        ExprKind::New(_) | ExprKind::NewArray(..) => true,
        ExprKind::Call(c) => ctx.callee_kind(&c.method) == CalleeKind::Procedure,
        _ => false,
    }
}

fn hoist(e: &mut Expr, locals: &mut Body, ctx: &Context, pre: &mut Vec<Stmt>, offset: Option<u32>) {
    for c in e.children_mut() {
        hoist(c, locals, ctx, pre, offset);
    }
    if is_effect(e, ctx) {
        let n = locals.locals.iter().filter(|l| l.name.starts_with("#r")).count();
        let t = locals.add_local(&format!("#r{n}"), None, e.ty.clone(), Role::Temp);
        let mut v = locals.local_expr(t);
        v.expected = e.expected.clone();
        let call = std::mem::replace(e, v);
        pre.push(Stmt::new(StmtKind::Assign(LValue::Local(t), call), offset));
    }
}

/// Move procedure calls and allocations nested inside expressions into
/// assignments to fresh `#rN` locals, innermost and leftmost first. A call
/// that is the whole right-hand side of a local assignment, or a whole
/// invoke statement, stays in place.
pub fn extract_calls(body: &mut Body, ctx: &Context) {
    let stmts = std::mem::take(&mut body.stmts);
    let mut out = Vec::with_capacity(stmts.len());
    for mut s in stmts {
        let mut pre = Vec::new();
        let offset = s.offset;
        match &mut s.kind {
            StmtKind::Assign(LValue::Local(_), e) | StmtKind::Invoke(e) if is_effect(e, ctx) => {
                for c in e.children_mut() {
                    hoist(c, body, ctx, &mut pre, offset);
                }
            }
            _ => {
                for e in s.exprs_mut() {
                    hoist(e, body, ctx, &mut pre, offset);
                }
            }
        }
        out.extend(pre);
        out.push(s);
    }
    body.stmts = out;
}

pub(crate) fn label_name(l: Label) -> String {
    format!("L{l}")
}

struct Emitter<'c, 'a, 'b> {
    t: Translator<'c, 'a>,
    body: &'b Body,
    sc: Scope,
    names: HashMap<LocalId, String>,
    extra: Vec<Param>,
}

impl Emitter<'_, '_, '_> {
    fn temp(&mut self, ty: BType) -> String {
        let name = fresh("#r", &self.sc.taken);
        self.sc.taken.insert(name.clone());
        self.extra.push(Param::new(&name, ty));
        name
    }

    fn heap() -> BExpr {
        BExpr::id(HEAP)
    }

    fn assign_heap(&self, v: BExpr) -> BStmt {
        BStmt::Assign(HEAP.to_string(), v)
    }

    /// `call outs := M(args)` for a procedure call, with the result stored in
    /// `into` (of sort `want`) when given.
    fn call(&mut self, c: &Call, into: Option<(String, Sort)>) -> Result<Vec<BStmt>> {
        let m = (self.t.ctx.resolve)(&c.method);
        let args = self.t.call_args(&mut self.sc, c, &m)?;
        self.t.uses.callees.insert(m.clone(), c.receiver.is_some());
        let ret = m.descriptor.ret.as_ref().map(Type::from_field);
        let proc = method_name(&m);
        let mut out = Vec::new();
        let outs = match (&ret, into) {
            (None, _) => Vec::new(),
            (Some(r), Some((x, s))) if sort_of(r) == s => vec![x],
            (Some(r), into) => {
                let tmp = self.temp(translate_type(r));
                if let Some((x, s)) = into {
                    out.push(BStmt::Call {
                        outs: vec![tmp.clone()],
                        proc,
                        args,
                    });
                    out.push(BStmt::Assign(x, convert(BExpr::id(&tmp), sort_of(r), s)?));
                    return Ok(out);
                }
                vec![tmp]
            }
        };
        out.push(BStmt::Call { outs, proc, args });
        Ok(out)
    }

    fn local_name(&self, id: LocalId) -> Result<String> {
        self.names
            .get(&id)
            .cloned()
            .ok_or_else(|| EncodeError::Unsupported(format!("undeclared local `{}`", self.body.locals[id].name)))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Vec<BStmt>> {
        Ok(match &s.kind {
            StmtKind::Label(l) => vec![BStmt::Label(label_name(*l))],
            StmtKind::Goto(l) => vec![BStmt::Goto(vec![label_name(*l)])],
            StmtKind::If(c, l) => vec![BStmt::If {
                cond: self.t.expr_as(&mut self.sc, c, Sort::Bool)?,
                then: vec![BStmt::Goto(vec![label_name(*l)])],
                els: None,
            }],
            StmtKind::Return(None) => vec![BStmt::Return],
            StmtKind::Return(Some(e)) => {
                let s = sort_of(self.body.ret.as_ref().unwrap_or(e.ex()));
                vec![
                    BStmt::Assign(RET.to_string(), self.t.expr_as(&mut self.sc, e, s)?),
                    BStmt::Return,
                ]
            }
            StmtKind::Check(k, e) => {
                let v = self.t.expr_as(&mut self.sc, e, Sort::Bool)?;
                vec![match k {
                    CheckKind::Assert => BStmt::Assert(v),
                    CheckKind::Assume => BStmt::Assume(v),
                }]
            }
            StmtKind::Assign(LValue::Local(x), e) => {
                let name = self.local_name(*x)?;
                let want = sort_of(&self.body.locals[*x].ty);
                match &e.kind {
                    ExprKind::Call(c) if self.t.ctx.callee_kind(&c.method) == CalleeKind::Procedure => {
                        self.call(c, Some((name, want)))?
                    }
                    ExprKind::New(c) => {
                        let c = self.t.uses.class(c);
                        vec![BStmt::Call {
                            outs: vec![name],
                            proc: "new".into(),
                            args: vec![BExpr::id(&c)],
                        }]
                    }
                    ExprKind::NewArray(_, n) => {
                        let n = self.t.expr_as(&mut self.sc, n, Sort::Int)?;
                        vec![BStmt::Call {
                            outs: vec![name],
                            proc: "array.new".into(),
                            args: vec![n],
                        }]
                    }
                    _ => vec![BStmt::Assign(name, self.t.expr_as(&mut self.sc, e, want)?)],
                }
            }
            StmtKind::Assign(LValue::Field(o, f), v) => {
                let o = self.t.expr_as(&mut self.sc, o, Sort::Ref)?;
                let v = self.t.expr_as(&mut self.sc, v, sort_of(&Type::from_field(&f.descriptor)))?;
                let f = BExpr::Id(self.t.uses.field(f));
                vec![self.assign_heap(BExpr::app("update", vec![Self::heap(), o, f, v]))]
            }
            StmtKind::Assign(LValue::Static(f), v) => {
                let v = self.t.expr_as(&mut self.sc, v, sort_of(&Type::from_field(&f.descriptor)))?;
                let c = BExpr::app("type2ref", vec![BExpr::Id(self.t.uses.class(&f.owner))]);
                let f = BExpr::Id(self.t.uses.field(f));
                vec![self.assign_heap(BExpr::app("update", vec![Self::heap(), c, f, v]))]
            }
            StmtKind::Assign(LValue::Array(a, k), v) => {
                let elem = a.ty.element().cloned().unwrap_or_else(|| v.ex().clone());
                let a = self.t.expr_as(&mut self.sc, a, Sort::Ref)?;
                let k = self.t.expr_as(&mut self.sc, k, Sort::Int)?;
                let v = self.t.expr_as(&mut self.sc, v, sort_of(&elem))?;
                vec![self.assign_heap(BExpr::app("array.update", vec![Self::heap(), a, k, v]))]
            }
            StmtKind::Invoke(e) => match &e.kind {
                ExprKind::Call(c) if self.t.ctx.callee_kind(&c.method) == CalleeKind::Procedure => {
                    self.call(c, None)?
                }
                _ => Vec::new(),
            },
        })
    }
}

/// Arguments for a contract predicate: receiver, data parameters and, for
/// postconditions of non-void methods, the result.
fn contract_args(
    body: &Body,
    names: &HashMap<LocalId, String>,
    agg: &Aggregate,
    ensure: bool,
) -> Result<Vec<BExpr>> {
    let data = body.data_params();
    let mismatch = || {
        EncodeError::TypeConflict(format!(
            "predicate `{}` does not fit the parameters of `{}`",
            agg.method.name, body.method.name
        ))
    };
    let mut out = Vec::new();
    for p in &agg.params {
        let want = sort_of(&agg.locals[*p].ty);
        let (e, have) = match agg.locals[*p].role {
            Role::Receiver => {
                let r = body.receiver().ok_or_else(mismatch)?;
                (BExpr::id(&names[&r]), Sort::Ref)
            }
            Role::Param(i) if i < data.len() => {
                (BExpr::id(&names[&data[i]]), sort_of(&body.locals[data[i]].ty))
            }
            Role::Param(i) if ensure && i == data.len() && body.ret.is_some() => {
                (BExpr::id(RET), sort_of(body.ret.as_ref().expect("non-void")))
            }
            _ => return Err(mismatch()),
        };
        out.push(convert(e, have, want)?);
    }
    Ok(out)
}

/// Translate a lifted, call-extracted and invariant-annotated body.
pub fn translate_procedure(ctx: &Context, uses: &mut Uses, input: &ProcedureInput) -> Result<Procedure> {
    let body = input.body;
    let mut taken = ctx.reserved.clone();
    taken.insert(RET.to_string());
    taken.insert(HEAP.to_string());
    let mut names = assign_names(&body.locals, body.params.iter().copied(), &mut taken);
    let params: Vec<Param> = body
        .params
        .iter()
        .map(|p| Param::new(&names[p], translate_type(&body.locals[*p].ty)))
        .collect();
    let returns: Vec<Param> = body
        .ret
        .iter()
        .map(|t| Param::new(RET, translate_type(t)))
        .collect();

    let mut used = BTreeSet::new();
    for s in &body.stmts {
        used.extend(s.defines());
        for e in s.exprs() {
            used.extend(e.locals());
        }
    }
    let local_ids: Vec<LocalId> = used
        .into_iter()
        .filter(|id| !body.params.contains(id) && body.locals[*id].role != Role::Bound)
        .collect();
    names.extend(assign_names(&body.locals, local_ids.iter().copied(), &mut taken));

    let sc = Scope {
        vars: body.locals.clone(),
        bind: names.iter().map(|(id, n)| (*id, BExpr::id(n))).collect(),
        heap: BExpr::id(HEAP),
        old_ok: false,
        taken,
    };
    let mut em = Emitter {
        t: Translator {
            ctx,
            uses,
            inlining: Vec::new(),
        },
        body,
        sc,
        names,
        extra: Vec::new(),
    };

    let mut specs = Vec::new();
    let clauses = input
        .contracts
        .requires
        .iter()
        .map(|p| (p, false))
        .chain(input.contracts.ensures.iter().map(|p| (p, true)));
    for (p, ensure) in clauses {
        let agg = ctx
            .aggregates
            .get(p)
            .ok_or_else(|| EncodeError::Unsupported(format!("predicate `{p}` has no aggregate")))?;
        let args = contract_args(body, &em.names, agg, ensure)?;
        em.sc.old_ok = ensure;
        let e = em.t.inline_predicate(&em.sc, p, args)?;
        specs.push(if ensure {
            Spec::Ensures(e)
        } else {
            Spec::Requires(e)
        });
    }
    em.sc.old_ok = false;
    if input.modifies_heap {
        specs.push(Spec::Modifies(vec![HEAP.to_string()]));
    }

    let mut stmts = Vec::new();
    for s in &body.stmts {
        stmts.extend(em.stmt(s)?);
    }
    let mut locals: Vec<Param> = local_ids
        .iter()
        .map(|id| Param::new(&em.names[id], translate_type(&body.locals[*id].ty)))
        .collect();
    locals.extend(em.extra);
    Ok(Procedure {
        name: method_name(&body.method),
        params,
        returns,
        specs,
        body: Some(ProcBody { locals, stmts }),
    })
}
