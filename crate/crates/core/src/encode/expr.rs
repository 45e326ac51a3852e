// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Expression translation and specification functions.

use std::collections::{BTreeSet, HashMap};

use super::*;
use crate::boogie::{BExpr, BinOp as B, Function, Param, Quantifier, UnOp};
use crate::ir::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sort {
    Int,
    Real,
    Bool,
    Ref,
}

pub(crate) fn sort_of(t: &Type) -> Sort {
    match t {
        Type::Bool => Sort::Bool,
        Type::Float | Type::Double => Sort::Real,
        t if t.is_reference() => Sort::Ref,
        _ => Sort::Int,
    }
}

fn join(a: Sort, b: Sort) -> Sort {
    if a == Sort::Real || b == Sort::Real {
        Sort::Real
    } else {
        Sort::Int
    }
}

pub(crate) fn real_literal(x: f64) -> Result<BExpr> {
    if !x.is_finite() {
        return Err(EncodeError::Unsupported(format!(
            "non-finite floating-point constant {x}"
        )));
    }
    let s = format!("{:?}", x.abs());
    let s = match s.split_once('e') {
        Some((m, e)) if m.contains('.') => format!("{m}e{e}"),
        Some((m, e)) => format!("{m}.0e{e}"),
        None if s.contains('.') => s,
        None => format!("{s}.0"),
    };
    Ok(BExpr::Real(if x < 0.0 { format!("-{s}") } else { s }))
}

pub(crate) fn convert(b: BExpr, from: Sort, to: Sort) -> Result<BExpr> {
    Ok(match (from, to) {
        _ if from == to => b,
        (Sort::Bool, Sort::Int) => match b {
            BExpr::Bool(v) => BExpr::Int(v as i128),
            b => BExpr::ite(b, BExpr::Int(1), BExpr::Int(0)),
        },
        (Sort::Int, Sort::Bool) => match b {
            BExpr::Int(n) => BExpr::Bool(n != 0),
            b => BExpr::bin(B::Ne, b, BExpr::Int(0)),
        },
        (Sort::Int, Sort::Real) => match b {
            BExpr::Int(n) => real_literal(n as f64)?,
            b => BExpr::app("real", vec![b]),
        },
        (Sort::Real, Sort::Int) => BExpr::app("int", vec![b]),
        (Sort::Bool, Sort::Real) => convert(convert(b, Sort::Bool, Sort::Int)?, Sort::Int, Sort::Real)?,
        (Sort::Real, Sort::Bool) => BExpr::bin(B::Ne, b, BExpr::Real("0.0".into())),
        _ => {
            return Err(EncodeError::TypeConflict(format!(
                "cannot use a {from:?} value as {to:?}"
            )))
        }
    })
}

/// Variables visible while translating one expression.
pub(crate) struct Scope {
    pub vars: Vec<LocalVar>,
    pub bind: HashMap<LocalId, BExpr>,
    pub heap: BExpr,
    pub old_ok: bool,
    /// Names a fresh bound variable must avoid.
    pub taken: BTreeSet<String>,
}

pub(crate) fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    let mut k = 1;
    while taken.contains(&name) {
        name = format!("{base}${k}");
        k += 1;
    }
    name
}

/// Boogie names for `ids`, avoiding `taken` and each other.
pub(crate) fn assign_names(
    vars: &[LocalVar],
    ids: impl IntoIterator<Item = LocalId>,
    taken: &mut BTreeSet<String>,
) -> HashMap<LocalId, String> {
    let mut out = HashMap::new();
    for id in ids {
        let base = if vars[id].role == Role::Receiver {
            RECEIVER.to_string()
        } else {
            sanitize(&vars[id].name)
        };
        let name = fresh(&base, taken);
        taken.insert(name.clone());
        out.insert(id, name);
    }
    out
}

pub(crate) struct Translator<'c, 'a> {
    pub ctx: &'c Context<'a>,
    pub uses: &'c mut Uses,
    pub inlining: Vec<MethodRef>,
}

impl Translator<'_, '_> {
    pub fn expr_as(&mut self, sc: &mut Scope, e: &Expr, want: Sort) -> Result<BExpr> {
        let (b, s) = self.expr(sc, e)?;
        convert(b, s, want)
    }


    pub fn expr(&mut self, sc: &mut Scope, e: &Expr) -> Result<(BExpr, Sort)> {
        Ok(match &e.kind {
            ExprKind::Local(id) => {
                let b = sc.bind.get(id).cloned().ok_or_else(|| {
                    EncodeError::Unsupported(format!("unbound local `{}`", sc.vars[*id].name))
                })?;
                (b, sort_of(&sc.vars[*id].ty))
            }
            ExprKind::Lit(l) => self.literal(l, &e.ty)?,
            ExprKind::Field(o, f) => {
                let o = self.expr_as(sc, o, Sort::Ref)?;
                let f_name = self.uses.field(f);
                let args = vec![sc.heap.clone(), o, BExpr::Id(f_name)];
                (BExpr::app("read", args), sort_of(&Type::from_field(&f.descriptor)))
            }
            ExprKind::Static(f) => {
                let c = self.uses.class(&f.owner);
                let f_name = self.uses.field(f);
                let args = vec![
                    sc.heap.clone(),
                    BExpr::app("type2ref", vec![BExpr::Id(c)]),
                    BExpr::Id(f_name),
                ];
                (BExpr::app("read", args), sort_of(&Type::from_field(&f.descriptor)))
            }
            ExprKind::ArrayRead(a, k) => {
                let a = self.expr_as(sc, a, Sort::Ref)?;
                let k = self.expr_as(sc, k, Sort::Int)?;
                let read = BExpr::app("array.read", vec![sc.heap.clone(), a, k]);
                (
                    BExpr::Coerce(Box::new(read), translate_type(&e.ty)),
                    sort_of(&e.ty),
                )
            }
            ExprKind::ArrayLength(a) => {
                let a = self.expr_as(sc, a, Sort::Ref)?;
                (BExpr::app("lengthof", vec![a]), Sort::Int)
            }
            ExprKind::Neg(x) => {
                let s = sort_of(x.ex());
                let v = self.expr_as(sc, x, s)?;
                match (s, v) {
                    (Sort::Bool, v) => (BExpr::not(v), Sort::Bool),
                    (_, BExpr::Int(n)) => (BExpr::Int(-n), s),
                    (_, v) => (BExpr::Unary(UnOp::Neg, Box::new(v)), s),
                }
            }
            ExprKind::Binary(op, a, b) => self.binary(sc, *op, a, b)?,
            ExprKind::Call(c) => self.call(sc, c)?,
            ExprKind::Cast(x) => {
                let s = sort_of(x.ex());
                let v = self.expr_as(sc, x, s)?;
                let t = sort_of(&e.ty);
                (convert(v, s, t)?, t)
            }
            ExprKind::InstanceOf(x, t) => {
                let Type::Ref(c) = t else {
                    return Err(EncodeError::Unsupported(format!("instanceof {t}")));
                };
                let v = self.expr_as(sc, x, Sort::Ref)?;
                let c = self.uses.class(c);
                (BExpr::app("instanceof", vec![v, BExpr::Id(c)]), Sort::Bool)
            }
            ExprKind::New(_) | ExprKind::NewArray(..) => {
                return Err(EncodeError::Unsupported(
                    "allocation inside a specification expression".into(),
                ))
            }
            ExprKind::Intrinsic(i) => self.intrinsic(sc, i)?,
        })
    }

    fn literal(&mut self, l: &Literal, ty: &Type) -> Result<(BExpr, Sort)> {
        let s = sort_of(ty);
        Ok(match l {
            Literal::Int(n) => match s {
                Sort::Bool => (BExpr::Bool(*n != 0), s),
                Sort::Real => (real_literal(*n as f64)?, s),
                _ => (BExpr::Int(*n as i128), Sort::Int),
            },
            Literal::Float(x) => (real_literal(*x)?, Sort::Real),
            Literal::Null => (BExpr::id("null"), Sort::Ref),
            Literal::String(text) => {
                let n = self.uses.string(text);
                (BExpr::app("string.const", vec![BExpr::Int(n as i128)]), Sort::Ref)
            }
            Literal::Class(c) => {
                let c = self.uses.class(c);
                (BExpr::app("type2ref", vec![BExpr::Id(c)]), Sort::Ref)
            }
        })
    }

    fn binary(&mut self, sc: &mut Scope, op: BinOp, a: &Expr, b: &Expr) -> Result<(BExpr, Sort)> {
        let (sa, sb) = (sort_of(a.ex()), sort_of(b.ex()));
        let rel = |op: BinOp| match op {
            BinOp::Lt => Some(B::Lt),
            BinOp::Le => Some(B::Le),
            BinOp::Gt => Some(B::Gt),
            BinOp::Ge => Some(B::Ge),
            BinOp::Eq => Some(B::Eq),
            BinOp::Ne => Some(B::Ne),
            _ => None,
        };
        if let (Some(r), ExprKind::Binary(BinOp::Cmp | BinOp::Cmpl | BinOp::Cmpg, x, y)) = (rel(op), &a.kind) {
            if b.as_int() == Some(0) {
                let s = join(sort_of(x.ex()), sort_of(y.ex()));
                let x = self.expr_as(sc, x, s)?;
                let y = self.expr_as(sc, y, s)?;
                return Ok((BExpr::bin(r, x, y), Sort::Bool));
            }
        }
        let both = |t: &mut Self, sc: &mut Scope, s: Sort| -> Result<(BExpr, BExpr)> {
            Ok((t.expr_as(sc, a, s)?, t.expr_as(sc, b, s)?))
        };
        Ok(match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                let s = join(sa, sb);
                let (x, y) = both(self, sc, s)?;
                let e = match (op, s) {
                    (BinOp::Add, _) => BExpr::bin(B::Add, x, y),
                    (BinOp::Sub, _) => BExpr::bin(B::Sub, x, y),
                    (BinOp::Mul, _) => BExpr::bin(B::Mul, x, y),
                    (BinOp::Div, Sort::Real) => BExpr::bin(B::Div, x, y),
                    (BinOp::Div, _) => BExpr::bin(B::IntDiv, x, y),
                    (_, Sort::Real) => BExpr::app("real.rem", vec![x, y]),
                    _ => BExpr::bin(B::Mod, x, y),
                };
                (e, s)
            }
            BinOp::Shl | BinOp::Shr | BinOp::Ushr => {
                let (x, y) = both(self, sc, Sort::Int)?;
                let f = match op {
                    BinOp::Shl => "int.shl",
                    BinOp::Shr => "int.shr",
                    _ => "int.ushr",
                };
                (BExpr::app(f, vec![x, y]), Sort::Int)
            }
            BinOp::And | BinOp::Or | BinOp::Xor => {
                if sa == Sort::Bool && sb == Sort::Bool {
                    let (x, y) = both(self, sc, Sort::Bool)?;
                    let o = match op {
                        BinOp::And => B::And,
                        BinOp::Or => B::Or,
                        _ => B::Ne,
                    };
                    (BExpr::bin(o, x, y), Sort::Bool)
                } else {
                    let (x, y) = both(self, sc, Sort::Int)?;
                    let f = match op {
                        BinOp::And => "int.and",
                        BinOp::Or => "int.or",
                        _ => "int.xor",
                    };
                    (BExpr::app(f, vec![x, y]), Sort::Int)
                }
            }
            BinOp::Eq | BinOp::Ne => {
                let eq = op == BinOp::Eq;
                if sa == Sort::Bool && sb == Sort::Bool {
                    let (x, y) = both(self, sc, Sort::Bool)?;
                    (BExpr::bin(if eq { B::Iff } else { B::Ne }, x, y), Sort::Bool)
                } else {
                    let s = if sa == Sort::Ref || sb == Sort::Ref {
                        Sort::Ref
                    } else {
                        join(sa, sb)
                    };
                    let (x, y) = both(self, sc, s)?;
                    (BExpr::bin(if eq { B::Eq } else { B::Ne }, x, y), Sort::Bool)
                }
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let (x, y) = both(self, sc, join(sa, sb))?;
                (BExpr::bin(rel(op).expect("relational"), x, y), Sort::Bool)
            }
            BinOp::Cmp | BinOp::Cmpl | BinOp::Cmpg => {
                let (x, y) = both(self, sc, join(sa, sb))?;
                (BExpr::app("cmp", vec![x, y]), Sort::Int)
            }
        })
    }

    /// Receiver and arguments at the callee's formal sorts.
    pub fn call_args(&mut self, sc: &mut Scope, c: &Call, m: &MethodRef) -> Result<Vec<BExpr>> {
        let mut out = Vec::new();
        if let Some(r) = &c.receiver {
            out.push(self.expr_as(sc, r, Sort::Ref)?);
        }
        for (a, t) in c.args.iter().zip(&m.descriptor.params) {
            out.push(self.expr_as(sc, a, sort_of(&Type::from_field(t)))?);
        }
        Ok(out)
    }

    fn call(&mut self, sc: &mut Scope, c: &Call) -> Result<(BExpr, Sort)> {
        let m = (self.ctx.resolve)(&c.method);
        let ret = m
            .descriptor
            .ret
            .as_ref()
            .map(|t| sort_of(&Type::from_field(t)));
        match self.ctx.callee_kind(&c.method) {
            CalleeKind::Predicate => {
                let args = self.call_args(sc, c, &m)?;
                Ok((self.inline_predicate(sc, &m, args)?, Sort::Bool))
            }
            CalleeKind::Pure => {
                let mut args = vec![sc.heap.clone()];
                args.extend(self.call_args(sc, c, &m)?);
                let ret = ret.ok_or_else(|| {
                    EncodeError::Unsupported(format!("pure method `{m}` returns void"))
                })?;
                Ok((BExpr::App(method_name(&m), args), ret))
            }
            _ => Err(EncodeError::Unsupported(format!(
                "call to `{m}` inside a specification expression"
            ))),
        }
    }

    pub fn inline_predicate(&mut self, sc: &Scope, m: &MethodRef, args: Vec<BExpr>) -> Result<BExpr> {
        if self.inlining.contains(m) {
            return Err(SpecError::RecursivePredicate {
                name: m.name.clone(),
            }
            .into());
        }
        let agg = self
            .ctx
            .aggregates
            .get(m)
            .ok_or_else(|| EncodeError::Unsupported(format!("predicate `{m}` has no aggregate")))?;
        let mut inner = Scope {
            vars: agg.locals.clone(),
            bind: agg.params.iter().copied().zip(args).collect(),
            heap: sc.heap.clone(),
            old_ok: sc.old_ok,
            taken: sc.taken.clone(),
        };
        self.inlining.push(m.clone());
        let r = self.expr_as(&mut inner, &agg.expr, Sort::Bool);
        self.inlining.pop();
        r
    }

    fn intrinsic(&mut self, sc: &mut Scope, i: &Intrinsic) -> Result<(BExpr, Sort)> {
        let formal = |k: usize| sort_of(&Type::from_field(&i.descriptor.params[k]));
        let rel = match i.kind {
            IntrinsicKind::Eq => Some(B::Eq),
            IntrinsicKind::Neq => Some(B::Ne),
            IntrinsicKind::Lt => Some(B::Lt),
            IntrinsicKind::Lte => Some(B::Le),
            IntrinsicKind::Gt => Some(B::Gt),
            IntrinsicKind::Gte => Some(B::Ge),
            _ => None,
        };
        if let Some(op) = rel {
            let x = self.expr_as(sc, &i.args[0], formal(0))?;
            let y = self.expr_as(sc, &i.args[1], formal(1))?;
            return Ok((BExpr::bin(op, x, y), Sort::Bool));
        }
        Ok(match &i.kind {
            IntrinsicKind::Not => (BExpr::not(self.expr_as(sc, &i.args[0], Sort::Bool)?), Sort::Bool),
            IntrinsicKind::Implies => {
                let x = self.expr_as(sc, &i.args[0], Sort::Bool)?;
                let y = self.expr_as(sc, &i.args[1], Sort::Bool)?;
                (BExpr::bin(B::Implies, x, y), Sort::Bool)
            }
            IntrinsicKind::Conditional => {
                let s = formal(1);
                let c = self.expr_as(sc, &i.args[0], Sort::Bool)?;
                let t = self.expr_as(sc, &i.args[1], s)?;
                let f = self.expr_as(sc, &i.args[2], s)?;
                (BExpr::ite(c, t, f), s)
            }
            IntrinsicKind::Forall | IntrinsicKind::Exists => {
                let b = i.args[0]
                    .as_local()
                    .filter(|b| sc.vars[*b].role == Role::Bound)
                    .ok_or(SpecError::BadQuantifier)?;
                let base = sc.vars[b].name.split('$').next().filter(|s| !s.is_empty());
                let base = sanitize(base.unwrap_or(&sc.vars[b].name));
                let name = fresh(&base, &sc.taken);
                sc.taken.insert(name.clone());
                let prev = sc.bind.insert(b, BExpr::Id(name.clone()));
                let body = self.expr_as(sc, &i.args[1], Sort::Bool);
                match prev {
                    Some(p) => sc.bind.insert(b, p),
                    None => sc.bind.remove(&b),
                };
                sc.taken.remove(&name);
                let kind = if i.kind == IntrinsicKind::Forall {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                (
                    BExpr::Quant {
                        kind,
                        tparams: Vec::new(),
                        vars: vec![(name, translate_type(&sc.vars[b].ty))],
                        body: Box::new(body?),
                    },
                    Sort::Bool,
                )
            }
            IntrinsicKind::Old => {
                if !sc.old_ok {
                    return Err(SpecError::OldOutsideEnsures.into());
                }
                let (v, s) = self.expr(sc, &i.args[0])?;
                (BExpr::Old(Box::new(v)), s)
            }
            IntrinsicKind::Binding(_) => return Err(SpecError::BadQuantifier.into()),
            k => {
                return Err(EncodeError::Unsupported(format!(
                    "`{}` used as a value",
                    k.name()
                )))
            }
        })
    }
}

/// Translate an aggregated `@Pure` method to a function with a leading
/// heap parameter.
pub fn translate_function(ctx: &Context, uses: &mut Uses, agg: &Aggregate) -> Result<Function> {
    let m = &agg.method;
    let ret = m.descriptor.ret.as_ref().ok_or_else(|| {
        EncodeError::Unsupported(format!("pure method `{m}` returns void"))
    })?;
    let ret = Type::from_field(ret);
    let mut taken: BTreeSet<String> = ctx.reserved.clone();
    taken.insert(HEAP_PARAM.to_string());
    let names = assign_names(&agg.locals, agg.params.iter().copied(), &mut taken);
    let mut params = vec![Param::new(HEAP_PARAM, BType::named("Heap"))];
    for p in &agg.params {
        params.push(Param::new(&names[p], translate_type(&agg.locals[*p].ty)));
    }
    let mut sc = Scope {
        vars: agg.locals.clone(),
        bind: names.iter().map(|(id, n)| (*id, BExpr::id(n))).collect(),
        heap: BExpr::id(HEAP_PARAM),
        old_ok: false,
        taken,
    };
    let mut t = Translator {
        ctx,
        uses,
        inlining: Vec::new(),
    };
    let body = t.expr_as(&mut sc, &agg.expr, sort_of(&ret))?;
    Ok(Function {
        name: method_name(m),
        tparams: Vec::new(),
        params,
        ret: translate_type(&ret),
        body: Some(body),
    })
}
