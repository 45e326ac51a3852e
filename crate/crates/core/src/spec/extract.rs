// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Extraction of loop invariants and inline assertions/assumptions from
//! method bodies.

use std::collections::{BTreeMap, BTreeSet};

use super::aggregate::{binding_type, check_binders, impurity};
use super::SpecError;
use crate::classfile::MethodRef;
use crate::ir::*;
use crate::lift::{Cfg, LoopInfo};

/// Invariant expressions keyed by the label of the loop head.
pub type Invariants = BTreeMap<Label, Vec<Expr>>;

fn intrinsic_arg(s: &Stmt, kinds: &[IntrinsicKind]) -> Option<(IntrinsicKind, Expr)> {
    let StmtKind::Invoke(e) = &s.kind else {
        return None;
    };
    let i = e.as_intrinsic()?;
    kinds
        .contains(&i.kind)
        .then(|| (i.kind.clone(), i.args[0].clone()))
}

struct Inlined {
    expr: Expr,
    /// Definitions that may be removed once the check is gone.
    defs: BTreeSet<usize>,
}

/// Inline into `arg` the pure definitions of its locals that reach statement
/// `at` from earlier in the same block.
fn inline_chain(
    body: &mut Body,
    block_start: usize,
    at: usize,
    arg: Expr,
    is_pure: &dyn Fn(&MethodRef) -> bool,
) -> Inlined {
    let mut expr = arg;
    let mut defs = BTreeSet::new();
    let mut done = BTreeSet::new();
    loop {
        let mut changed = false;
        for v in expr.locals() {
            if !done.insert(v) || body.locals[v].role != Role::Local && body.locals[v].role != Role::Temp {
                continue;
            }
            let Some(d) = (block_start..at).rev().find(|j| body.stmts[*j].defines() == Some(v)) else {
                continue;
            };
            let StmtKind::Assign(_, rhs) = &body.stmts[d].kind else {
                continue;
            };
            if binding_type(rhs).is_some() {
                body.locals[v].role = Role::Bound;
                defs.insert(d);
                continue;
            }
            if impurity(rhs, is_pure).is_some() {
                continue;
            }
            let stable = rhs
                .locals()
                .iter()
                .all(|u| !(d + 1..at).any(|j| body.stmts[j].defines() == Some(*u)));
            if !stable {
                continue;
            }
            let rhs = rhs.clone();
            expr.replace_locals(&|id| (id == v).then(|| rhs.clone()));
            defs.insert(d);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Inlined { expr, defs }
}

/// Keep only the definitions whose local is not read outside the chain.
fn removable(body: &Body, at: usize, defs: &BTreeSet<usize>) -> BTreeSet<usize> {
    defs.iter()
        .copied()
        .filter(|d| {
            let v = body.stmts[*d].defines().expect("definition");
            body.uses_of(v).iter().all(|u| *u == at || defs.contains(u))
        })
        .collect()
}

fn remove_stmts(body: &mut Body, remove: &BTreeSet<usize>) {
    let mut i = 0;
    body.stmts.retain(|_| {
        let keep = !remove.contains(&i);
        i += 1;
        keep
    });
}

/// Move every `invariant(...)` call into the innermost loop containing it.
/// `loops` must be ordered innermost first.
pub fn extract_loop_invariants(
    body: &mut Body,
    cfg: &Cfg,
    loops: &[LoopInfo],
    is_pure: &dyn Fn(&MethodRef) -> bool,
) -> Result<Invariants, SpecError> {
    let mut out = Invariants::new();
    let mut remove = BTreeSet::new();
    for i in 0..body.stmts.len() {
        let Some((_, arg)) = intrinsic_arg(&body.stmts[i], &[IntrinsicKind::Invariant]) else {
            continue;
        };
        let offset = body.stmts[i].offset;
        let block = cfg.block_of_stmt(i).expect("statement in a block");
        let lp = loops
            .iter()
            .find(|l| l.blocks.contains(&block))
            .ok_or(SpecError::InvariantOutsideLoop { offset })?;
        let inl = inline_chain(body, cfg.blocks[block].start, i, arg, is_pure);
        if let Some(k) = impurity(&inl.expr, is_pure) {
            return Err(SpecError::InvariantNotAggregable {
                offset,
                reason: k.code().to_string(),
            });
        }
        check_binders(&inl.expr, &body.locals).map_err(|e| SpecError::InvariantNotAggregable {
            offset,
            reason: e.to_string(),
        })?;
        remove.extend(removable(body, i, &inl.defs));
        remove.insert(i);
        out.entry(lp.head_label).or_default().push(inl.expr);
    }
    remove_stmts(body, &remove);
    Ok(out)
}

/// Replace each `assertion(...)`/`assumption(...)` call by a check
/// statement. Returns the resulting checks in statement order.
pub fn extract_inline_checks(
    body: &mut Body,
    cfg: &Cfg,
    is_pure: &dyn Fn(&MethodRef) -> bool,
) -> Result<Vec<(Option<u32>, CheckKind, Expr)>, SpecError> {
    let mut out = Vec::new();
    let mut remove = BTreeSet::new();
    for i in 0..body.stmts.len() {
        let kinds = [IntrinsicKind::Assertion, IntrinsicKind::Assumption];
        let Some((kind, arg)) = intrinsic_arg(&body.stmts[i], &kinds) else {
            continue;
        };
        let offset = body.stmts[i].offset;
        let block = cfg.block_of_stmt(i).expect("statement in a block");
        let inl = inline_chain(body, cfg.blocks[block].start, i, arg, is_pure);
        if let Some(k) = impurity(&inl.expr, is_pure) {
            return Err(SpecError::CheckNotAggregable {
                offset,
                reason: k.code().to_string(),
            });
        }
        check_binders(&inl.expr, &body.locals).map_err(|e| SpecError::CheckNotAggregable {
            offset,
            reason: e.to_string(),
        })?;
        remove.extend(removable(body, i, &inl.defs));
        let ck = if kind == IntrinsicKind::Assertion {
            CheckKind::Assert
        } else {
            CheckKind::Assume
        };
        body.stmts[i].kind = StmtKind::Check(ck, inl.expr.clone());
        out.push((offset, ck, inl.expr));
    }
    remove_stmts(body, &remove);
    Ok(out)
}
