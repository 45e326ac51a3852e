// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Loop invariant injection as assert/assume statements in the IR.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::*;
use crate::lift::{build_cfg, detect_loops, Cfg, LiftError, LoopInfo};
use crate::spec::Invariants;

// Ordering of insertions that share a statement index.
const BACK_FALL: u8 = 0;
const PAD: u8 = 1;
const HEAD: u8 = 2;
const ASSUME: u8 = 3;
const BACK: u8 = 4;

fn check(k: CheckKind, j: &Expr) -> Stmt {
    Stmt::new(StmtKind::Check(k, j.clone()), None)
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt::new(kind, None)
}

fn retarget(s: &mut Stmt, to: Label) {
    if let StmtKind::If(_, l) | StmtKind::Goto(l) = &mut s.kind {
        *l = to;
    }
}

/// Statements between a head label and its exit test that cannot falsify `j`.
fn preserves(s: &Stmt, j: &Expr) -> bool {
    match &s.kind {
        StmtKind::Assign(LValue::Local(v), e) => {
            !j.reads_local(*v)
                && !e.any(&|x| matches!(x.kind, ExprKind::Call(_) | ExprKind::New(_) | ExprKind::NewArray(..)))
        }
        StmtKind::Check(..) => true,
        _ => false,
    }
}

fn conjoin(js: &[Expr]) -> Option<Expr> {
    let mut it = js.iter().cloned();
    let first = it.next()?;
    Some(it.fold(first, |a, b| Expr::binary(BinOp::And, a, b, Type::Bool)))
}

fn inject_one(body: &mut Body, cfg: &Cfg, lp: &LoopInfo, j: &Expr) {
    let n = body.stmts.len();
    let head = &cfg.blocks[lp.head];
    let h = head.start;
    let hl = lp.head_label;
    let in_loop = |i: usize| lp.contains_stmt(cfg, i);
    let block_of_label = |l: Label| body.label_index(l).and_then(|i| cfg.block_of_stmt(i));
    let mut ins: Vec<(usize, u8, Vec<Stmt>)> = Vec::new();
    let mut moves: Vec<(usize, Label)> = Vec::new();
    let assert = || check(CheckKind::Assert, j);
    let assume = || check(CheckKind::Assume, j);

    // Blocks whose exits happen where the invariant is known to hold.
    let mut sound = BTreeSet::new();
    for &b in &lp.backjumps {
        let blk = &cfg.blocks[b];
        let last = blk.end - 1;
        match body.stmts[last].kind {
            StmtKind::Goto(_) => ins.push((last, BACK, vec![assert()])),
            StmtKind::If(..) => {
                ins.push((last, BACK, vec![assert()]));
                sound.insert(b);
            }
            _ => ins.push((blk.end, BACK_FALL, vec![assert(), stmt(StmtKind::Goto(hl))])),
        }
    }
    if body.stmts[h + 1..head.end - 1].iter().all(|s| preserves(s, j)) {
        sound.insert(lp.head);
    }

    let after_test = head.end - head.start == 2
        && head.end < n
        && !matches!(body.stmts[head.end].kind, StmtKind::Label(_))
        && matches!(body.stmts[h + 1].kind,
            StmtKind::If(_, t) if block_of_label(t).is_some_and(|b| !lp.blocks.contains(&b)));
    let outside: Vec<usize> = (0..n)
        .filter(|&i| body.stmts[i].target() == Some(hl) && !in_loop(i))
        .collect();
    let mut entry = Vec::new();
    if !outside.is_empty() {
        let pre = body.new_label();
        entry.push(stmt(StmtKind::Label(pre)));
        moves.extend(outside.into_iter().map(|i| (i, pre)));
    }
    entry.push(assert());
    ins.push((h, HEAD, entry));

    ins.push((if after_test { head.end } else { h + 1 }, ASSUME, vec![assume()]));

    let mut exits: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(src, dst) in &lp.exits {
        if sound.contains(&src) {
            exits.entry(dst).or_default().insert(src);
        }
    }
    for (x, srcs) in exits {
        let xs = cfg.blocks[x].start;
        if cfg.blocks[x].preds.iter().all(|p| srcs.contains(p)) {
            let at = if matches!(body.stmts[xs].kind, StmtKind::Label(_)) {
                xs + 1
            } else {
                xs
            };
            ins.push((at, ASSUME, vec![assume()]));
            continue;
        }
        let StmtKind::Label(xl) = body.stmts[xs].kind else {
            continue;
        };
        let pad = body.new_label();
        let mut stmts = Vec::new();
        if xs > 0
            && body.stmts[xs - 1].falls_through()
            && !cfg.block_of_stmt(xs - 1).is_some_and(|b| srcs.contains(&b))
        {
            stmts.push(stmt(StmtKind::Goto(xl)));
        }
        stmts.push(stmt(StmtKind::Label(pad)));
        stmts.push(assume());
        ins.push((xs, PAD, stmts));
        for &s in &srcs {
            let last = cfg.blocks[s].end - 1;
            if body.stmts[last].target() == Some(xl) {
                moves.push((last, pad));
            }
        }
    }

    for (i, to) in moves {
        retarget(&mut body.stmts[i], to);
    }
    ins.sort_by_key(|(i, k, _)| (*i, *k));
    let old = std::mem::take(&mut body.stmts);
    let mut ins = ins.into_iter().peekable();
    for (i, s) in old.into_iter().enumerate() {
        while let Some((_, _, add)) = ins.next_if(|(at, _, _)| *at == i) {
            body.stmts.extend(add);
        }
        body.stmts.push(s);
    }
    for (_, _, add) in ins {
        body.stmts.extend(add);
    }
}

/// Insert invariant checks around every loop that has invariants: an assert
/// on entry to the head, an assume when the body is entered, an assert on
/// each backjump and an assume at each exit taken where the invariant holds.
/// Loops are processed innermost first, each against a fresh control flow
/// graph.
pub fn inject_invariants(body: &mut Body, invariants: &Invariants) -> Result<(), LiftError> {
    let cfg = build_cfg(body);
    let order: Vec<Label> = detect_loops(body, &cfg)?
        .iter()
        .map(|l| l.head_label)
        .filter(|l| invariants.get(l).is_some_and(|js| !js.is_empty()))
        .collect();
    for head in order {
        let Some(j) = conjoin(&invariants[&head]) else {
            continue;
        };
        let cfg = build_cfg(body);
        let loops = detect_loops(body, &cfg)?;
        if let Some(lp) = loops.iter().find(|l| l.head_label == head) {
            inject_one(body, &cfg, lp, &j);
        }
    }
    Ok(())
}
