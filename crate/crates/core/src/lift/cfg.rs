// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Control flow graph over IR statements, dominators and natural loops.

use std::collections::{BTreeSet, HashMap};

use super::LiftError;
use crate::ir::{Body, Label, StmtKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Statement index range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub succs: Vec<usize>,
    pub preds: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub blocks: Vec<Block>,
    /// Immediate dominator per block; `None` for the entry and for
    /// unreachable blocks.
    pub idom: Vec<Option<usize>>,
    pub reachable: Vec<bool>,
}

impl Cfg {
    pub fn block_of_stmt(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.start <= i && i < b.end)
    }

    pub fn dominates(&self, a: usize, mut b: usize) -> bool {
        if !self.reachable[b] {
            return false;
        }
        loop {
            if a == b {
                return true;
            }
            match self.idom[b] {
                Some(d) => b = d,
                None => return false,
            }
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.succs.iter().map(move |&s| (i, s)))
            .collect()
    }
}

/// A natural loop. Loops sharing a head are merged into one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopInfo {
    pub head: usize,
    pub head_label: Label,
    /// Blocks whose jump to the head closes an iteration.
    pub backjumps: Vec<usize>,
    /// Edges `(inside, outside)` leaving the loop.
    pub exits: Vec<(usize, usize)>,
    pub blocks: BTreeSet<usize>,
}

impl LoopInfo {
    pub fn contains_stmt(&self, cfg: &Cfg, i: usize) -> bool {
        cfg.block_of_stmt(i)
            .is_some_and(|b| self.blocks.contains(&b))
    }

    pub fn exit_blocks(&self) -> BTreeSet<usize> {
        self.exits.iter().map(|&(_, t)| t).collect()
    }
}

pub fn build_cfg(body: &Body) -> Cfg {
    let stmts = &body.stmts;
    let mut starts = BTreeSet::new();
    if !stmts.is_empty() {
        starts.insert(0);
    }
    for (i, s) in stmts.iter().enumerate() {
        match s.kind {
            StmtKind::Label(_) => {
                starts.insert(i);
            }
            StmtKind::If(..) | StmtKind::Goto(_) | StmtKind::Return(_) if i + 1 < stmts.len() => {
                starts.insert(i + 1);
            }
            _ => {}
        }
    }
    let starts: Vec<usize> = starts.into_iter().collect();
    let mut labels: HashMap<Label, usize> = HashMap::new();
    let mut blocks: Vec<Block> = starts
        .iter()
        .enumerate()
        .map(|(b, &s)| Block {
            start: s,
            end: starts.get(b + 1).copied().unwrap_or(stmts.len()),
            succs: Vec::new(),
            preds: Vec::new(),
        })
        .collect();
    for (b, blk) in blocks.iter().enumerate() {
        for s in &stmts[blk.start..blk.end] {
            if let StmtKind::Label(l) = s.kind {
                labels.insert(l, b);
            }
        }
    }
    for b in 0..blocks.len() {
        let blk = &blocks[b];
        let mut succs = Vec::new();
        let last = blk.end.checked_sub(1).map(|i| &stmts[i].kind);
        match last {
            Some(StmtKind::Goto(l)) => succs.extend(labels.get(l)),
            Some(StmtKind::Return(_)) => {}
            Some(StmtKind::If(_, l)) => {
                succs.extend(labels.get(l));
                if b + 1 < blocks.len() {
                    succs.push(b + 1);
                }
            }
            _ => {
                if b + 1 < blocks.len() {
                    succs.push(b + 1);
                }
            }
        }
        succs.dedup();
        blocks[b].succs = succs;
    }
    for b in 0..blocks.len() {
        for s in blocks[b].succs.clone() {
            if !blocks[s].preds.contains(&b) {
                blocks[s].preds.push(b);
            }
        }
    }
    let (idom, reachable) = dominators(&blocks);
    Cfg {
        blocks,
        idom,
        reachable,
    }
}

fn postorder(blocks: &[Block]) -> Vec<usize> {
    let mut order = Vec::new();
    if blocks.is_empty() {
        return order;
    }
    let mut seen = vec![false; blocks.len()];
    let mut stack = vec![(0usize, 0usize)];
    seen[0] = true;
    while let Some((b, i)) = stack.last_mut() {
        let b = *b;
        if let Some(&s) = blocks[b].succs.get(*i) {
            *i += 1;
            if !seen[s] {
                seen[s] = true;
                stack.push((s, 0));
            }
        } else {
            order.push(b);
            stack.pop();
        }
    }
    order
}

/// Iterative dominator computation over reverse postorder.
fn dominators(blocks: &[Block]) -> (Vec<Option<usize>>, Vec<bool>) {
    let n = blocks.len();
    let post = postorder(blocks);
    let mut rank = vec![usize::MAX; n];
    for (i, &b) in post.iter().enumerate() {
        rank[b] = i;
    }
    let reachable: Vec<bool> = rank.iter().map(|&r| r != usize::MAX).collect();
    let mut doms: Vec<Option<usize>> = vec![None; n];
    if n == 0 {
        return (doms, reachable);
    }
    doms[0] = Some(0);
    let intersect = |doms: &[Option<usize>], mut a: usize, mut b: usize| {
        while a != b {
            while rank[a] < rank[b] {
                a = doms[a].expect("processed");
            }
            while rank[b] < rank[a] {
                b = doms[b].expect("processed");
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &b in post.iter().rev() {
            if b == 0 {
                continue;
            }
            let mut new = None;
            for &p in &blocks[b].preds {
                if doms[p].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => p,
                    Some(q) => intersect(&doms, p, q),
                });
            }
            if new.is_some() && doms[b] != new {
                doms[b] = new;
                changed = true;
            }
        }
    }
    doms[0] = None;
    (doms, reachable)
}

/// Find natural loops, innermost first. A retreating edge whose target does
/// not dominate its source makes the graph irreducible.
pub fn detect_loops(body: &Body, cfg: &Cfg) -> Result<Vec<LoopInfo>, LiftError> {
    let n = cfg.blocks.len();
    // Retreating edges: targets on the DFS stack.
    let mut on_stack = vec![false; n];
    let mut seen = vec![false; n];
    let mut retreating = Vec::new();
    if n > 0 {
        let mut stack = vec![(0usize, 0usize)];
        seen[0] = true;
        on_stack[0] = true;
        while let Some((b, i)) = stack.last_mut() {
            let b = *b;
            if let Some(&s) = cfg.blocks[b].succs.get(*i) {
                *i += 1;
                if on_stack[s] {
                    retreating.push((b, s));
                } else if !seen[s] {
                    seen[s] = true;
                    on_stack[s] = true;
                    stack.push((s, 0));
                }
            } else {
                on_stack[b] = false;
                stack.pop();
            }
        }
    }
    let mut by_head: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (u, h) in retreating {
        if !cfg.dominates(h, u) {
            let label = match body.stmts[cfg.blocks[h].start].kind {
                StmtKind::Label(l) => l,
                _ => 0,
            };
            return Err(LiftError::Irreducible { label });
        }
        by_head.entry(h).or_default().push(u);
    }
    let mut loops = Vec::new();
    for (h, mut backs) in by_head {
        backs.sort();
        backs.dedup();
        let mut members = BTreeSet::from([h]);
        let mut work: Vec<usize> = backs.clone();
        while let Some(b) = work.pop() {
            if members.insert(b) {
                work.extend(cfg.blocks[b].preds.iter().copied().filter(|p| cfg.reachable[*p]));
            }
        }
        let mut exits = Vec::new();
        for &b in &members {
            for &s in &cfg.blocks[b].succs {
                if !members.contains(&s) {
                    exits.push((b, s));
                }
            }
        }
        let head_label = match body.stmts[cfg.blocks[h].start].kind {
            StmtKind::Label(l) => l,
            _ => unreachable!("a loop head is a jump target"),
        };
        loops.push(LoopInfo {
            head: h,
            head_label,
            backjumps: backs,
            exits,
            blocks: members,
        });
    }
    loops.sort_by_key(|l| (l.blocks.len(), l.head));
    Ok(loops)
}
