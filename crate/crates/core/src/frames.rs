// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Frame inference: a procedure either leaves the heap untouched or may
//! modify all of it.

use std::collections::BTreeMap;
use std::fmt;

use crate::boogie::{heap_effects, BStmt, Procedure, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Frame {
    Empty,
    WholeHeap,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Empty => "EMPTY",
            Frame::WholeHeap => "WHOLE_HEAP",
        })
    }
}

/// Why a procedure's frame is the whole heap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// The procedure has no body.
    Bodiless,
    /// Index into the procedure's heap effects (see `boogie::heap_effects`).
    Write(usize),
    /// A call to a procedure whose frame is the whole heap, or that is not
    /// declared at all.
    Callee(usize, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameInfo {
    pub frame: Frame,
    pub provenance: Option<Provenance>,
}

impl FrameInfo {
    pub fn is_empty(&self) -> bool {
        self.frame == Frame::Empty
    }
}

fn classify(p: &Procedure, known: &BTreeMap<String, FrameInfo>) -> Option<Provenance> {
    let Some(body) = &p.body else {
        return Some(Provenance::Bodiless);
    };
    for (i, s) in heap_effects(body).into_iter().enumerate() {
        match s {
            BStmt::Call { proc, .. } => match known.get(proc) {
                Some(f) if f.is_empty() => {}
                _ => return Some(Provenance::Callee(i, proc.clone())),
            },
            _ => return Some(Provenance::Write(i)),
        }
    }
    None
}

/// Optimistic fixpoint: every procedure starts EMPTY and becomes WHOLE_HEAP
/// once it writes the heap or calls a bodiless, undeclared or WHOLE_HEAP
/// procedure.
pub fn infer_frames(program: &Program) -> BTreeMap<String, FrameInfo> {
    let procs: Vec<&Procedure> = program.procedures().collect();
    let mut out: BTreeMap<String, FrameInfo> = procs
        .iter()
        .map(|p| {
            (
                p.name.clone(),
                FrameInfo {
                    frame: Frame::Empty,
                    provenance: None,
                },
            )
        })
        .collect();
    loop {
        let mut changed = false;
        for p in &procs {
            if !out[&p.name].is_empty() {
                continue;
            }
            if let Some(why) = classify(p, &out) {
                out.insert(
                    p.name.clone(),
                    FrameInfo {
                        frame: Frame::WholeHeap,
                        provenance: Some(why),
                    },
                );
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boogie::parse_program;

    fn frames(text: &str) -> BTreeMap<String, FrameInfo> {
        infer_frames(&parse_program(text).unwrap())
    }

    #[test]
    fn local_assignments_keep_the_frame_empty() {
        let f = frames("procedure p() { var x: int; x := 1; }");
        assert_eq!(f["p"].frame, Frame::Empty);
    }

    #[test]
    fn heap_assignment_is_whole_heap() {
        let f = frames("var #heap: int; procedure p() { #heap := 1; }");
        assert_eq!(f["p"].frame, Frame::WholeHeap);
        assert_eq!(f["p"].provenance, Some(Provenance::Write(0)));
    }

    #[test]
    fn bodiless_callee_is_conservative() {
        let f = frames("procedure lib(); procedure p() { call lib(); }");
        assert_eq!(f["lib"].frame, Frame::WholeHeap);
        assert_eq!(f["p"].provenance, Some(Provenance::Callee(0, "lib".into())));
    }

    #[test]
    fn mutual_recursion_without_writes_stays_empty() {
        let f = frames("procedure a() { call b(); } procedure b() { call a(); }");
        assert!(f["a"].is_empty() && f["b"].is_empty());
    }

    #[test]
    fn writes_propagate_through_cycles() {
        let f = frames(
            "var #heap: int; procedure a() { call b(); } procedure b() { call a(); call c(); } procedure c() { #heap := 0; }",
        );
        assert!(f.values().all(|i| i.frame == Frame::WholeHeap));
    }
}
