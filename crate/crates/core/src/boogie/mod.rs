// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Boogie AST, printer and parser.

mod ast;
mod parse;
mod print;

use thiserror::Error;

pub use ast::*;
pub use parse::{parse_expr, parse_program};
pub use print::{print_decl, print_expr, print_program, print_type};

pub const HEAP: &str = "#heap";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, message: &str) -> SyntaxError {
        SyntaxError {
            line,
            col,
            message: message.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        "E_SYNTAX"
    }
}

/// Statements of `body` that assign the heap or call a procedure, in order.
pub fn heap_effects(body: &ProcBody) -> Vec<&BStmt> {
    let mut out = Vec::new();
    for s in &body.stmts {
        s.walk(&mut |s| match s {
            BStmt::Assign(x, _) if x == HEAP => out.push(s),
            BStmt::Call { .. } => out.push(s),
            _ => {}
        });
    }
    out
}

/// The first heap assignment or call in the named procedure's body.
/// Whether a call modifies the heap is left to the caller.
pub fn scan_heap_writes<'a>(p: &'a Program, proc: &str) -> Option<&'a BStmt> {
    let body = p.procedure(proc)?.body.as_ref()?;
    heap_effects(body).into_iter().next()
}

/// Format a statement on one line, for diagnostics.
pub fn describe_stmt(s: &BStmt) -> String {
    match s {
        BStmt::Assign(x, e) => format!("{x} := {}", print_expr(e)),
        BStmt::Call { outs, proc, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            let lhs = if outs.is_empty() {
                String::new()
            } else {
                format!("{} := ", outs.join(", "))
            };
            format!("call {lhs}{proc}({})", args.join(", "))
        }
        other => format!("{other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axiom_true_prints_exactly() {
        let p = Program {
            decls: vec![Decl::Axiom(BExpr::Bool(true))],
        };
        assert_eq!(print_program(&p), "axiom true;\n");
    }

    #[test]
    fn broken_procedure_is_a_syntax_error() {
        let e = parse_program("procedure p(;").unwrap_err();
        assert_eq!(e.code(), "E_SYNTAX");
        assert_eq!((e.line, e.col), (1, 13));
    }

    #[test]
    fn precedence_round_trips() {
        for src in [
            "a + b * c",
            "(a + b) * c",
            "a - (b - c)",
            "a ==> b ==> c",
            "(a ==> b) ==> c",
            "a && (b || c)",
            "!(a && b) <==> c",
            "-(5) + -5",
            "(array.read(h, as, i): int) == e",
            "(exists i: int :: 0 <= i && i < n)",
            "if a then 1 else (if b then 2 else 3) + 1",
            "m[r := m[r][f := v]][r][f]",
            "x div 2 mod 3",
            "real(x) / 2.5e-3",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
        assert_eq!(print_expr(&parse_expr("(a + b) + c").unwrap()), "a + b + c");
    }

    #[test]
    fn scan_finds_heap_assignment_and_calls() {
        let p = parse_program(
            "procedure a() { var x: int; x := 1; }\n\
             procedure b() { #heap := update(#heap, r, f, 1); }\n\
             procedure c() { call q(); }",
        )
        .unwrap();
        assert!(scan_heap_writes(&p, "a").is_none());
        assert!(matches!(scan_heap_writes(&p, "b"), Some(BStmt::Assign(..))));
        assert!(matches!(scan_heap_writes(&p, "c"), Some(BStmt::Call { .. })));
    }
}
