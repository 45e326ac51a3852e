// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic printer. Parenthesizes only where the grammar needs it,
//! except that coercions and quantifiers are always parenthesized.

use std::fmt::Write;

use super::ast::*;

pub fn print_type(t: &BType) -> String {
    let mut s = String::new();
    write_type(&mut s, t);
    s
}

fn write_type(out: &mut String, t: &BType) {
    match t {
        BType::Int => out.push_str("int"),
        BType::Real => out.push_str("real"),
        BType::Bool => out.push_str("bool"),
        BType::Named(n, args) => {
            out.push_str(n);
            for a in args {
                out.push(' ');
                match a {
                    BType::Named(_, xs) if !xs.is_empty() => {
                        out.push('(');
                        write_type(out, a);
                        out.push(')');
                    }
                    BType::Map { .. } => {
                        out.push('(');
                        write_type(out, a);
                        out.push(')');
                    }
                    _ => write_type(out, a),
                }
            }
        }
        BType::Map {
            tparams,
            domain,
            range,
        } => {
            if !tparams.is_empty() {
                let _ = write!(out, "<{}>", tparams.join(", "));
            }
            out.push('[');
            for (i, d) in domain.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_type(out, d);
            }
            out.push(']');
            write_type(out, range);
        }
    }
}

fn precedence(e: &BExpr) -> u8 {
    match e {
        BExpr::Ite(..) => 0,
        BExpr::Binary(op, ..) => op.precedence(),
        BExpr::Unary(..) => 7,
        BExpr::Int(n) if *n < 0 => 7,
        BExpr::Real(r) if r.starts_with('-') => 7,
        _ => 9,
    }
}

pub fn print_expr(e: &BExpr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_list(out: &mut String, es: &[BExpr]) {
    for (i, a) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, 0);
    }
}

fn is_logic(e: &BExpr, other: BinOp) -> bool {
    matches!(e, BExpr::Binary(op, ..) if *op == other)
}

/// Whether printing `e` after a `-` would fuse with its leftmost token.
fn leads_with_literal(e: &BExpr) -> bool {
    match e {
        BExpr::Int(_) | BExpr::Real(_) | BExpr::Unary(UnOp::Neg, _) => true,
        BExpr::Select(m, _) | BExpr::Store(m, _, _) => precedence(m) >= 9 && leads_with_literal(m),
        _ => false,
    }
}

fn write_expr(out: &mut String, e: &BExpr, min: u8) {
    let paren = precedence(e) < min;
    if paren {
        out.push('(');
    }
    match e {
        BExpr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        BExpr::Real(r) => out.push_str(r),
        BExpr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        BExpr::Id(n) => out.push_str(n),
        BExpr::App(f, args) => {
            out.push_str(f);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        BExpr::Select(m, ix) => {
            write_expr(out, m, 9);
            out.push('[');
            write_list(out, ix);
            out.push(']');
        }
        BExpr::Store(m, ix, v) => {
            write_expr(out, m, 9);
            out.push('[');
            write_list(out, ix);
            out.push_str(" := ");
            write_expr(out, v, 0);
            out.push(']');
        }
        BExpr::Old(x) => {
            out.push_str("old(");
            write_expr(out, x, 0);
            out.push(')');
        }
        BExpr::Unary(op, x) => {
            let (sym, wrap) = match op {
                UnOp::Not => ("!", false),
                UnOp::Neg => ("-", leads_with_literal(x)),
            };
            out.push_str(sym);
            if wrap {
                out.push('(');
                write_expr(out, x, 0);
                out.push(')');
            } else {
                write_expr(out, x, 7);
            }
        }
        BExpr::Binary(op, a, b) => {
            let p = op.precedence();
            match op {
                BinOp::Iff => {
                    write_expr(out, a, p);
                    let _ = write!(out, " {} ", op.symbol());
                    write_expr(out, b, p + 1);
                }
                BinOp::Implies => {
                    write_expr(out, a, p + 1);
                    let _ = write!(out, " {} ", op.symbol());
                    write_expr(out, b, p);
                }
                BinOp::And | BinOp::Or => {
                    let other = if *op == BinOp::And { BinOp::Or } else { BinOp::And };
                    let left_min = if is_logic(a, other) { p + 1 } else { p };
                    write_expr(out, a, left_min);
                    let _ = write!(out, " {} ", op.symbol());
                    write_expr(out, b, p + 1);
                }
                _ if p == 4 => {
                    write_expr(out, a, p + 1);
                    let _ = write!(out, " {} ", op.symbol());
                    write_expr(out, b, p + 1);
                }
                _ => {
                    write_expr(out, a, p);
                    let _ = write!(out, " {} ", op.symbol());
                    write_expr(out, b, p + 1);
                }
            }
        }
        BExpr::Ite(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, 0);
            out.push_str(" then ");
            write_expr(out, t, 0);
            out.push_str(" else ");
            write_expr(out, f, 0);
        }
        BExpr::Quant {
            kind,
            tparams,
            vars,
            body,
        } => {
            out.push('(');
            out.push_str(match kind {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            });
            if !tparams.is_empty() {
                let _ = write!(out, "<{}>", tparams.join(", "));
            }
            out.push(' ');
            write_params(out, vars.iter().map(|(n, t)| (n.as_str(), t)));
            out.push_str(" :: ");
            write_expr(out, body, 0);
            out.push(')');
        }
        BExpr::Coerce(x, t) => {
            out.push('(');
            write_expr(out, x, 8);
            out.push_str(": ");
            write_type(out, t);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn write_params<'a>(out: &mut String, ps: impl Iterator<Item = (&'a str, &'a BType)>) {
    for (i, (n, t)) in ps.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(n);
        out.push_str(": ");
        write_type(out, t);
    }
}

fn write_param_list(out: &mut String, ps: &[Param]) {
    out.push('(');
    write_params(out, ps.iter().map(|p| (p.name.as_str(), &p.ty)));
    out.push(')');
}

fn indent(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

fn write_stmts(out: &mut String, stmts: &[BStmt], depth: usize) {
    for s in stmts {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &BStmt, depth: usize) {
    if let BStmt::Label(l) = s {
        indent(out, depth - 1);
        let _ = writeln!(out, "{l}:");
        return;
    }
    indent(out, depth);
    match s {
        BStmt::Label(_) => unreachable!(),
        BStmt::Assign(x, e) => {
            let _ = writeln!(out, "{x} := {};", print_expr(e));
        }
        BStmt::Call { outs, proc, args } => {
            out.push_str("call ");
            if !outs.is_empty() {
                let _ = write!(out, "{} := ", outs.join(", "));
            }
            out.push_str(proc);
            out.push('(');
            write_list(out, args);
            out.push_str(");\n");
        }
        BStmt::If { cond, then, els } => {
            let _ = writeln!(out, "if ({}) {{", print_expr(cond));
            write_stmts(out, then, depth + 1);
            indent(out, depth);
            if let Some(els) = els {
                out.push_str("} else {\n");
                write_stmts(out, els, depth + 1);
                indent(out, depth);
            }
            out.push_str("}\n");
        }
        BStmt::Goto(ls) => {
            let _ = writeln!(out, "goto {};", ls.join(", "));
        }
        BStmt::Assert(e) => {
            let _ = writeln!(out, "assert {};", print_expr(e));
        }
        BStmt::Assume(e) => {
            let _ = writeln!(out, "assume {};", print_expr(e));
        }
        BStmt::Return => out.push_str("return;\n"),
    }
}

fn write_specs(out: &mut String, specs: &[Spec]) {
    for s in specs {
        match s {
            Spec::Requires(e) => {
                let _ = writeln!(out, "  requires {};", print_expr(e));
            }
            Spec::Ensures(e) => {
                let _ = writeln!(out, "  ensures {};", print_expr(e));
            }
            Spec::Modifies(v) => {
                let _ = writeln!(out, "  modifies {};", v.join(", "));
            }
        }
    }
}

pub fn print_decl(d: &Decl) -> String {
    let mut out = String::new();
    match d {
        Decl::Type { name, params, def } => {
            let _ = write!(out, "type {name}");
            for p in params {
                let _ = write!(out, " {p}");
            }
            if let Some(t) = def {
                out.push_str(" = ");
                write_type(&mut out, t);
            }
            out.push_str(";\n");
        }
        Decl::Const { name, ty, unique } => {
            let u = if *unique { "unique " } else { "" };
            let _ = writeln!(out, "const {u}{name}: {};", print_type(ty));
        }
        Decl::Var(p) => {
            let _ = writeln!(out, "var {}: {};", p.name, print_type(&p.ty));
        }
        Decl::Function(f) => {
            let _ = write!(out, "function {}", f.name);
            if !f.tparams.is_empty() {
                let _ = write!(out, "<{}>", f.tparams.join(", "));
            }
            write_param_list(&mut out, &f.params);
            let _ = write!(out, " returns ({})", print_type(&f.ret));
            match &f.body {
                Some(b) => {
                    let _ = writeln!(out, "\n{{ {} }}", print_expr(b));
                }
                None => out.push_str(";\n"),
            }
        }
        Decl::Axiom(e) => {
            let _ = writeln!(out, "axiom {};", print_expr(e));
        }
        Decl::Procedure(p) => {
            let _ = write!(out, "procedure {}", p.name);
            write_param_list(&mut out, &p.params);
            if !p.returns.is_empty() {
                out.push_str(" returns ");
                write_param_list(&mut out, &p.returns);
            }
            match &p.body {
                None => {
                    out.push_str(";\n");
                    write_specs(&mut out, &p.specs);
                }
                Some(b) => {
                    out.push('\n');
                    write_specs(&mut out, &p.specs);
                    out.push_str("{\n");
                    for l in &b.locals {
                        let _ = writeln!(out, "  var {}: {};", l.name, print_type(&l.ty));
                    }
                    write_stmts(&mut out, &b.stmts, 2);
                    out.push_str("}\n");
                }
            }
        }
    }
    out
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let big = |d: &Decl| matches!(d, Decl::Function(_) | Decl::Procedure(_));
    for (i, d) in p.decls.iter().enumerate() {
        if i > 0 && (big(d) || big(&p.decls[i - 1])) {
            out.push('\n');
        }
        out.push_str(&print_decl(d));
    }
    out
}
