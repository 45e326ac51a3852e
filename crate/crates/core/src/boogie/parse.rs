// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lexer and recursive-descent parser for the Boogie subset.

use super::ast::*;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i128),
    Real(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "<==>", "==>", "::", ":=", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "(", ")", "{", "}",
    "[", "]", ",", ";", ":", "!", "+", "-", "*", "/", "=",
];

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(SyntaxError::new(l0, c0, "unterminated comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let mut real = false;
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                real = true;
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == 'e' {
                    let mut k = j + 1;
                    if k < chars.len() && chars[k] == '-' {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
            }
            let lexeme: String = chars[start..j].iter().collect();
            let tok = if real {
                Tok::Real(lexeme)
            } else {
                Tok::Int(
                    lexeme
                        .parse()
                        .map_err(|_| SyntaxError::new(l0, c0, "integer literal out of range"))?,
                )
            };
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Token {
                tok,
                line: l0,
                col: c0,
            });
            continue;
        }
        if is_ident_start(c) || (c == '\\' && chars.get(i + 1).is_some_and(|d| is_ident_start(*d))) {
            let start = if c == '\\' { i + 1 } else { i };
            let mut j = start + 1;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Token {
                tok: Tok::Ident(name),
                line: l0,
                col: c0,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(SyntaxError::new(l0, c0, &format!("unexpected character `{c}`")));
        };
        advance(&mut i, &mut line, &mut col, sym.chars().count());
        out.push(Token {
            tok: Tok::Sym(sym),
            line: l0,
            col: c0,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: &str) -> PResult<T> {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Real(r) => format!("`{r}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(SyntaxError::new(t.line, t.col, &format!("expected {msg}, found {found}")))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut v = vec![self.ident()?];
        while self.eat_sym(",") {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn tparams(&mut self) -> PResult<Vec<String>> {
        if !self.eat_sym("<") {
            return Ok(Vec::new());
        }
        let v = self.ident_list()?;
        self.expect_sym(">")?;
        Ok(v)
    }

    // Types

    fn starts_type_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "int" | "real" | "bool"),
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn type_atom(&mut self) -> PResult<BType> {
        if self.eat_kw("int") {
            return Ok(BType::Int);
        }
        if self.eat_kw("real") {
            return Ok(BType::Real);
        }
        if self.eat_kw("bool") {
            return Ok(BType::Bool);
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        Ok(BType::Named(self.ident()?, Vec::new()))
    }

    fn ty(&mut self) -> PResult<BType> {
        if self.is_sym("<") || self.is_sym("[") {
            let tparams = self.tparams()?;
            self.expect_sym("[")?;
            let mut domain = vec![self.ty()?];
            while self.eat_sym(",") {
                domain.push(self.ty()?);
            }
            self.expect_sym("]")?;
            let range = Box::new(self.ty()?);
            return Ok(BType::Map {
                tparams,
                domain,
                range,
            });
        }
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let name = self.ident()?;
                let mut args = Vec::new();
                while self.starts_type_atom() {
                    args.push(self.type_atom()?);
                }
                Ok(BType::Named(name, args))
            }
            _ if self.starts_type_atom() => self.type_atom(),
            _ => self.error("type"),
        }
    }

    /// `a, b: T, c: U` as a flat list.
    fn typed_idents(&mut self, close: &str) -> PResult<Vec<Param>> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            let names = self.ident_list()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            out.extend(names.iter().map(|n| Param::new(n, t.clone())));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    // Expressions

    fn expr(&mut self) -> PResult<BExpr> {
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(BExpr::ite(c, t, e));
        }
        let mut a = self.implies()?;
        while self.eat_sym("<==>") {
            let b = self.implies()?;
            a = BExpr::bin(BinOp::Iff, a, b);
        }
        Ok(a)
    }

    fn implies(&mut self) -> PResult<BExpr> {
        let a = self.logic()?;
        if self.eat_sym("==>") {
            let b = self.implies()?;
            return Ok(BExpr::bin(BinOp::Implies, a, b));
        }
        Ok(a)
    }

    fn logic(&mut self) -> PResult<BExpr> {
        let mut a = self.relation()?;
        let op = if self.is_sym("&&") {
            BinOp::And
        } else if self.is_sym("||") {
            BinOp::Or
        } else {
            return Ok(a);
        };
        while self.eat_sym(op.symbol()) {
            let b = self.relation()?;
            a = BExpr::bin(op, a, b);
        }
        if self.is_sym("&&") || self.is_sym("||") {
            return self.error("parentheses when mixing `&&` and `||`");
        }
        Ok(a)
    }

    fn relop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return None,
        })
    }

    fn relation(&mut self) -> PResult<BExpr> {
        let a = self.additive()?;
        let Some(op) = self.relop() else {
            return Ok(a);
        };
        self.bump();
        let b = self.additive()?;
        if self.relop().is_some() {
            return self.error("parentheses around chained comparison");
        }
        Ok(BExpr::bin(op, a, b))
    }

    fn additive(&mut self) -> PResult<BExpr> {
        let mut a = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.multiplicative()?;
            a = BExpr::bin(op, a, b);
        }
    }

    fn multiplicative(&mut self) -> PResult<BExpr> {
        let mut a = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(k) if k == "div" => BinOp::IntDiv,
                Tok::Ident(k) if k == "mod" => BinOp::Mod,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.unary()?;
            a = BExpr::bin(op, a, b);
        }
    }

    fn unary(&mut self) -> PResult<BExpr> {
        if self.eat_sym("!") {
            return Ok(BExpr::not(self.unary()?));
        }
        if self.eat_sym("-") {
            let lit = match self.peek().clone() {
                Tok::Int(n) => Some(BExpr::Int(-n)),
                Tok::Real(r) => Some(BExpr::Real(format!("-{r}"))),
                _ => None,
            };
            if let Some(lit) = lit {
                self.bump();
                return self.postfix(lit);
            }
            return Ok(BExpr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        let a = self.atom()?;
        self.postfix(a)
    }

    fn postfix(&mut self, mut a: BExpr) -> PResult<BExpr> {
        loop {
            if self.eat_sym("[") {
                let mut ix = vec![self.expr()?];
                while self.eat_sym(",") {
                    ix.push(self.expr()?);
                }
                if self.eat_sym(":=") {
                    let v = self.expr()?;
                    self.expect_sym("]")?;
                    a = BExpr::Store(Box::new(a), ix, Box::new(v));
                } else {
                    self.expect_sym("]")?;
                    a = BExpr::Select(Box::new(a), ix);
                }
            } else if self.eat_sym(":") {
                let t = self.ty()?;
                a = BExpr::Coerce(Box::new(a), t);
            } else {
                return Ok(a);
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<BExpr>> {
        self.expect_sym("(")?;
        let mut v = Vec::new();
        if !self.eat_sym(")") {
            v.push(self.expr()?);
            while self.eat_sym(",") {
                v.push(self.expr()?);
            }
            self.expect_sym(")")?;
        }
        Ok(v)
    }

    fn atom(&mut self) -> PResult<BExpr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(BExpr::Int(n))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(BExpr::Real(r))
            }
            Tok::Sym("(") => {
                self.bump();
                let kind = if self.eat_kw("forall") {
                    Some(Quantifier::Forall)
                } else if self.eat_kw("exists") {
                    Some(Quantifier::Exists)
                } else {
                    None
                };
                if let Some(kind) = kind {
                    let tparams = self.tparams()?;
                    let vars = self.typed_idents("::")?;
                    if vars.is_empty() {
                        return self.error("bound variable");
                    }
                    self.expect_sym("::")?;
                    let body = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(BExpr::Quant {
                        kind,
                        tparams,
                        vars: vars.into_iter().map(|p| (p.name, p.ty)).collect(),
                        body: Box::new(body),
                    });
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "true" || k == "false" => {
                self.bump();
                Ok(BExpr::Bool(k == "true"))
            }
            Tok::Ident(k) if k == "old" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(BExpr::Old(Box::new(e)))
            }
            Tok::Ident(k) if (k == "int" || k == "real") && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                Ok(BExpr::App(k, self.args()?))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    Ok(BExpr::App(name, self.args()?))
                } else {
                    Ok(BExpr::Id(name))
                }
            }
            _ => self.error("expression"),
        }
    }

    // Statements

    fn block(&mut self) -> PResult<Vec<BStmt>> {
        self.expect_sym("{")?;
        let mut v = Vec::new();
        while !self.eat_sym("}") {
            v.push(self.stmt()?);
        }
        Ok(v)
    }

    fn stmt(&mut self) -> PResult<BStmt> {
        if let Tok::Ident(name) = self.peek().clone() {
            if !is_keyword(&name) && self.peek_at(1) == &Tok::Sym(":") {
                self.bump();
                self.bump();
                return Ok(BStmt::Label(name));
            }
        }
        if self.eat_kw("call") {
            let first = self.ident()?;
            let (outs, proc) = if self.is_sym(",") || self.is_sym(":=") {
                let mut outs = vec![first];
                while self.eat_sym(",") {
                    outs.push(self.ident()?);
                }
                self.expect_sym(":=")?;
                (outs, self.ident()?)
            } else {
                (Vec::new(), first)
            };
            let args = self.args()?;
            self.expect_sym(";")?;
            return Ok(BStmt::Call { outs, proc, args });
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let then = self.block()?;
            let els = if self.eat_kw("else") {
                Some(self.block()?)
            } else {
                None
            };
            return Ok(BStmt::If { cond, then, els });
        }
        if self.eat_kw("goto") {
            let ls = self.ident_list()?;
            self.expect_sym(";")?;
            return Ok(BStmt::Goto(ls));
        }
        for (kw, assert) in [("assert", true), ("assume", false)] {
            if self.eat_kw(kw) {
                let e = self.expr()?;
                self.expect_sym(";")?;
                return Ok(if assert { BStmt::Assert(e) } else { BStmt::Assume(e) });
            }
        }
        if self.eat_kw("return") {
            self.expect_sym(";")?;
            return Ok(BStmt::Return);
        }
        let x = self.ident()?;
        self.expect_sym(":=")?;
        let e = self.expr()?;
        self.expect_sym(";")?;
        Ok(BStmt::Assign(x, e))
    }

    // Declarations

    fn decl(&mut self, out: &mut Vec<Decl>) -> PResult<()> {
        if self.eat_kw("type") {
            let name = self.ident()?;
            let mut params = Vec::new();
            while let Tok::Ident(s) = self.peek() {
                if is_keyword(s) {
                    break;
                }
                params.push(self.ident()?);
            }
            let def = if self.eat_sym("=") {
                Some(self.ty()?)
            } else {
                None
            };
            self.expect_sym(";")?;
            out.push(Decl::Type { name, params, def });
        } else if self.eat_kw("const") {
            let unique = self.eat_kw("unique");
            for p in self.typed_idents(";")? {
                out.push(Decl::Const {
                    name: p.name,
                    ty: p.ty,
                    unique,
                });
            }
            self.expect_sym(";")?;
        } else if self.eat_kw("var") {
            for p in self.typed_idents(";")? {
                out.push(Decl::Var(p));
            }
            self.expect_sym(";")?;
        } else if self.eat_kw("function") {
            let name = self.ident()?;
            let tparams = self.tparams()?;
            self.expect_sym("(")?;
            let params = self.typed_idents(")")?;
            self.expect_sym(")")?;
            self.expect_kw("returns")?;
            self.expect_sym("(")?;
            if matches!(self.peek_at(1), Tok::Sym(":")) {
                self.ident()?;
                self.bump();
            }
            let ret = self.ty()?;
            self.expect_sym(")")?;
            let body = if self.eat_sym("{") {
                let e = self.expr()?;
                self.expect_sym("}")?;
                Some(e)
            } else {
                self.expect_sym(";")?;
                None
            };
            out.push(Decl::Function(Function {
                name,
                tparams,
                params,
                ret,
                body,
            }));
        } else if self.eat_kw("axiom") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            out.push(Decl::Axiom(e));
        } else if self.eat_kw("procedure") {
            let name = self.ident()?;
            self.expect_sym("(")?;
            let params = self.typed_idents(")")?;
            self.expect_sym(")")?;
            let returns = if self.eat_kw("returns") {
                self.expect_sym("(")?;
                let r = self.typed_idents(")")?;
                self.expect_sym(")")?;
                r
            } else {
                Vec::new()
            };
            let bodiless = self.eat_sym(";");
            let mut specs = Vec::new();
            loop {
                if self.eat_kw("requires") {
                    specs.push(Spec::Requires(self.expr()?));
                } else if self.eat_kw("ensures") {
                    specs.push(Spec::Ensures(self.expr()?));
                } else if self.eat_kw("modifies") {
                    specs.push(Spec::Modifies(self.ident_list()?));
                } else {
                    break;
                }
                self.expect_sym(";")?;
            }
            let body = if bodiless {
                None
            } else {
                self.expect_sym("{")?;
                let mut locals = Vec::new();
                while self.eat_kw("var") {
                    locals.extend(self.typed_idents(";")?);
                    self.expect_sym(";")?;
                }
                let mut stmts = Vec::new();
                while !self.eat_sym("}") {
                    stmts.push(self.stmt()?);
                }
                Some(ProcBody { locals, stmts })
            };
            out.push(Decl::Procedure(Procedure {
                name,
                params,
                returns,
                specs,
                body,
            }));
        } else {
            return self.error("declaration");
        }
        Ok(())
    }
}

pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        p.decl(&mut decls)?;
    }
    Ok(Program { decls })
}

pub fn parse_expr(text: &str) -> Result<BExpr, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return p.error("end of input");
    }
    Ok(e)
}
