// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Abstract syntax for the emitted Boogie subset.

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BType {
    Int,
    Real,
    Bool,
    /// A declared type constructor applied to arguments, or a type variable.
    Named(String, Vec<BType>),
    /// `<tparams>[domain]range`
    Map {
        tparams: Vec<String>,
        domain: Vec<BType>,
        range: Box<BType>,
    },
}

impl BType {
    pub fn named(name: &str) -> BType {
        BType::Named(name.to_string(), Vec::new())
    }

    pub fn reference() -> BType {
        BType::named("Reference")
    }

    pub fn field(of: BType) -> BType {
        BType::Named("Field".to_string(), vec![of])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Iff,
    Implies,
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    IntDiv,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Iff => "<==>",
            BinOp::Implies => "==>",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::IntDiv => "div",
            BinOp::Mod => "mod",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::And | BinOp::Or => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::IntDiv | BinOp::Mod => 6,
        }
    }

    pub fn all() -> [BinOp; 16] {
        use BinOp::*;
        [Iff, Implies, And, Or, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, IntDiv, Mod]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BExpr {
    Int(i128),
    /// Decimal literal text such as `1.5` or `2.0e-3`, sign included.
    Real(String),
    Bool(bool),
    Id(String),
    App(String, Vec<BExpr>),
    Select(Box<BExpr>, Vec<BExpr>),
    Store(Box<BExpr>, Vec<BExpr>, Box<BExpr>),
    Old(Box<BExpr>),
    Unary(UnOp, Box<BExpr>),
    Binary(BinOp, Box<BExpr>, Box<BExpr>),
    Ite(Box<BExpr>, Box<BExpr>, Box<BExpr>),
    Quant {
        kind: Quantifier,
        tparams: Vec<String>,
        vars: Vec<(String, BType)>,
        body: Box<BExpr>,
    },
    Coerce(Box<BExpr>, BType),
}

impl BExpr {
    pub fn id(name: &str) -> BExpr {
        BExpr::Id(name.to_string())
    }

    pub fn app(name: &str, args: Vec<BExpr>) -> BExpr {
        BExpr::App(name.to_string(), args)
    }

    pub fn bin(op: BinOp, a: BExpr, b: BExpr) -> BExpr {
        BExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(a: BExpr) -> BExpr {
        BExpr::Unary(UnOp::Not, Box::new(a))
    }

    pub fn ite(c: BExpr, t: BExpr, e: BExpr) -> BExpr {
        BExpr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn children(&self) -> Vec<&BExpr> {
        match self {
            BExpr::Int(_) | BExpr::Real(_) | BExpr::Bool(_) | BExpr::Id(_) => vec![],
            BExpr::App(_, args) => args.iter().collect(),
            BExpr::Select(m, ix) => std::iter::once(&**m).chain(ix).collect(),
            BExpr::Store(m, ix, v) => std::iter::once(&**m).chain(ix).chain([&**v]).collect(),
            BExpr::Old(e) | BExpr::Unary(_, e) | BExpr::Coerce(e, _) => vec![e],
            BExpr::Binary(_, a, b) => vec![a, b],
            BExpr::Ite(c, t, e) => vec![c, t, e],
            BExpr::Quant { body, .. } => vec![body],
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a BExpr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn any(&self, pred: &dyn Fn(&BExpr) -> bool) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= pred(e));
        hit
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.any(&|e| matches!(e, BExpr::Id(n) | BExpr::App(n, _) if n == name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BStmt {
    Label(String),
    Assign(String, BExpr),
    Call {
        outs: Vec<String>,
        proc: String,
        args: Vec<BExpr>,
    },
    If {
        cond: BExpr,
        then: Vec<BStmt>,
        els: Option<Vec<BStmt>>,
    },
    Goto(Vec<String>),
    Assert(BExpr),
    Assume(BExpr),
    Return,
}

impl BStmt {
    /// Visit this statement and every statement nested in it.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a BStmt)) {
        f(self);
        if let BStmt::If { then, els, .. } = self {
            for s in then.iter().chain(els.iter().flatten()) {
                s.walk(f);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: BType,
}

impl Param {
    pub fn new(name: &str, ty: BType) -> Param {
        Param {
            name: name.to_string(),
            ty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spec {
    Requires(BExpr),
    Ensures(BExpr),
    Modifies(Vec<String>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProcBody {
    pub locals: Vec<Param>,
    pub stmts: Vec<BStmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub tparams: Vec<String>,
    pub params: Vec<Param>,
    pub ret: BType,
    pub body: Option<BExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub specs: Vec<Spec>,
    pub body: Option<ProcBody>,
}

impl Procedure {
    pub fn modifies(&self) -> Vec<&str> {
        self.specs
            .iter()
            .flat_map(|s| match s {
                Spec::Modifies(v) => v.iter().map(String::as_str).collect(),
                _ => vec![],
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Type {
        name: String,
        params: Vec<String>,
        def: Option<BType>,
    },
    Const {
        name: String,
        ty: BType,
        unique: bool,
    },
    Var(Param),
    Function(Function),
    Axiom(BExpr),
    Procedure(Procedure),
}

impl Decl {
    pub fn name(&self) -> Option<&str> {
        match self {
            Decl::Type { name, .. } | Decl::Const { name, .. } => Some(name),
            Decl::Var(p) => Some(&p.name),
            Decl::Function(f) => Some(&f.name),
            Decl::Procedure(p) => Some(&p.name),
            Decl::Axiom(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.decls.iter().find_map(|d| match d {
            Decl::Procedure(p) if p.name == name => Some(p),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.decls.iter().find_map(|d| match d {
            Decl::Function(f) if f.name == name => Some(f),
            _ => None,
        })
    }

    pub fn procedures(&self) -> impl Iterator<Item = &Procedure> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Procedure(p) => Some(p),
            _ => None,
        })
    }
}

pub const KEYWORDS: &[&str] = &[
    "type", "const", "unique", "var", "function", "axiom", "procedure", "implementation", "returns",
    "requires", "ensures", "modifies", "free", "forall", "exists", "old", "if", "then", "else",
    "goto", "return", "assert", "assume", "call", "havoc", "true", "false", "int", "real", "bool",
    "div", "mod", "while", "invariant", "break", "finite", "complete", "where", "lambda",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "_$#@'~^?`".contains(c)
}

pub fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '.'
}

/// Whether `s` is a valid identifier that is not a keyword.
pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char) && !is_keyword(s)
}
