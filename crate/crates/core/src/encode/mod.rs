// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Translation of typed IR and contracts into Boogie.

mod body;
mod expr;
mod loops;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::boogie::{self, BType, Decl, Program, SyntaxError};
use crate::classfile::{FieldRef, MethodRef};
use crate::ir::Type;
use crate::spec::{Aggregate, MethodContracts, SpecError};

pub use body::extract_calls;
pub use loops::inject_invariants;

/// The heap model and helper declarations every program starts with.
pub const DEFAULT_PRELUDE: &str = include_str!("prelude.bpl");

pub const RET: &str = "@ret";
pub const RECEIVER: &str = "this";
pub const HEAP_PARAM: &str = "h";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("type conflict: {0}")]
    TypeConflict(String),
    #[error("`{first}` and `{second}` both translate to `{name}`")]
    NameClash {
        name: String,
        first: String,
        second: String,
    },
}

impl EncodeError {
    pub fn code(&self) -> &'static str {
        match self {
            EncodeError::Spec(e) => e.code(),
            EncodeError::Unsupported(_) => "E_UNSUPPORTED",
            EncodeError::TypeConflict(_) => "E_TYPE_CONFLICT",
            EncodeError::NameClash { .. } => "E_NAME_CLASH",
        }
    }
}

pub type Result<T> = std::result::Result<T, EncodeError>;

pub fn parse_prelude(text: &str) -> std::result::Result<Program, SyntaxError> {
    boogie::parse_program(text)
}

pub fn translate_type(t: &Type) -> BType {
    match t {
        Type::Bool => BType::Bool,
        Type::Float | Type::Double => BType::Real,
        t if t.is_reference() => BType::reference(),
        _ => BType::Int,
    }
}

/// 32-bit FNV-1a.
pub fn fnv32(s: &str) -> u32 {
    let mut h: u32 = 0x811c9dc5;
    for b in s.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x01000193);
    }
    h
}

/// Replace characters that cannot appear in a Boogie identifier.
pub fn sanitize(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if boogie::is_ident_char(c) { c } else { '$' })
        .collect();
    if !out.starts_with(boogie::is_ident_start) {
        out.insert(0, '$');
    }
    if boogie::is_keyword(&out) {
        out.push('$');
    }
    out
}

pub fn class_const(internal: &str) -> String {
    sanitize(&internal.replace('/', "."))
}

pub fn field_const(f: &FieldRef) -> String {
    field_name(&f.owner, &f.name)
}

pub fn field_name(owner: &str, name: &str) -> String {
    format!("{}.{}", class_const(owner), sanitize(name))
}

pub fn method_name(m: &MethodRef) -> String {
    let member = match m.name.as_str() {
        "<init>" => "$init$".to_string(),
        "<clinit>" => "$clinit$".to_string(),
        n => sanitize(n),
    };
    format!(
        "{}.{}#{:08x}",
        class_const(&m.owner),
        member,
        fnv32(&m.descriptor.to_string())
    )
}

/// Global names declared by a prelude.
pub fn declared_names(p: &Program) -> BTreeSet<String> {
    p.decls.iter().filter_map(|d| d.name().map(str::to_string)).collect()
}

/// How a call site is translated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalleeKind {
    /// Inlined as its aggregate.
    Predicate,
    /// Applied as a Boogie function.
    Pure,
    /// A procedure call.
    Procedure,
    /// Dropped: `java.lang.Object.<init>` has no effect.
    Ignored,
}

pub fn is_object_init(m: &MethodRef) -> bool {
    m.owner == "java/lang/Object" && m.name == "<init>" && m.descriptor.params.is_empty()
}

/// Whole-program facts the translation of each member consults.
pub struct Context<'a> {
    pub contracts: &'a BTreeMap<MethodRef, MethodContracts>,
    pub aggregates: &'a BTreeMap<MethodRef, Aggregate>,
    /// Maps a call-site reference to the declaring method, if known.
    pub resolve: &'a dyn Fn(&MethodRef) -> MethodRef,
    /// Names a local may not take.
    pub reserved: BTreeSet<String>,
}

impl Context<'_> {
    pub fn callee_kind(&self, m: &MethodRef) -> CalleeKind {
        if is_object_init(m) {
            return CalleeKind::Ignored;
        }
        match self.contracts.get(&(self.resolve)(m)) {
            Some(c) if c.is_pure => CalleeKind::Pure,
            Some(c) if c.is_predicate => CalleeKind::Predicate,
            _ => CalleeKind::Procedure,
        }
    }

    pub fn is_spec(&self, m: &MethodRef) -> bool {
        matches!(self.callee_kind(m), CalleeKind::Pure | CalleeKind::Predicate)
    }
}

/// Symbols referenced while translating, to be declared by the caller.
#[derive(Clone, Debug, Default)]
pub struct Uses {
    pub classes: BTreeSet<String>,
    /// (owner, name) to the field's value type.
    pub fields: BTreeMap<(String, String), BType>,
    /// Procedure callees with whether they take a receiver.
    pub callees: BTreeMap<MethodRef, bool>,
    pub strings: BTreeMap<String, usize>,
}

impl Uses {
    pub fn field(&mut self, f: &FieldRef) -> String {
        self.classes.insert(f.owner.clone());
        self.fields.insert(
            (f.owner.clone(), f.name.clone()),
            translate_type(&Type::from_field(&f.descriptor)),
        );
        field_const(f)
    }

    pub fn class(&mut self, internal: &str) -> String {
        self.classes.insert(internal.to_string());
        class_const(internal)
    }

    pub fn string(&mut self, s: &str) -> usize {
        let n = self.strings.len();
        *self.strings.entry(s.to_string()).or_insert(n)
    }
}

pub use body::{translate_procedure, ProcedureInput};
pub use expr::translate_function;

fn claim(seen: &mut BTreeMap<String, String>, name: &str, what: String) -> Result<()> {
    match seen.get(name) {
        Some(first) if *first != what => Err(EncodeError::NameClash {
            name: name.to_string(),
            first: first.clone(),
            second: what,
        }),
        _ => {
            seen.insert(name.to_string(), what);
            Ok(())
        }
    }
}

/// Constants for the classes and fields in `uses`, each list sorted by name.
/// `seen` records every global name already claimed.
pub fn symbol_decls(uses: &Uses, seen: &mut BTreeMap<String, String>) -> Result<(Vec<Decl>, Vec<Decl>)> {
    let mut classes = BTreeMap::new();
    for c in &uses.classes {
        let name = class_const(c);
        claim(seen, &name, format!("class {c}"))?;
        classes.insert(name, ());
    }
    let mut fields = BTreeMap::new();
    for ((owner, f), t) in &uses.fields {
        let name = field_name(owner, f);
        claim(seen, &name, format!("field {owner}.{f}"))?;
        fields.insert(name, t.clone());
    }
    let classes = classes
        .into_keys()
        .map(|name| Decl::Const {
            name,
            ty: BType::named("Type"),
            unique: true,
        })
        .collect();
    let fields = fields
        .into_iter()
        .map(|(name, t)| Decl::Const {
            name,
            ty: BType::field(t),
            unique: true,
        })
        .collect();
    Ok((classes, fields))
}

/// Claim a global name for a described entity, failing on a collision.
pub fn claim_name(seen: &mut BTreeMap<String, String>, name: &str, what: String) -> Result<()> {
    claim(seen, name, what)
}
