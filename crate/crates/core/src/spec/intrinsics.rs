// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Recognition of specification-library annotations and operator methods.

use crate::classfile::{Annotation, MethodDescriptor, MethodRef};
use crate::ir::{IntrinsicKind, Type};

pub const DEFAULT_NAMESPACE: &str = "byteback.annotations";

const OBJECT: &str = "Ljava/lang/Object;";

/// Package under which the contract annotations and operator classes live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Namespace {
    dotted: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnotationKind {
    Require,
    Ensure,
    Predicate,
    Pure,
}

impl Default for Namespace {
    fn default() -> Self {
        Namespace::new(DEFAULT_NAMESPACE)
    }
}

impl Namespace {
    pub fn new(prefix: &str) -> Namespace {
        Namespace {
            dotted: prefix.trim_end_matches('.').replace('/', "."),
        }
    }

    pub fn dotted(&self) -> &str {
        &self.dotted
    }

    pub fn internal(&self) -> String {
        self.dotted.replace('.', "/")
    }

    /// Internal name of a library class, e.g. `byteback/annotations/Operator`.
    pub fn class(&self, simple: &str) -> String {
        format!("{}/{simple}", self.internal())
    }

    /// Whether an internal class name belongs to the library.
    pub fn owns(&self, class: &str) -> bool {
        class
            .strip_prefix(&self.internal())
            .is_some_and(|rest| rest.starts_with('/') && !rest[1..].contains('/'))
    }

    pub fn annotation_kind(&self, a: &Annotation) -> Option<AnnotationKind> {
        let rest = a.type_name.strip_prefix(&self.dotted)?.strip_prefix('.')?;
        let simple = rest.strip_prefix("Contract$").unwrap_or(rest);
        match simple {
            "Require" => Some(AnnotationKind::Require),
            "Ensure" => Some(AnnotationKind::Ensure),
            "Predicate" => Some(AnnotationKind::Predicate),
            "Pure" => Some(AnnotationKind::Pure),
            _ => None,
        }
    }

    /// The operator a library call denotes, matched on owner, name and
    /// exact descriptor.
    pub fn recognize(&self, m: &MethodRef) -> Option<IntrinsicKind> {
        let simple = m.owner.strip_prefix(&self.internal())?.strip_prefix('/')?;
        let desc = m.descriptor.to_string();
        let d = desc.as_str();
        let kind = match (simple, m.name.as_str()) {
            ("Operator", "eq") if is_binary_pred(d, true) => IntrinsicKind::Eq,
            ("Operator", "neq") if is_binary_pred(d, true) => IntrinsicKind::Neq,
            ("Operator", "lt") if is_binary_pred(d, false) => IntrinsicKind::Lt,
            ("Operator", "lte") if is_binary_pred(d, false) => IntrinsicKind::Lte,
            ("Operator", "gt") if is_binary_pred(d, false) => IntrinsicKind::Gt,
            ("Operator", "gte") if is_binary_pred(d, false) => IntrinsicKind::Gte,
            ("Operator", "not") if d == "(Z)Z" => IntrinsicKind::Not,
            ("Operator", "implies") if d == "(ZZ)Z" => IntrinsicKind::Implies,
            ("Operator", "conditional") if is_conditional(d) => IntrinsicKind::Conditional,
            ("Quantifier", "forall") if is_quantifier(d) => IntrinsicKind::Forall,
            ("Quantifier", "exists") if is_quantifier(d) => IntrinsicKind::Exists,
            ("Special", "old") if is_old(d) => IntrinsicKind::Old,
            ("Contract", "invariant") if d == "(Z)V" => IntrinsicKind::Invariant,
            ("Contract", "assertion") if d == "(Z)V" => IntrinsicKind::Assertion,
            ("Contract", "assumption") if d == "(Z)V" => IntrinsicKind::Assumption,
            ("Binding", name) => IntrinsicKind::Binding(binding_type(name, d)?),
            _ => return None,
        };
        Some(kind)
    }

    /// Every recognized library method, for tests and documentation.
    pub fn all_intrinsics(&self) -> Vec<MethodRef> {
        let mut out = Vec::new();
        let mut add = |class: &str, name: &str, desc: &str| {
            let d = MethodDescriptor::parse(desc).expect("well-formed library descriptor");
            out.push(MethodRef::new(&self.class(class), name, d));
        };
        for name in ["eq", "neq"] {
            for t in ["I", "J", "F", "D", "Z", OBJECT] {
                add("Operator", name, &format!("({t}{t})Z"));
            }
        }
        for name in ["lt", "lte", "gt", "gte"] {
            for t in ["I", "J", "F", "D"] {
                add("Operator", name, &format!("({t}{t})Z"));
            }
        }
        add("Operator", "not", "(Z)Z");
        add("Operator", "implies", "(ZZ)Z");
        for t in ["I", "J", "F", "D", "Z", OBJECT] {
            add("Operator", "conditional", &format!("(Z{t}{t}){t}"));
            add("Special", "old", &format!("({t}){t}"));
        }
        for name in ["forall", "exists"] {
            for t in ["I", "J", "F", "D", "Z", OBJECT] {
                add("Quantifier", name, &format!("({t}Z)Z"));
            }
        }
        for name in ["invariant", "assertion", "assumption"] {
            add("Contract", name, "(Z)V");
        }
        for (name, t) in [
            ("integer", "I"),
            ("longInteger", "J"),
            ("real", "D"),
            ("floating", "F"),
            ("bool", "Z"),
            ("reference", OBJECT),
        ] {
            add("Binding", name, &format!("(){t}"));
        }
        out
    }
}

const PRIMS: [&str; 6] = ["I", "J", "F", "D", "Z", OBJECT];

fn is_binary_pred(d: &str, equality: bool) -> bool {
    let n = if equality { 6 } else { 4 };
    PRIMS[..n].iter().any(|t| d == format!("({t}{t})Z"))
}

fn is_conditional(d: &str) -> bool {
    PRIMS.iter().any(|t| d == format!("(Z{t}{t}){t}"))
}

fn is_quantifier(d: &str) -> bool {
    PRIMS.iter().any(|t| d == format!("({t}Z)Z"))
}

fn is_old(d: &str) -> bool {
    PRIMS.iter().any(|t| d == format!("({t}){t}"))
}

fn binding_type(name: &str, d: &str) -> Option<Type> {
    let t = match (name, d) {
        ("integer", "()I") => Type::Int,
        ("longInteger", "()J") => Type::Long,
        ("real", "()D") => Type::Double,
        ("floating", "()F") => Type::Float,
        ("bool", "()Z") => Type::Bool,
        ("reference", "()Ljava/lang/Object;") => Type::object(),
        _ => return None,
    };
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn recognition_is_injective_and_total_on_the_library() {
        let ns = Namespace::default();
        let all = ns.all_intrinsics();
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        for m in &all {
            assert!(ns.recognize(m).is_some(), "{m}");
        }
    }

    #[test]
    fn rejects_lookalikes() {
        let ns = Namespace::default();
        let lt = |owner: &str, desc: &str| {
            MethodRef::new(owner, "lt", MethodDescriptor::parse(desc).unwrap())
        };
        assert_eq!(
            ns.recognize(&lt("byteback/annotations/Operator", "(II)Z")),
            Some(IntrinsicKind::Lt)
        );
        assert_eq!(ns.recognize(&lt("byteback/annotations/Operator", "(IJ)Z")), None);
        assert_eq!(ns.recognize(&lt("byteback/annotations/Operator", "(ZZ)Z")), None);
        assert_eq!(ns.recognize(&lt("other/Operator", "(II)Z")), None);
        let custom = Namespace::new("org.example.spec");
        assert!(custom.recognize(&lt("org/example/spec/Operator", "(II)Z")).is_some());
    }

    #[test]
    fn annotation_names_match_both_layouts() {
        let ns = Namespace::default();
        let a = Annotation::new("byteback.annotations.Contract$Require");
        assert_eq!(ns.annotation_kind(&a), Some(AnnotationKind::Require));
        let b = Annotation::new("byteback/annotations/Pure");
        assert_eq!(ns.annotation_kind(&b), Some(AnnotationKind::Pure));
        assert_eq!(ns.annotation_kind(&Annotation::new("other.Pure")), None);
    }
}
