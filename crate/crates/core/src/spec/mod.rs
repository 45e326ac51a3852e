// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Contract recognition: annotations, intrinsic operators, aggregation of
//! specification code into pure expressions, and loop invariants.

mod aggregate;
mod extract;
mod intrinsics;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::classfile::{read_annotations, ClassFile, FieldType, MethodInfo, MethodRef};

pub use aggregate::{aggregate, check_aggregable, evaluate, Aggregate, DEFAULT_NODE_BUDGET};
pub use extract::{extract_inline_checks, extract_loop_invariants, Invariants};
pub use intrinsics::{AnnotationKind, Namespace, DEFAULT_NAMESPACE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    ImpureWrite,
    Branching,
    ImpureCall,
    Allocation,
    MissingReturn,
    NonTrailingReturn,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            ViolationKind::ImpureWrite => "IMPURE_WRITE",
            ViolationKind::Branching => "BRANCHING",
            ViolationKind::ImpureCall => "IMPURE_CALL",
            ViolationKind::Allocation => "ALLOCATION",
            ViolationKind::MissingReturn => "MISSING_RETURN",
            ViolationKind::NonTrailingReturn => "NON_TRAILING_RETURN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Statement index in the body.
    pub index: usize,
    pub offset: Option<u32>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.code())?;
        if let Some(o) = self.offset {
            write!(f, " at offset {o}")?;
        }
        Ok(())
    }
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("no predicate named `{name}` in the declaring class")]
    NoSuchPredicate { name: String },
    #[error("`{name}` is not annotated as a predicate")]
    NotAPredicate { name: String },
    #[error("predicate `{name}` does not match the specified method: expected {expected}")]
    SignatureMismatch { name: String, expected: String },
    #[error("predicate `{name}` does not return boolean")]
    PredicateNotBoolean { name: String },
    #[error("body is not aggregable: {}", list(.violations))]
    NotAggregable { violations: Vec<Violation> },
    #[error("bound variable `{0}` used outside its quantifier")]
    BindingEscape(String),
    #[error("quantifier must bind a variable created by a Binding factory")]
    BadQuantifier,
    #[error("aggregate exceeds the node budget ({size} > {budget})")]
    AggregateTooLarge { size: usize, budget: usize },
    #[error("invariant outside of any loop")]
    InvariantOutsideLoop { offset: Option<u32> },
    #[error("invariant is not aggregable: {reason}")]
    InvariantNotAggregable { offset: Option<u32>, reason: String },
    #[error("inline check is not aggregable: {reason}")]
    CheckNotAggregable { offset: Option<u32>, reason: String },
    #[error("old(...) used outside of a postcondition")]
    OldOutsideEnsures,
    #[error("predicate `{name}` is inlined into itself")]
    RecursivePredicate { name: String },
    #[error("specification method is not pure: {provenance}")]
    ImpureSpec { provenance: String },
}

impl SpecError {
    pub fn code(&self) -> &'static str {
        match self {
            SpecError::NoSuchPredicate { .. } => "E_NO_SUCH_PREDICATE",
            SpecError::NotAPredicate { .. } => "E_NOT_A_PREDICATE",
            SpecError::SignatureMismatch { .. } => "E_SIGNATURE_MISMATCH",
            SpecError::PredicateNotBoolean { .. } => "E_PREDICATE_NOT_BOOLEAN",
            SpecError::NotAggregable { .. } => "E_NOT_AGGREGABLE",
            SpecError::BindingEscape(_) => "E_BINDING_ESCAPE",
            SpecError::BadQuantifier => "E_BAD_QUANTIFIER",
            SpecError::AggregateTooLarge { .. } => "E_AGGREGATE_TOO_LARGE",
            SpecError::InvariantOutsideLoop { .. } => "E_INVARIANT_OUTSIDE_LOOP",
            SpecError::InvariantNotAggregable { .. } => "E_INVARIANT_NOT_AGGREGABLE",
            SpecError::CheckNotAggregable { .. } => "E_CHECK_NOT_AGGREGABLE",
            SpecError::OldOutsideEnsures => "E_OLD_OUTSIDE_ENSURES",
            SpecError::RecursivePredicate { .. } => "E_RECURSIVE_PREDICATE",
            SpecError::ImpureSpec { .. } => "E_IMPURE_SPEC",
        }
    }

    pub fn offset(&self) -> Option<u32> {
        match self {
            SpecError::NotAggregable { violations } => violations.first().and_then(|v| v.offset),
            SpecError::InvariantOutsideLoop { offset }
            | SpecError::InvariantNotAggregable { offset, .. }
            | SpecError::CheckNotAggregable { offset, .. } => *offset,
            _ => None,
        }
    }
}

/// Resolved contract links of one method.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MethodContracts {
    /// Predicates from `@Require`, in declaration order.
    pub requires: Vec<MethodRef>,
    /// Predicates from `@Ensure`, in declaration order.
    pub ensures: Vec<MethodRef>,
    pub is_pure: bool,
    pub is_predicate: bool,
}

impl MethodContracts {
    /// Pure functions and predicates are specification code.
    pub fn is_spec(&self) -> bool {
        self.is_pure || self.is_predicate
    }
}

/// Link every `@Require`/`@Ensure` to a predicate declared in the same
/// class. Ensures predicates of non-void methods take the result as an
/// extra trailing parameter.
pub fn resolve_contracts(
    cf: &ClassFile,
    ns: &Namespace,
) -> Result<BTreeMap<MethodRef, MethodContracts>, (MethodRef, SpecError)> {
    let kinds = |m: &MethodInfo| -> Vec<(AnnotationKind, Option<String>)> {
        read_annotations(m)
            .iter()
            .filter_map(|a| {
                ns.annotation_kind(a)
                    .map(|k| (k, a.string_value().map(str::to_string)))
            })
            .collect()
    };
    let mut out = BTreeMap::new();
    for m in &cf.methods {
        let mref = m.method_ref(&cf.this_class);
        let mut c = MethodContracts::default();
        for (kind, value) in kinds(m) {
            match kind {
                AnnotationKind::Pure => c.is_pure = true,
                AnnotationKind::Predicate => c.is_predicate = true,
                AnnotationKind::Require | AnnotationKind::Ensure => {
                    let ensure = kind == AnnotationKind::Ensure;
                    let name = value.unwrap_or_default();
                    let p = find_predicate(cf, ns, m, &name, ensure, &kinds)
                        .map_err(|e| (mref.clone(), e))?;
                    if ensure {
                        c.ensures.push(p);
                    } else {
                        c.requires.push(p);
                    }
                }
            }
        }
        out.insert(mref, c);
    }
    Ok(out)
}

fn find_predicate(
    cf: &ClassFile,
    _ns: &Namespace,
    m: &MethodInfo,
    name: &str,
    ensure: bool,
    kinds: &dyn Fn(&MethodInfo) -> Vec<(AnnotationKind, Option<String>)>,
) -> Result<MethodRef, SpecError> {
    let candidates: Vec<&MethodInfo> = cf.methods.iter().filter(|p| p.name == name).collect();
    if candidates.is_empty() {
        return Err(SpecError::NoSuchPredicate {
            name: name.to_string(),
        });
    }
    let mut expected: Vec<FieldType> = m.descriptor.params.clone();
    if ensure {
        if let Some(r) = &m.descriptor.ret {
            expected.push(r.clone());
        }
    }
    let found = candidates
        .iter()
        .find(|p| p.descriptor.params == expected && p.is_static() == m.is_static());
    let Some(p) = found else {
        let shown: Vec<String> = expected.iter().map(|t| t.to_string()).collect();
        return Err(SpecError::SignatureMismatch {
            name: name.to_string(),
            expected: format!(
                "{}({})Z",
                if m.is_static() { "static " } else { "instance " },
                shown.join("")
            ),
        });
    };
    if p.descriptor.ret != Some(FieldType::Boolean) {
        return Err(SpecError::PredicateNotBoolean {
            name: name.to_string(),
        });
    }
    if !kinds(p).iter().any(|(k, _)| *k == AnnotationKind::Predicate) {
        return Err(SpecError::NotAPredicate {
            name: name.to_string(),
        });
    }
    Ok(p.method_ref(&cf.this_class))
}
