// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lifting from stack bytecode to the expression-tree IR, plus the control
//! flow analyses and reference interpreters that work on it.

pub mod bytecode;
pub mod cfg;
pub mod interp;
mod simulate;
pub mod types;

use thiserror::Error;

pub use cfg::{build_cfg, detect_loops, Cfg, LoopInfo};
pub use interp::{eval_grimp, Heap, Obj, Trap, Value};
pub use simulate::simulate_stack;
pub use types::infer_expected_types;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("unsupported: {feature}")]
    Unsupported { feature: String, offset: Option<u32> },
    #[error("inconsistent operand stack at merge point {offset}")]
    StackMismatch { offset: u32 },
    #[error("irreducible control flow reaching label L{label}")]
    Irreducible { label: u32 },
    #[error("type conflict: {0}")]
    TypeConflict(String),
    #[error("malformed code at offset {offset}: {message}")]
    BadCode { offset: u32, message: String },
}

impl LiftError {
    pub fn code(&self) -> &'static str {
        match self {
            LiftError::Unsupported { .. } => "E_UNSUPPORTED",
            LiftError::StackMismatch { .. } => "E_STACK_MISMATCH",
            LiftError::Irreducible { .. } => "E_IRREDUCIBLE",
            LiftError::TypeConflict(_) => "E_TYPE_CONFLICT",
            LiftError::BadCode { .. } => "E_BAD_CODE",
        }
    }

    pub fn offset(&self) -> Option<u32> {
        match self {
            LiftError::Unsupported { offset, .. } => *offset,
            LiftError::StackMismatch { offset } | LiftError::BadCode { offset, .. } => {
                Some(*offset)
            }
            _ => None,
        }
    }
}

/// Lift a method and reconstruct its expected types.
pub fn lift_method(
    class: &str,
    m: &crate::classfile::MethodInfo,
    ns: &crate::spec::Namespace,
) -> Result<crate::ir::Body, LiftError> {
    let mut body = simulate_stack(class, m, ns)?;
    infer_expected_types(&mut body)?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classfile::{
        build_class, parse_class, ArithOp, ClassPlan, CodePlan, Cond, Constant, Instruction as I,
        MethodPlan, NumKind, ValueKind, ACC_PUBLIC, ACC_STATIC,
    };
    use crate::spec::Namespace;

    fn lift(desc: &str, code: Vec<I>) -> crate::ir::Body {
        let plan = ClassPlan::new("T").method(
            MethodPlan::new(ACC_PUBLIC | ACC_STATIC, "m", desc).code(CodePlan {
                instructions: code,
                ..Default::default()
            }),
        );
        let cf = parse_class(&build_class(&plan).unwrap()).unwrap();
        lift_method("T", cf.method("m").unwrap(), &Namespace::default()).unwrap()
    }

    #[test]
    fn add_lifts_to_a_single_return() {
        let body = lift(
            "(II)I",
            vec![
                I::Load(ValueKind::Int, 0),
                I::Load(ValueKind::Int, 1),
                I::Arith(NumKind::Int, ArithOp::Add),
                I::Return(Some(ValueKind::Int)),
            ],
        );
        assert_eq!(body.stmts.len(), 1);
        assert_eq!(body.to_string().lines().nth(1).unwrap().trim(), "return p0 + p1");
        let mut heap = Heap::default();
        let r = eval_grimp(&body, &[Value::Int(2), Value::Int(3)], &mut heap).unwrap();
        assert_eq!(r, Some(Value::Int(5)));
    }

    #[test]
    fn boolean_merge_is_typed_from_the_return() {
        // return p0 < p1 compiled with branches
        let body = lift(
            "(II)Z",
            vec![
                I::Load(ValueKind::Int, 0),
                I::Load(ValueKind::Int, 1),
                I::IfICmp(Cond::Ge, 5),
                I::Const(Constant::Int(1)),
                I::Goto(6),
                I::Const(Constant::Int(0)),
                I::Return(Some(ValueKind::Int)),
            ],
        );
        let merge = body
            .locals
            .iter()
            .find(|l| l.role == crate::ir::Role::Temp)
            .unwrap();
        assert_eq!(merge.ty, crate::ir::Type::Bool);
        let cfg = build_cfg(&body);
        assert!(detect_loops(&body, &cfg).unwrap().is_empty());
    }
}
