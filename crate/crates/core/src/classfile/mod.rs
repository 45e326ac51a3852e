// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! JVM classfile model, parser and builder.
//!
//! [`parse_class`] turns raw bytes into a [`ClassFile`] with every constant
//! pool reference resolved. [`build_class`] goes the other way from a
//! [`ClassPlan`], which lets tests synthesize inputs without a Java compiler.

mod build;
pub mod descriptor;
pub mod insn;
pub mod mutf8;
mod parse;

use thiserror::Error;

pub use build::{build_class, ClassPlan, CodePlan, MethodPlan};
pub use descriptor::{FieldType, MethodDescriptor};
pub use insn::{
    ArithOp, ArrayKind, CmpKind, Cond, Constant, FieldRef, Instruction, InvokeKind, MethodRef,
    Narrow, NumKind, ValueKind,
};
pub use parse::parse_class;

pub const ACC_PUBLIC: u16 = 0x0001;
pub const ACC_PRIVATE: u16 = 0x0002;
pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_FINAL: u16 = 0x0010;
pub const ACC_SUPER: u16 = 0x0020;
pub const ACC_NATIVE: u16 = 0x0100;
pub const ACC_INTERFACE: u16 = 0x0200;
pub const ACC_ABSTRACT: u16 = 0x0400;

pub const MIN_MAJOR_VERSION: u16 = 49;
pub const MAX_MAJOR_VERSION: u16 = 65;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassFileError {
    #[error("bad magic number {0:#010x}")]
    BadMagic(u32),
    #[error("classfile truncated at byte {0}")]
    Truncated(usize),
    #[error("bad constant pool index {0}")]
    BadCpIndex(u16),
    #[error("malformed descriptor `{0}`")]
    BadDescriptor(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed code: {0}")]
    BadCode(String),
    #[error("malformed classfile: {0}")]
    Malformed(String),
    #[error("inconsistent class plan: {0}")]
    PlanInconsistent(String),
}

impl ClassFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassFileError::BadMagic(_) => "E_MAGIC",
            ClassFileError::Truncated(_) => "E_TRUNCATED",
            ClassFileError::BadCpIndex(_) => "E_BAD_CP_INDEX",
            ClassFileError::BadDescriptor(_) => "E_BAD_DESCRIPTOR",
            ClassFileError::Unsupported(_) => "E_UNSUPPORTED",
            ClassFileError::BadCode(_) => "E_BAD_CODE",
            ClassFileError::Malformed(_) => "E_MALFORMED",
            ClassFileError::PlanInconsistent(_) => "E_PLAN_INCONSISTENT",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassFile {
    pub minor_version: u16,
    pub major_version: u16,
    pub access_flags: u16,
    /// Internal (slash-separated) name.
    pub this_class: String,
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldInfo>,
    pub methods: Vec<MethodInfo>,
    pub annotations: Vec<Annotation>,
}

impl ClassFile {
    pub fn method(&self, name: &str) -> Option<&MethodInfo> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn find_method(&self, name: &str, descriptor: &MethodDescriptor) -> Option<&MethodInfo> {
        self.methods
            .iter()
            .find(|m| m.name == name && &m.descriptor == descriptor)
    }

    pub fn find_field(&self, name: &str) -> Option<&FieldInfo> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn is_interface(&self) -> bool {
        self.access_flags & ACC_INTERFACE != 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldInfo {
    pub access_flags: u16,
    pub name: String,
    pub descriptor: FieldType,
    pub annotations: Vec<Annotation>,
}

impl FieldInfo {
    pub fn new(access_flags: u16, name: &str, descriptor: FieldType) -> Self {
        FieldInfo {
            access_flags,
            name: name.to_string(),
            descriptor,
            annotations: Vec::new(),
        }
    }

    pub fn is_static(&self) -> bool {
        self.access_flags & ACC_STATIC != 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodInfo {
    pub access_flags: u16,
    pub name: String,
    pub descriptor: MethodDescriptor,
    pub code: Option<CodeAttribute>,
    pub annotations: Vec<Annotation>,
    /// From the `MethodParameters` attribute, when present.
    pub parameter_names: Vec<String>,
}

impl MethodInfo {
    pub fn is_static(&self) -> bool {
        self.access_flags & ACC_STATIC != 0
    }

    pub fn is_abstract(&self) -> bool {
        self.access_flags & ACC_ABSTRACT != 0
    }

    pub fn is_native(&self) -> bool {
        self.access_flags & ACC_NATIVE != 0
    }

    pub fn is_constructor(&self) -> bool {
        self.name == "<init>"
    }

    pub fn method_ref(&self, owner: &str) -> MethodRef {
        MethodRef::new(owner, &self.name, self.descriptor.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeAttribute {
    pub max_stack: u16,
    pub max_locals: u16,
    /// Instructions keyed by their byte offset, in ascending order.
    pub instructions: Vec<(u32, Instruction)>,
    pub code_length: u32,
    pub exception_table: Vec<ExceptionEntry>,
    pub local_variables: Vec<LocalVariable>,
}

impl CodeAttribute {
    pub fn index_of(&self, offset: u32) -> Option<usize> {
        self.instructions
            .binary_search_by_key(&offset, |(o, _)| *o)
            .ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionEntry {
    pub start: u32,
    pub end: u32,
    pub handler: u32,
    pub catch_type: Option<String>,
}

/// One `LocalVariableTable` row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalVariable {
    pub start: u32,
    pub length: u32,
    pub name: String,
    pub descriptor: String,
    pub index: u16,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    /// Fully-qualified, dot-separated type name.
    pub type_name: String,
    pub elements: Vec<(String, ElementValue)>,
}

impl Annotation {
    pub fn new(type_name: &str) -> Self {
        Annotation {
            type_name: type_name.replace('/', "."),
            elements: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, value: ElementValue) -> Self {
        self.elements.push((name.to_string(), value));
        self
    }

    pub fn element(&self, name: &str) -> Option<&ElementValue> {
        self.elements
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    /// The `value` element as a string, for single-string annotations.
    pub fn string_value(&self) -> Option<&str> {
        match self.element("value") {
            Some(ElementValue::String(s)) => Some(s),
            _ => None,
        }
    }

    pub fn simple_name(&self) -> &str {
        let tail = self.type_name.rsplit('.').next().unwrap_or(&self.type_name);
        tail.rsplit('$').next().unwrap_or(tail)
    }
}

#[derive(Clone, Debug)]
pub enum ElementValue {
    Byte(i8),
    Char(u16),
    Int(i32),
    Short(i16),
    Boolean(bool),
    Long(i64),
    Float(f32),
    Double(f64),
    String(String),
    Enum { type_name: String, const_name: String },
    Class(String),
    Annotation(Annotation),
    Array(Vec<ElementValue>),
}

impl PartialEq for ElementValue {
    fn eq(&self, other: &Self) -> bool {
        use ElementValue::*;
        match (self, other) {
            (Byte(a), Byte(b)) => a == b,
            (Char(a), Char(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Short(a), Short(b)) => a == b,
            (Boolean(a), Boolean(b)) => a == b,
            (Long(a), Long(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Double(a), Double(b)) => a.to_bits() == b.to_bits(),
            (String(a), String(b)) => a == b,
            (
                Enum { type_name: t1, const_name: c1 },
                Enum { type_name: t2, const_name: c2 },
            ) => t1 == t2 && c1 == c2,
            (Class(a), Class(b)) => a == b,
            (Annotation(a), Annotation(b)) => a == b,
            (Array(a), Array(b)) => a == b,
            _ => false,
        }
    }
}

/// Runtime-visible annotations of `m`, in declaration order.
///
/// Repeatable-annotation containers (an annotation whose only element is a
/// `value` array of annotations) are flattened in place, so two `@Ensure`
/// entries come back as two values.
pub fn read_annotations(m: &MethodInfo) -> Vec<Annotation> {
    let mut out = Vec::new();
    for a in &m.annotations {
        match (a.elements.as_slice(), a.element("value")) {
            ([_], Some(ElementValue::Array(items)))
                if !items.is_empty()
                    && items.iter().all(|v| matches!(v, ElementValue::Annotation(_))) =>
            {
                for item in items {
                    if let ElementValue::Annotation(inner) = item {
                        out.push(inner.clone());
                    }
                }
            }
            _ => out.push(a.clone()),
        }
    }
    out
}
