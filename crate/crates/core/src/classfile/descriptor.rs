// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Field and method descriptors (`I`, `[Ljava/lang/String;`, `([I)I`, ...).

use std::fmt;

use super::ClassFileError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldType {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
    /// Internal (slash-separated) class name.
    Object(String),
    Array(Box<FieldType>),
}

impl FieldType {
    pub fn parse(text: &str) -> Result<FieldType, ClassFileError> {
        let (ty, rest) = parse_field_type(text)?;
        if !rest.is_empty() {
            return Err(ClassFileError::BadDescriptor(text.to_string()));
        }
        Ok(ty)
    }

    pub fn object(name: &str) -> FieldType {
        FieldType::Object(name.replace('.', "/"))
    }

    pub fn array(elem: FieldType) -> FieldType {
        FieldType::Array(Box::new(elem))
    }

    /// Long and double occupy two local/stack slots.
    pub fn is_wide(&self) -> bool {
        matches!(self, FieldType::Long | FieldType::Double)
    }

    pub fn is_reference(&self) -> bool {
        matches!(self, FieldType::Object(_) | FieldType::Array(_))
    }

    pub fn slots(&self) -> u16 {
        if self.is_wide() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Byte => f.write_str("B"),
            FieldType::Char => f.write_str("C"),
            FieldType::Double => f.write_str("D"),
            FieldType::Float => f.write_str("F"),
            FieldType::Int => f.write_str("I"),
            FieldType::Long => f.write_str("J"),
            FieldType::Short => f.write_str("S"),
            FieldType::Boolean => f.write_str("Z"),
            FieldType::Object(name) => write!(f, "L{name};"),
            FieldType::Array(elem) => write!(f, "[{elem}"),
        }
    }
}

fn parse_field_type(text: &str) -> Result<(FieldType, &str), ClassFileError> {
    let bad = || ClassFileError::BadDescriptor(text.to_string());
    let mut chars = text.chars();
    let first = chars.next().ok_or_else(bad)?;
    let rest = chars.as_str();
    let ty = match first {
        'B' => FieldType::Byte,
        'C' => FieldType::Char,
        'D' => FieldType::Double,
        'F' => FieldType::Float,
        'I' => FieldType::Int,
        'J' => FieldType::Long,
        'S' => FieldType::Short,
        'Z' => FieldType::Boolean,
        'L' => {
            let end = rest.find(';').ok_or_else(bad)?;
            if end == 0 {
                return Err(bad());
            }
            return Ok((FieldType::Object(rest[..end].to_string()), &rest[end + 1..]));
        }
        '[' => {
            let (elem, rest) = parse_field_type(rest).map_err(|_| bad())?;
            return Ok((FieldType::Array(Box::new(elem)), rest));
        }
        _ => return Err(bad()),
    };
    Ok((ty, rest))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodDescriptor {
    pub params: Vec<FieldType>,
    /// `None` for `void`.
    pub ret: Option<FieldType>,
}

impl MethodDescriptor {
    pub fn new(params: Vec<FieldType>, ret: Option<FieldType>) -> Self {
        MethodDescriptor { params, ret }
    }

    pub fn parse(text: &str) -> Result<MethodDescriptor, ClassFileError> {
        let bad = || ClassFileError::BadDescriptor(text.to_string());
        let mut rest = text.strip_prefix('(').ok_or_else(bad)?;
        let mut params = Vec::new();
        while !rest.starts_with(')') {
            let (ty, r) = parse_field_type(rest).map_err(|_| bad())?;
            params.push(ty);
            rest = r;
        }
        let rest = &rest[1..];
        let ret = if rest == "V" {
            None
        } else {
            let (ty, r) = parse_field_type(rest).map_err(|_| bad())?;
            if !r.is_empty() {
                return Err(bad());
            }
            Some(ty)
        };
        Ok(MethodDescriptor { params, ret })
    }

    /// Slots taken by the parameters, excluding any receiver.
    pub fn param_slots(&self) -> u16 {
        self.params.iter().map(FieldType::slots).sum()
    }
}

impl fmt::Display for MethodDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for p in &self.params {
            write!(f, "{p}")?;
        }
        f.write_str(")")?;
        match &self.ret {
            Some(t) => write!(f, "{t}"),
            None => f.write_str("V"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_method_descriptors() {
        let d = MethodDescriptor::parse("([I)I").unwrap();
        assert_eq!(d.params, vec![FieldType::array(FieldType::Int)]);
        assert_eq!(d.ret, Some(FieldType::Int));
        let d = MethodDescriptor::parse("(JLjava/lang/Object;Z)V").unwrap();
        assert_eq!(d.param_slots(), 4);
        assert_eq!(d.to_string(), "(JLjava/lang/Object;Z)V");
    }

    #[test]
    fn rejects_malformed_descriptors() {
        for bad in ["", "I)", "(I", "(Q)V", "(L;)V", "([)V", "()II", "(Ljava/lang/Object)V"] {
            assert!(MethodDescriptor::parse(bad).is_err(), "{bad}");
        }
        assert!(FieldType::parse("II").is_err());
    }
}
