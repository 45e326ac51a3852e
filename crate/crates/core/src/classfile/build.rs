// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

use indexmap::IndexSet;

use super::descriptor::{FieldType, MethodDescriptor};
use super::insn::*;
use super::{
    mutf8, Annotation, ClassFile, ClassFileError, CodeAttribute, ElementValue, ExceptionEntry,
    FieldInfo, LocalVariable, MethodInfo, ACC_ABSTRACT, ACC_NATIVE, ACC_PUBLIC, ACC_STATIC,
    ACC_SUPER,
};

type Result<T> = std::result::Result<T, ClassFileError>;

/// Declarative description of a class to synthesize.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPlan {
    pub minor_version: u16,
    pub major_version: u16,
    pub access_flags: u16,
    pub name: String,
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldInfo>,
    pub methods: Vec<MethodPlan>,
    pub annotations: Vec<Annotation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodPlan {
    pub access_flags: u16,
    pub name: String,
    pub descriptor: MethodDescriptor,
    pub annotations: Vec<Annotation>,
    pub parameter_names: Vec<String>,
    pub code: Option<CodePlan>,
}

/// Method body with branch targets, exception ranges and local-variable
/// ranges expressed as instruction indices rather than byte offsets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CodePlan {
    pub instructions: Vec<Instruction>,
    pub exception_table: Vec<ExceptionEntry>,
    pub local_variables: Vec<LocalVariable>,
}

impl ClassPlan {
    /// A public class extending `java/lang/Object`, classfile version 52 (Java 8).
    pub fn new(name: &str) -> Self {
        ClassPlan {
            minor_version: 0,
            major_version: 52,
            access_flags: ACC_PUBLIC | ACC_SUPER,
            name: name.replace('.', "/"),
            super_class: Some("java/lang/Object".into()),
            interfaces: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
            annotations: Vec::new(),
        }
    }

    pub fn version(mut self, major: u16) -> Self {
        self.major_version = major;
        self
    }

    pub fn field(mut self, f: FieldInfo) -> Self {
        self.fields.push(f);
        self
    }

    pub fn method(mut self, m: MethodPlan) -> Self {
        self.methods.push(m);
        self
    }

    /// The [`ClassFile`] that `parse_class(build_class(self))` must produce.
    pub fn normal_form(&self) -> Result<ClassFile> {
        Ok(Builder::new(self).run()?.1)
    }
}

impl MethodPlan {
    pub fn new(access_flags: u16, name: &str, descriptor: &str) -> Self {
        MethodPlan {
            access_flags,
            name: name.to_string(),
            descriptor: MethodDescriptor::parse(descriptor).expect("valid method descriptor"),
            annotations: Vec::new(),
            parameter_names: Vec::new(),
            code: None,
        }
    }

    pub fn annotate(mut self, a: Annotation) -> Self {
        self.annotations.push(a);
        self
    }

    pub fn params(mut self, names: &[&str]) -> Self {
        self.parameter_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn code(mut self, code: CodePlan) -> Self {
        self.code = Some(code);
        self
    }

    pub fn is_static(&self) -> bool {
        self.access_flags & ACC_STATIC != 0
    }
}

/// Serialize a plan into classfile bytes.
pub fn build_class(plan: &ClassPlan) -> Result<Vec<u8>> {
    Ok(Builder::new(plan).run()?.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CpKey {
    Utf8(String),
    Int(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(u16),
    String(u16),
    FieldRef(u16, u16),
    MethodRef(u16, u16),
    InterfaceMethodRef(u16, u16),
    NameAndType(u16, u16),
    InvokeDynamic(u16, u16),
}

#[derive(Default)]
struct Pool {
    entries: IndexSet<CpKey>,
    /// Slot index of each entry (8-byte constants take two).
    slots: Vec<u16>,
    next: u16,
}

impl Pool {
    fn intern(&mut self, key: CpKey) -> Result<u16> {
        if let Some(i) = self.entries.get_index_of(&key) {
            return Ok(self.slots[i]);
        }
        if self.next == 0 {
            self.next = 1;
        }
        let slot = self.next;
        let width = if matches!(key, CpKey::Long(_) | CpKey::Double(_)) { 2 } else { 1 };
        self.next = self
            .next
            .checked_add(width)
            .ok_or_else(|| ClassFileError::PlanInconsistent("constant pool overflow".into()))?;
        self.entries.insert(key);
        self.slots.push(slot);
        Ok(slot)
    }

    fn utf8(&mut self, s: &str) -> Result<u16> {
        if mutf8::encode(s).len() > u16::MAX as usize {
            return Err(ClassFileError::PlanInconsistent("string constant too long".into()));
        }
        self.intern(CpKey::Utf8(s.to_string()))
    }

    fn class(&mut self, name: &str) -> Result<u16> {
        let n = self.utf8(name)?;
        self.intern(CpKey::Class(n))
    }

    fn name_and_type(&mut self, name: &str, desc: &str) -> Result<u16> {
        let n = self.utf8(name)?;
        let d = self.utf8(desc)?;
        self.intern(CpKey::NameAndType(n, d))
    }

    fn field_ref(&mut self, f: &FieldRef) -> Result<u16> {
        let c = self.class(&f.owner)?;
        let nt = self.name_and_type(&f.name, &f.descriptor.to_string())?;
        self.intern(CpKey::FieldRef(c, nt))
    }

    fn method_ref(&mut self, m: &MethodRef, interface: bool) -> Result<u16> {
        let c = self.class(&m.owner)?;
        let nt = self.name_and_type(&m.name, &m.descriptor.to_string())?;
        self.intern(if interface {
            CpKey::InterfaceMethodRef(c, nt)
        } else {
            CpKey::MethodRef(c, nt)
        })
    }

    fn constant(&mut self, c: &Constant) -> Result<u16> {
        match c {
            Constant::Int(v) => self.intern(CpKey::Int(*v)),
            Constant::Float(v) => self.intern(CpKey::Float(v.to_bits())),
            Constant::Long(v) => self.intern(CpKey::Long(*v)),
            Constant::Double(v) => self.intern(CpKey::Double(v.to_bits())),
            Constant::String(s) => {
                let u = self.utf8(s)?;
                self.intern(CpKey::String(u))
            }
            Constant::Class(n) => self.class(n),
            Constant::Null => Err(ClassFileError::PlanInconsistent("null has no pool entry".into())),
        }
    }

    fn write(&self, out: &mut Vec<u8>) {
        put_u2(out, self.next.max(1));
        for key in &self.entries {
            match key {
                CpKey::Utf8(s) => {
                    let b = mutf8::encode(s);
                    out.push(1);
                    put_u2(out, b.len() as u16);
                    out.extend(b);
                }
                CpKey::Int(v) => {
                    out.push(3);
                    out.extend(v.to_be_bytes());
                }
                CpKey::Float(v) => {
                    out.push(4);
                    out.extend(v.to_be_bytes());
                }
                CpKey::Long(v) => {
                    out.push(5);
                    out.extend(v.to_be_bytes());
                }
                CpKey::Double(v) => {
                    out.push(6);
                    out.extend(v.to_be_bytes());
                }
                CpKey::Class(n) => {
                    out.push(7);
                    put_u2(out, *n);
                }
                CpKey::String(n) => {
                    out.push(8);
                    put_u2(out, *n);
                }
                CpKey::FieldRef(a, b)
                | CpKey::MethodRef(a, b)
                | CpKey::InterfaceMethodRef(a, b)
                | CpKey::NameAndType(a, b)
                | CpKey::InvokeDynamic(a, b) => {
                    out.push(match key {
                        CpKey::FieldRef(..) => 9,
                        CpKey::MethodRef(..) => 10,
                        CpKey::InterfaceMethodRef(..) => 11,
                        CpKey::NameAndType(..) => 12,
                        _ => 18,
                    });
                    put_u2(out, *a);
                    put_u2(out, *b);
                }
            }
        }
    }
}

fn put_u2(out: &mut Vec<u8>, v: u16) {
    out.extend(v.to_be_bytes());
}

fn put_u4(out: &mut Vec<u8>, v: u32) {
    out.extend(v.to_be_bytes());
}

fn class_operand(t: &FieldType) -> String {
    match t {
        FieldType::Object(n) => n.clone(),
        other => other.to_string(),
    }
}

fn newarray_code(t: &FieldType) -> Option<u8> {
    Some(match t {
        FieldType::Boolean => 4,
        FieldType::Char => 5,
        FieldType::Float => 6,
        FieldType::Double => 7,
        FieldType::Byte => 8,
        FieldType::Short => 9,
        FieldType::Int => 10,
        FieldType::Long => 11,
        _ => return None,
    })
}

fn kind_index(k: ValueKind) -> u8 {
    match k {
        ValueKind::Int => 0,
        ValueKind::Long => 1,
        ValueKind::Float => 2,
        ValueKind::Double => 3,
        ValueKind::Ref => 4,
    }
}

fn array_index(k: ArrayKind) -> u8 {
    match k {
        ArrayKind::Int => 0,
        ArrayKind::Long => 1,
        ArrayKind::Float => 2,
        ArrayKind::Double => 3,
        ArrayKind::Ref => 4,
        ArrayKind::Byte => 5,
        ArrayKind::Char => 6,
        ArrayKind::Short => 7,
    }
}

struct Builder<'p> {
    plan: &'p ClassPlan,
    pool: Pool,
}

/// Resolved operands for one instruction, gathered before layout so that
/// `ldc` vs `ldc_w` is known.
#[derive(Clone, Copy, Default)]
struct Operand {
    cp: u16,
}

impl<'p> Builder<'p> {
    fn new(plan: &'p ClassPlan) -> Self {
        Builder {
            plan,
            pool: Pool::default(),
        }
    }

    fn run(mut self) -> Result<(Vec<u8>, ClassFile)> {
        let plan = self.plan;
        let this_idx = self.pool.class(&plan.name)?;
        let super_idx = match &plan.super_class {
            Some(s) => self.pool.class(s)?,
            None => 0,
        };
        let mut iface_idx = Vec::new();
        for i in &plan.interfaces {
            iface_idx.push(self.pool.class(i)?);
        }

        let mut body = Vec::new();
        put_u2(&mut body, plan.access_flags);
        put_u2(&mut body, this_idx);
        put_u2(&mut body, super_idx);
        put_u2(&mut body, iface_idx.len() as u16);
        for i in iface_idx {
            put_u2(&mut body, i);
        }

        put_u2(&mut body, plan.fields.len() as u16);
        for f in &plan.fields {
            put_u2(&mut body, f.access_flags);
            put_u2(&mut body, self.pool.utf8(&f.name)?);
            put_u2(&mut body, self.pool.utf8(&f.descriptor.to_string())?);
            let attrs = self.annotation_attrs(&f.annotations)?;
            body.extend(attrs);
        }

        let mut methods = Vec::new();
        put_u2(&mut body, plan.methods.len() as u16);
        for m in &plan.methods {
            methods.push(self.method(m, &mut body)?);
        }

        let attrs = self.annotation_attrs(&plan.annotations)?;
        body.extend(attrs);

        let mut out = Vec::new();
        put_u4(&mut out, 0xCAFE_BABE);
        put_u2(&mut out, plan.minor_version);
        put_u2(&mut out, plan.major_version);
        self.pool.write(&mut out);
        out.extend(body);

        let cf = ClassFile {
            minor_version: plan.minor_version,
            major_version: plan.major_version,
            access_flags: plan.access_flags,
            this_class: plan.name.clone(),
            super_class: plan.super_class.clone(),
            interfaces: plan.interfaces.clone(),
            fields: plan.fields.clone(),
            methods,
            annotations: plan.annotations.clone(),
        };
        Ok((out, cf))
    }

    fn annotation_attrs(&mut self, annotations: &[Annotation]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        if annotations.is_empty() {
            put_u2(&mut out, 0);
            return Ok(out);
        }
        put_u2(&mut out, 1);
        let mut a = Vec::new();
        put_u2(&mut a, annotations.len() as u16);
        for ann in annotations {
            self.annotation(ann, &mut a)?;
        }
        put_u2(&mut out, self.pool.utf8("RuntimeVisibleAnnotations")?);
        put_u4(&mut out, a.len() as u32);
        out.extend(a);
        Ok(out)
    }

    fn annotation(&mut self, ann: &Annotation, out: &mut Vec<u8>) -> Result<()> {
        let desc = format!("L{};", ann.type_name.replace('.', "/"));
        put_u2(out, self.pool.utf8(&desc)?);
        put_u2(out, ann.elements.len() as u16);
        for (name, value) in &ann.elements {
            put_u2(out, self.pool.utf8(name)?);
            self.element_value(value, out)?;
        }
        Ok(())
    }

    fn element_value(&mut self, v: &ElementValue, out: &mut Vec<u8>) -> Result<()> {
        let (tag, idx) = match v {
            ElementValue::Byte(x) => (b'B', self.pool.intern(CpKey::Int(*x as i32))?),
            ElementValue::Char(x) => (b'C', self.pool.intern(CpKey::Int(*x as i32))?),
            ElementValue::Int(x) => (b'I', self.pool.intern(CpKey::Int(*x))?),
            ElementValue::Short(x) => (b'S', self.pool.intern(CpKey::Int(*x as i32))?),
            ElementValue::Boolean(x) => (b'Z', self.pool.intern(CpKey::Int(*x as i32))?),
            ElementValue::Long(x) => (b'J', self.pool.intern(CpKey::Long(*x))?),
            ElementValue::Float(x) => (b'F', self.pool.intern(CpKey::Float(x.to_bits()))?),
            ElementValue::Double(x) => (b'D', self.pool.intern(CpKey::Double(x.to_bits()))?),
            ElementValue::String(s) => (b's', self.pool.utf8(s)?),
            ElementValue::Class(s) => (b'c', self.pool.utf8(s)?),
            ElementValue::Enum {
                type_name,
                const_name,
            } => {
                out.push(b'e');
                put_u2(out, self.pool.utf8(type_name)?);
                put_u2(out, self.pool.utf8(const_name)?);
                return Ok(());
            }
            ElementValue::Annotation(a) => {
                out.push(b'@');
                return self.annotation(a, out);
            }
            ElementValue::Array(items) => {
                out.push(b'[');
                put_u2(out, items.len() as u16);
                for i in items {
                    self.element_value(i, out)?;
                }
                return Ok(());
            }
        };
        out.push(tag);
        put_u2(out, idx);
        Ok(())
    }

    fn method(&mut self, m: &MethodPlan, out: &mut Vec<u8>) -> Result<MethodInfo> {
        let bodiless = m.access_flags & (ACC_ABSTRACT | ACC_NATIVE) != 0;
        if bodiless == m.code.is_some() {
            return Err(ClassFileError::PlanInconsistent(format!(
                "method {}: abstract/native methods have no code, all others do",
                m.name
            )));
        }
        put_u2(out, m.access_flags);
        put_u2(out, self.pool.utf8(&m.name)?);
        put_u2(out, self.pool.utf8(&m.descriptor.to_string())?);

        let mut attrs: Vec<Vec<u8>> = Vec::new();
        let mut code_attr = None;
        if let Some(code) = &m.code {
            let (bytes, attr) = self.code(m, code)?;
            attrs.push(bytes);
            code_attr = Some(attr);
        }
        if !m.annotations.is_empty() {
            let mut a = Vec::new();
            put_u2(&mut a, m.annotations.len() as u16);
            for ann in &m.annotations {
                self.annotation(ann, &mut a)?;
            }
            let mut attr = Vec::new();
            put_u2(&mut attr, self.pool.utf8("RuntimeVisibleAnnotations")?);
            put_u4(&mut attr, a.len() as u32);
            attr.extend(a);
            attrs.push(attr);
        }
        if !m.parameter_names.is_empty() {
            let mut attr = Vec::new();
            put_u2(&mut attr, self.pool.utf8("MethodParameters")?);
            put_u4(&mut attr, 1 + 4 * m.parameter_names.len() as u32);
            attr.push(m.parameter_names.len() as u8);
            for n in &m.parameter_names {
                let idx = if n.is_empty() { 0 } else { self.pool.utf8(n)? };
                put_u2(&mut attr, idx);
                put_u2(&mut attr, 0);
            }
            attrs.push(attr);
        }
        put_u2(out, attrs.len() as u16);
        for a in attrs {
            out.extend(a);
        }
        Ok(MethodInfo {
            access_flags: m.access_flags,
            name: m.name.clone(),
            descriptor: m.descriptor.clone(),
            code: code_attr,
            annotations: m.annotations.clone(),
            parameter_names: m.parameter_names.clone(),
        })
    }

    fn resolve_operands(&mut self, insns: &[Instruction]) -> Result<Vec<Operand>> {
        let mut ops = Vec::with_capacity(insns.len());
        for insn in insns {
            use Instruction as I;
            let cp = match insn {
                I::Const(c) if needs_ldc(c) => self.pool.constant(c)?,
                I::GetStatic(f) | I::PutStatic(f) | I::GetField(f) | I::PutField(f) => {
                    self.pool.field_ref(f)?
                }
                I::Invoke {
                    kind,
                    method,
                    interface,
                } => {
                    if *kind == InvokeKind::Interface && !interface {
                        return Err(ClassFileError::PlanInconsistent(
                            "invokeinterface needs an interface method reference".into(),
                        ));
                    }
                    self.pool.method_ref(method, *interface)?
                }
                I::InvokeDynamic { name, descriptor } => {
                    let nt = self.pool.name_and_type(name, &descriptor.to_string())?;
                    self.pool.intern(CpKey::InvokeDynamic(0, nt))?
                }
                I::New(c) | I::CheckCast(c) | I::InstanceOf(c) => self.pool.class(c)?,
                I::NewArray(t) if newarray_code(t).is_none() => self.pool.class(&class_operand(t))?,
                I::MultiANewArray(t, _) => self.pool.class(&class_operand(t))?,
                _ => 0,
            };
            ops.push(Operand { cp });
        }
        Ok(ops)
    }

    fn code(&mut self, m: &MethodPlan, plan: &CodePlan) -> Result<(Vec<u8>, CodeAttribute)> {
        let insns = &plan.instructions;
        let n = insns.len();
        if n == 0 {
            return Err(ClassFileError::PlanInconsistent(format!("method {} has empty code", m.name)));
        }
        for (i, insn) in insns.iter().enumerate() {
            for t in insn.targets() {
                if t as usize >= n {
                    return Err(ClassFileError::PlanInconsistent(format!(
                        "instruction {i} ({}) branches to nonexistent instruction {t}",
                        insn.mnemonic()
                    )));
                }
            }
        }
        let mut insns: Vec<Instruction> = insns.clone();
        for insn in insns.iter_mut() {
            if let Instruction::LookupSwitch { pairs, .. } = insn {
                pairs.sort_by_key(|(k, _)| *k);
                if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(ClassFileError::PlanInconsistent("duplicate lookupswitch key".into()));
                }
            }
        }
        let max_stack = check_stack(m, &insns, &plan.exception_table)?;
        let mut max_locals = m.descriptor.param_slots() + u16::from(!m.is_static());
        for insn in &insns {
            max_locals = max_locals.max(insn.locals_touched());
        }

        let ops = self.resolve_operands(&insns)?;

        // Layout: grow gotos to goto_w until offsets are stable.
        let mut wide_goto = vec![false; n];
        let offsets = loop {
            let mut offsets = Vec::with_capacity(n + 1);
            let mut pc = 0u32;
            for (i, insn) in insns.iter().enumerate() {
                offsets.push(pc);
                pc += encoded_len(insn, pc, ops[i], wide_goto[i]);
            }
            offsets.push(pc);
            let mut changed = false;
            for (i, insn) in insns.iter().enumerate() {
                if let Instruction::Goto(t) = insn {
                    let d = offsets[*t as usize] as i64 - offsets[i] as i64;
                    if !wide_goto[i] && i16::try_from(d).is_err() {
                        wide_goto[i] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break offsets;
            }
        };
        let code_length = offsets[n];
        if code_length > 65535 {
            return Err(ClassFileError::PlanInconsistent("code too long".into()));
        }

        let mut code = Vec::with_capacity(code_length as usize);
        let mut parsed = Vec::with_capacity(n);
        for (i, insn) in insns.iter().enumerate() {
            let at = offsets[i];
            debug_assert_eq!(code.len() as u32, at);
            let mut resolved = insn.clone();
            resolved.map_targets(|t| offsets[t as usize]);
            encode(&resolved, at, ops[i], wide_goto[i], &mut code)?;
            parsed.push((at, resolved));
        }

        let off = |i: u32| -> Result<u32> {
            offsets
                .get(i as usize)
                .copied()
                .ok_or_else(|| ClassFileError::PlanInconsistent(format!("range end {i} past code")))
        };
        let mut exception_table = Vec::new();
        for e in &plan.exception_table {
            if e.start as usize >= n || e.handler as usize >= n || e.end as usize > n || e.end <= e.start {
                return Err(ClassFileError::PlanInconsistent("bad exception range".into()));
            }
            exception_table.push(ExceptionEntry {
                start: off(e.start)?,
                end: off(e.end)?,
                handler: off(e.handler)?,
                catch_type: e.catch_type.clone(),
            });
        }
        let mut local_variables = Vec::new();
        for lv in &plan.local_variables {
            let start = off(lv.start)?;
            let end = off(lv.start + lv.length)?;
            local_variables.push(LocalVariable {
                start,
                length: end - start,
                name: lv.name.clone(),
                descriptor: lv.descriptor.clone(),
                index: lv.index,
            });
        }

        let mut body = Vec::new();
        put_u2(&mut body, max_stack);
        put_u2(&mut body, max_locals);
        put_u4(&mut body, code_length);
        body.extend(&code);
        put_u2(&mut body, exception_table.len() as u16);
        for e in &exception_table {
            put_u2(&mut body, e.start as u16);
            put_u2(&mut body, e.end as u16);
            put_u2(&mut body, e.handler as u16);
            let ct = match &e.catch_type {
                Some(c) => self.pool.class(c)?,
                None => 0,
            };
            put_u2(&mut body, ct);
        }
        if local_variables.is_empty() {
            put_u2(&mut body, 0);
        } else {
            put_u2(&mut body, 1);
            let mut t = Vec::new();
            put_u2(&mut t, local_variables.len() as u16);
            for lv in &local_variables {
                put_u2(&mut t, lv.start as u16);
                put_u2(&mut t, lv.length as u16);
                put_u2(&mut t, self.pool.utf8(&lv.name)?);
                put_u2(&mut t, self.pool.utf8(&lv.descriptor)?);
                put_u2(&mut t, lv.index);
            }
            put_u2(&mut body, self.pool.utf8("LocalVariableTable")?);
            put_u4(&mut body, t.len() as u32);
            body.extend(t);
        }

        let mut attr = Vec::new();
        put_u2(&mut attr, self.pool.utf8("Code")?);
        put_u4(&mut attr, body.len() as u32);
        attr.extend(body);

        Ok((
            attr,
            CodeAttribute {
                max_stack,
                max_locals,
                instructions: parsed,
                code_length,
                exception_table,
                local_variables,
            },
        ))
    }
}

fn needs_ldc(c: &Constant) -> bool {
    match c {
        Constant::Null => false,
        Constant::Int(v) => i16::try_from(*v).is_err(),
        Constant::Long(v) => !(0..=1).contains(v),
        Constant::Float(v) => ![0.0f32, 1.0, 2.0].iter().any(|k| k.to_bits() == v.to_bits()),
        Constant::Double(v) => ![0.0f64, 1.0].iter().any(|k| k.to_bits() == v.to_bits()),
        Constant::String(_) | Constant::Class(_) => true,
    }
}

fn switch_pad(pc: u32) -> u32 {
    (4 - (pc + 1) % 4) % 4
}

fn encoded_len(insn: &Instruction, pc: u32, op: Operand, wide_goto: bool) -> u32 {
    use Instruction as I;
    match insn {
        I::Const(c) => match c {
            Constant::Int(v) if (-1..=5).contains(v) => 1,
            Constant::Int(v) if i8::try_from(*v).is_ok() => 2,
            Constant::Int(v) if i16::try_from(*v).is_ok() => 3,
            Constant::Long(_) | Constant::Double(_) if needs_ldc(c) => 3,
            c if needs_ldc(c) => {
                if op.cp < 256 {
                    2
                } else {
                    3
                }
            }
            _ => 1,
        },
        I::Load(_, i) | I::Store(_, i) => match i {
            0..=3 => 1,
            4..=255 => 2,
            _ => 4,
        },
        I::Iinc(i, d) => {
            if *i <= 255 && i8::try_from(*d).is_ok() {
                3
            } else {
                6
            }
        }
        I::If(..) | I::IfICmp(..) | I::IfACmp(..) | I::IfNull(_) | I::IfNonNull(_) => 3,
        I::Goto(_) => {
            if wide_goto {
                5
            } else {
                3
            }
        }
        I::TableSwitch { targets, .. } => 1 + switch_pad(pc) + 12 + 4 * targets.len() as u32,
        I::LookupSwitch { pairs, .. } => 1 + switch_pad(pc) + 8 + 8 * pairs.len() as u32,
        I::GetStatic(_) | I::PutStatic(_) | I::GetField(_) | I::PutField(_) => 3,
        I::Invoke { kind, .. } => {
            if *kind == InvokeKind::Interface {
                5
            } else {
                3
            }
        }
        I::InvokeDynamic { .. } => 5,
        I::New(_) | I::CheckCast(_) | I::InstanceOf(_) => 3,
        I::NewArray(t) => {
            if newarray_code(t).is_some() {
                2
            } else {
                3
            }
        }
        I::MultiANewArray(..) => 4,
        _ => 1,
    }
}

fn rel16(at: u32, target: u32) -> Result<[u8; 2]> {
    let d = target as i64 - at as i64;
    i16::try_from(d)
        .map(|d| d.to_be_bytes())
        .map_err(|_| ClassFileError::PlanInconsistent(format!("branch at {at} too far for a 16-bit offset")))
}

fn encode(insn: &Instruction, at: u32, op: Operand, wide_goto: bool, out: &mut Vec<u8>) -> Result<()> {
    use Instruction as I;
    let rel32 = |t: u32| ((t as i64 - at as i64) as i32).to_be_bytes();
    match insn {
        I::Nop => out.push(0),
        I::Const(c) => match c {
            Constant::Null => out.push(1),
            Constant::Int(v) if (-1..=5).contains(v) => out.push((v + 3) as u8),
            Constant::Int(v) if i8::try_from(*v).is_ok() => {
                out.push(16);
                out.push(*v as i8 as u8);
            }
            Constant::Int(v) if i16::try_from(*v).is_ok() => {
                out.push(17);
                out.extend((*v as i16).to_be_bytes());
            }
            Constant::Long(v) if !needs_ldc(c) => out.push(9 + *v as u8),
            Constant::Float(v) if !needs_ldc(c) => out.push(11 + *v as u8),
            Constant::Double(v) if !needs_ldc(c) => out.push(14 + *v as u8),
            Constant::Long(_) | Constant::Double(_) => {
                out.push(20);
                put_u2(out, op.cp);
            }
            _ => {
                if op.cp < 256 {
                    out.push(18);
                    out.push(op.cp as u8);
                } else {
                    out.push(19);
                    put_u2(out, op.cp);
                }
            }
        },
        I::Load(k, i) | I::Store(k, i) => {
            let (short_base, long_op) = match insn {
                I::Load(..) => (26, 21),
                _ => (59, 54),
            };
            let ki = kind_index(*k);
            match i {
                0..=3 => out.push(short_base + 4 * ki + *i as u8),
                4..=255 => {
                    out.push(long_op + ki);
                    out.push(*i as u8);
                }
                _ => {
                    out.push(196);
                    out.push(long_op + ki);
                    put_u2(out, *i);
                }
            }
        }
        I::ArrayLoad(k) => out.push(46 + array_index(*k)),
        I::ArrayStore(k) => out.push(79 + array_index(*k)),
        I::Pop => out.push(87),
        I::Pop2 => out.push(88),
        I::Dup => out.push(89),
        I::DupX1 => out.push(90),
        I::DupX2 => out.push(91),
        I::Dup2 => out.push(92),
        I::Dup2X1 => out.push(93),
        I::Dup2X2 => out.push(94),
        I::Swap => out.push(95),
        I::Arith(k, o) => {
            let ki = k.index();
            let code = match o {
                ArithOp::Add => 96 + ki,
                ArithOp::Sub => 100 + ki,
                ArithOp::Mul => 104 + ki,
                ArithOp::Div => 108 + ki,
                ArithOp::Rem => 112 + ki,
                ArithOp::Neg => 116 + ki,
                _ => {
                    if ki > 1 {
                        return Err(ClassFileError::PlanInconsistent(format!(
                            "{} on a floating-point kind",
                            insn.mnemonic()
                        )));
                    }
                    let base = match o {
                        ArithOp::Shl => 120,
                        ArithOp::Shr => 122,
                        ArithOp::Ushr => 124,
                        ArithOp::And => 126,
                        ArithOp::Or => 128,
                        _ => 130,
                    };
                    base + ki
                }
            };
            out.push(code);
        }
        I::Iinc(i, d) => {
            if *i <= 255 && i8::try_from(*d).is_ok() {
                out.push(132);
                out.push(*i as u8);
                out.push(*d as i8 as u8);
            } else {
                out.push(196);
                out.push(132);
                put_u2(out, *i);
                out.extend(d.to_be_bytes());
            }
        }
        I::Convert(a, b) => {
            if a == b {
                return Err(ClassFileError::PlanInconsistent("conversion to the same kind".into()));
            }
            let from = a.index();
            let to = b.index();
            let slot = if to > from { to - 1 } else { to };
            out.push(133 + 3 * from + slot);
        }
        I::Narrow(n) => out.push(match n {
            Narrow::Byte => 145,
            Narrow::Char => 146,
            Narrow::Short => 147,
        }),
        I::Compare(c) => out.push(match c {
            CmpKind::Lcmp => 148,
            CmpKind::Fcmpl => 149,
            CmpKind::Fcmpg => 150,
            CmpKind::Dcmpl => 151,
            CmpKind::Dcmpg => 152,
        }),
        I::If(c, t) => {
            out.push(153 + c.index());
            out.extend(rel16(at, *t)?);
        }
        I::IfICmp(c, t) => {
            out.push(159 + c.index());
            out.extend(rel16(at, *t)?);
        }
        I::IfACmp(c, t) => {
            out.push(match c {
                Cond::Eq => 165,
                Cond::Ne => 166,
                _ => {
                    return Err(ClassFileError::PlanInconsistent(
                        "if_acmp supports only eq/ne".into(),
                    ))
                }
            });
            out.extend(rel16(at, *t)?);
        }
        I::IfNull(t) => {
            out.push(198);
            out.extend(rel16(at, *t)?);
        }
        I::IfNonNull(t) => {
            out.push(199);
            out.extend(rel16(at, *t)?);
        }
        I::Goto(t) => {
            if wide_goto {
                out.push(200);
                out.extend(rel32(*t));
            } else {
                out.push(167);
                out.extend(rel16(at, *t)?);
            }
        }
        I::TableSwitch {
            default,
            low,
            targets,
        } => {
            out.push(170);
            out.extend(std::iter::repeat_n(0, switch_pad(at) as usize));
            out.extend(rel32(*default));
            out.extend(low.to_be_bytes());
            let high = *low as i64 + targets.len() as i64 - 1;
            let high = i32::try_from(high)
                .map_err(|_| ClassFileError::PlanInconsistent("tableswitch range overflow".into()))?;
            if targets.is_empty() {
                return Err(ClassFileError::PlanInconsistent("empty tableswitch".into()));
            }
            out.extend(high.to_be_bytes());
            for t in targets {
                out.extend(rel32(*t));
            }
        }
        I::LookupSwitch { default, pairs } => {
            out.push(171);
            out.extend(std::iter::repeat_n(0, switch_pad(at) as usize));
            out.extend(rel32(*default));
            out.extend((pairs.len() as i32).to_be_bytes());
            for (k, t) in pairs {
                out.extend(k.to_be_bytes());
                out.extend(rel32(*t));
            }
        }
        I::Return(k) => out.push(match k {
            Some(k) => 172 + kind_index(*k),
            None => 177,
        }),
        I::GetStatic(_) | I::PutStatic(_) | I::GetField(_) | I::PutField(_) => {
            out.push(match insn {
                I::GetStatic(_) => 178,
                I::PutStatic(_) => 179,
                I::GetField(_) => 180,
                _ => 181,
            });
            put_u2(out, op.cp);
        }
        I::Invoke { kind, method, .. } => {
            out.push(match kind {
                InvokeKind::Virtual => 182,
                InvokeKind::Special => 183,
                InvokeKind::Static => 184,
                InvokeKind::Interface => 185,
            });
            put_u2(out, op.cp);
            if *kind == InvokeKind::Interface {
                let count = 1 + method.descriptor.param_slots();
                out.push(count as u8);
                out.push(0);
            }
        }
        I::InvokeDynamic { .. } => {
            out.push(186);
            put_u2(out, op.cp);
            put_u2(out, 0);
        }
        I::New(_) => {
            out.push(187);
            put_u2(out, op.cp);
        }
        I::NewArray(t) => match newarray_code(t) {
            Some(code) => {
                out.push(188);
                out.push(code);
            }
            None => {
                out.push(189);
                put_u2(out, op.cp);
            }
        },
        I::MultiANewArray(_, dims) => {
            if *dims == 0 {
                return Err(ClassFileError::PlanInconsistent("multianewarray with zero dimensions".into()));
            }
            out.push(197);
            put_u2(out, op.cp);
            out.push(*dims);
        }
        I::ArrayLength => out.push(190),
        I::AThrow => out.push(191),
        I::CheckCast(_) => {
            out.push(192);
            put_u2(out, op.cp);
        }
        I::InstanceOf(_) => {
            out.push(193);
            put_u2(out, op.cp);
        }
        I::MonitorEnter => out.push(194),
        I::MonitorExit => out.push(195),
    }
    Ok(())
}

/// Check stack discipline over all paths and return the maximum depth in slots.
fn check_stack(m: &MethodPlan, insns: &[Instruction], handlers: &[ExceptionEntry]) -> Result<u16> {
    let n = insns.len();
    let mut depth: Vec<Option<u16>> = vec![None; n];
    let mut work = vec![(0usize, 0u16)];
    for h in handlers {
        if (h.handler as usize) < n {
            work.push((h.handler as usize, 1));
        }
    }
    let mut max = 0u16;
    let err = |i: usize, what: String| {
        ClassFileError::PlanInconsistent(format!("method {}, instruction {i}: {what}", m.name))
    };
    while let Some((i, d)) = work.pop() {
        if i >= n {
            return Err(err(i, "control falls off the end of the code".into()));
        }
        match depth[i] {
            Some(prev) if prev == d => continue,
            Some(prev) => {
                return Err(err(i, format!("stack depth {d} disagrees with {prev} at a merge point")))
            }
            None => depth[i] = Some(d),
        }
        let (pop, push) = insns[i].stack_effect();
        if d < pop {
            return Err(err(i, format!("{} underflows the stack", insns[i].mnemonic())));
        }
        let after = d - pop + push;
        max = max.max(after).max(d);
        for t in insns[i].targets() {
            work.push((t as usize, after));
        }
        if !insns[i].is_terminal() {
            work.push((i + 1, after));
        }
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::super::parse_class;
    use super::*;

    #[test]
    fn empty_class_round_trips() {
        let plan = ClassPlan::new("A");
        let bytes = build_class(&plan).unwrap();
        let cf = parse_class(&bytes).unwrap();
        assert_eq!(cf.this_class, "A");
        assert!(cf.methods.is_empty());
        assert_eq!(cf, plan.normal_form().unwrap());
    }

    #[test]
    fn branch_to_nonexistent_instruction() {
        let plan = ClassPlan::new("A").method(
            MethodPlan::new(ACC_STATIC, "f", "()V").code(CodePlan {
                instructions: vec![Instruction::Goto(7), Instruction::Return(None)],
                ..Default::default()
            }),
        );
        assert_eq!(build_class(&plan).unwrap_err().code(), "E_PLAN_INCONSISTENT");
    }

    #[test]
    fn inconsistent_merge_depth() {
        use Instruction as I;
        // one path pushes an int before the merge, the other does not
        let plan = ClassPlan::new("A").method(
            MethodPlan::new(ACC_STATIC, "f", "(I)V").code(CodePlan {
                instructions: vec![
                    I::Load(ValueKind::Int, 0),
                    I::If(Cond::Eq, 3),
                    I::Const(Constant::Int(1)),
                    I::Return(None),
                ],
                ..Default::default()
            }),
        );
        assert_eq!(build_class(&plan).unwrap_err().code(), "E_PLAN_INCONSISTENT");
    }

    #[test]
    fn long_gotos_widen() {
        use Instruction as I;
        let mut insns = vec![I::Goto(0)];
        for _ in 0..40000 {
            insns.push(I::Nop);
        }
        insns.push(I::Return(None));
        let last = insns.len() as u32 - 1;
        insns[0] = I::Goto(last);
        let plan = ClassPlan::new("A").method(MethodPlan::new(ACC_STATIC, "f", "()V").code(CodePlan {
            instructions: insns,
            ..Default::default()
        }));
        let cf = parse_class(&build_class(&plan).unwrap()).unwrap();
        assert_eq!(cf, plan.normal_form().unwrap());
        let code = cf.methods[0].code.as_ref().unwrap();
        assert_eq!(code.instructions[0].1, I::Goto(40005));
    }
}
