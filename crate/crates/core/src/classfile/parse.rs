// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

use super::descriptor::{FieldType, MethodDescriptor};
use super::insn::*;
use super::{
    mutf8, Annotation, ClassFile, ClassFileError, CodeAttribute, ElementValue, ExceptionEntry,
    FieldInfo, LocalVariable, MethodInfo, MAX_MAJOR_VERSION, MIN_MAJOR_VERSION,
};

type Result<T> = std::result::Result<T, ClassFileError>;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(ClassFileError::Truncated(self.pos))?;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or(ClassFileError::Truncated(self.bytes.len()))?;
        self.pos = end;
        Ok(s)
    }

    fn u1(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u2(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u4(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn i4(&mut self) -> Result<i32> {
        Ok(self.u4()? as i32)
    }

    fn u8(&mut self) -> Result<u64> {
        Ok(((self.u4()? as u64) << 32) | self.u4()? as u64)
    }
}

#[derive(Clone, Debug)]
enum CpEntry {
    /// Index 0 and the phantom slot after an 8-byte constant.
    Unusable,
    Utf8(String),
    Int(i32),
    Float(f32),
    Long(i64),
    Double(f64),
    Class(u16),
    String(u16),
    FieldRef(u16, u16),
    MethodRef(u16, u16),
    InterfaceMethodRef(u16, u16),
    NameAndType(u16, u16),
    MethodHandle,
    MethodType,
    Dynamic,
    InvokeDynamic(u16),
    Module,
    Package,
}

struct ConstantPool {
    entries: Vec<CpEntry>,
}

impl ConstantPool {
    fn read(r: &mut Reader) -> Result<ConstantPool> {
        let count = r.u2()?;
        let mut entries = vec![CpEntry::Unusable];
        while entries.len() < count as usize {
            let tag = r.u1()?;
            let entry = match tag {
                1 => {
                    let len = r.u2()? as usize;
                    let bytes = r.take(len)?;
                    CpEntry::Utf8(mutf8::decode(bytes).ok_or_else(|| {
                        ClassFileError::Malformed(format!("invalid modified UTF-8 at cp#{}", entries.len()))
                    })?)
                }
                3 => CpEntry::Int(r.i4()?),
                4 => CpEntry::Float(f32::from_bits(r.u4()?)),
                5 => CpEntry::Long(r.u8()? as i64),
                6 => CpEntry::Double(f64::from_bits(r.u8()?)),
                7 => CpEntry::Class(r.u2()?),
                8 => CpEntry::String(r.u2()?),
                9 => CpEntry::FieldRef(r.u2()?, r.u2()?),
                10 => CpEntry::MethodRef(r.u2()?, r.u2()?),
                11 => CpEntry::InterfaceMethodRef(r.u2()?, r.u2()?),
                12 => CpEntry::NameAndType(r.u2()?, r.u2()?),
                15 => {
                    r.take(3)?;
                    CpEntry::MethodHandle
                }
                16 => {
                    r.u2()?;
                    CpEntry::MethodType
                }
                17 => {
                    r.take(4)?;
                    CpEntry::Dynamic
                }
                18 => {
                    r.u2()?;
                    CpEntry::InvokeDynamic(r.u2()?)
                },
                19 => {
                    r.u2()?;
                    CpEntry::Module
                }
                20 => {
                    r.u2()?;
                    CpEntry::Package
                }
                _ => {
                    return Err(ClassFileError::Malformed(format!(
                        "unknown constant pool tag {tag} at cp#{}",
                        entries.len()
                    )))
                }
            };
            let wide = matches!(entry, CpEntry::Long(_) | CpEntry::Double(_));
            entries.push(entry);
            if wide {
                entries.push(CpEntry::Unusable);
            }
        }
        if entries.len() != count as usize {
            return Err(ClassFileError::Malformed(
                "8-byte constant overruns the constant pool".into(),
            ));
        }
        Ok(ConstantPool { entries })
    }

    fn get(&self, idx: u16) -> Result<&CpEntry> {
        match self.entries.get(idx as usize) {
            None | Some(CpEntry::Unusable) => Err(ClassFileError::BadCpIndex(idx)),
            Some(e) => Ok(e),
        }
    }

    fn utf8(&self, idx: u16) -> Result<&str> {
        match self.get(idx)? {
            CpEntry::Utf8(s) => Ok(s),
            _ => Err(ClassFileError::BadCpIndex(idx)),
        }
    }

    fn class(&self, idx: u16) -> Result<String> {
        match self.get(idx)? {
            CpEntry::Class(n) => Ok(self.utf8(*n)?.to_string()),
            _ => Err(ClassFileError::BadCpIndex(idx)),
        }
    }

    fn name_and_type(&self, idx: u16) -> Result<(&str, &str)> {
        match self.get(idx)? {
            CpEntry::NameAndType(n, t) => Ok((self.utf8(*n)?, self.utf8(*t)?)),
            _ => Err(ClassFileError::BadCpIndex(idx)),
        }
    }

    fn field_ref(&self, idx: u16) -> Result<FieldRef> {
        match self.get(idx)? {
            CpEntry::FieldRef(c, nt) => {
                let (name, desc) = self.name_and_type(*nt)?;
                Ok(FieldRef {
                    owner: self.class(*c)?,
                    name: name.to_string(),
                    descriptor: FieldType::parse(desc)?,
                })
            }
            _ => Err(ClassFileError::BadCpIndex(idx)),
        }
    }

    fn method_ref(&self, idx: u16) -> Result<(MethodRef, bool)> {
        let (c, nt, interface) = match self.get(idx)? {
            CpEntry::MethodRef(c, nt) => (*c, *nt, false),
            CpEntry::InterfaceMethodRef(c, nt) => (*c, *nt, true),
            _ => return Err(ClassFileError::BadCpIndex(idx)),
        };
        let (name, desc) = self.name_and_type(nt)?;
        Ok((
            MethodRef {
                owner: self.class(c)?,
                name: name.to_string(),
                descriptor: MethodDescriptor::parse(desc)?,
            },
            interface,
        ))
    }

    fn loadable(&self, idx: u16) -> Result<Constant> {
        Ok(match self.get(idx)? {
            CpEntry::Int(v) => Constant::Int(*v),
            CpEntry::Float(v) => Constant::Float(*v),
            CpEntry::Long(v) => Constant::Long(*v),
            CpEntry::Double(v) => Constant::Double(*v),
            CpEntry::String(s) => Constant::String(self.utf8(*s)?.to_string()),
            CpEntry::Class(n) => Constant::Class(self.utf8(*n)?.to_string()),
            CpEntry::MethodHandle | CpEntry::MethodType | CpEntry::Dynamic => {
                return Err(ClassFileError::Unsupported(
                    "ldc of a method handle, method type or dynamic constant".into(),
                ))
            }
            _ => return Err(ClassFileError::BadCpIndex(idx)),
        })
    }
}

/// Parse a classfile. Accepts major versions 49 through 65.
pub fn parse_class(bytes: &[u8]) -> Result<ClassFile> {
    let mut r = Reader::new(bytes);
    let magic = r.u4()?;
    if magic != 0xCAFE_BABE {
        return Err(ClassFileError::BadMagic(magic));
    }
    let minor_version = r.u2()?;
    let major_version = r.u2()?;
    if !(MIN_MAJOR_VERSION..=MAX_MAJOR_VERSION).contains(&major_version) {
        return Err(ClassFileError::Unsupported(format!(
            "classfile version {major_version}.{minor_version}"
        )));
    }
    let cp = ConstantPool::read(&mut r)?;
    let access_flags = r.u2()?;
    let this_class = cp.class(r.u2()?)?;
    let super_idx = r.u2()?;
    let super_class = if super_idx == 0 {
        None
    } else {
        Some(cp.class(super_idx)?)
    };
    let n = r.u2()?;
    let mut interfaces = Vec::with_capacity(n as usize);
    for _ in 0..n {
        interfaces.push(cp.class(r.u2()?)?);
    }

    let n = r.u2()?;
    let mut fields = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let access_flags = r.u2()?;
        let name = cp.utf8(r.u2()?)?.to_string();
        let descriptor = FieldType::parse(cp.utf8(r.u2()?)?)?;
        let mut annotations = Vec::new();
        for_each_attribute(&mut r, &cp, |name, body| {
            if name == "RuntimeVisibleAnnotations" {
                annotations = read_annotation_list(&mut Reader::new(body), &cp)?;
            }
            Ok(())
        })?;
        fields.push(FieldInfo {
            access_flags,
            name,
            descriptor,
            annotations,
        });
    }

    let n = r.u2()?;
    let mut methods = Vec::with_capacity(n as usize);
    for _ in 0..n {
        methods.push(read_method(&mut r, &cp)?);
    }

    let mut annotations = Vec::new();
    for_each_attribute(&mut r, &cp, |name, body| {
        if name == "RuntimeVisibleAnnotations" {
            annotations = read_annotation_list(&mut Reader::new(body), &cp)?;
        }
        Ok(())
    })?;

    Ok(ClassFile {
        minor_version,
        major_version,
        access_flags,
        this_class,
        super_class,
        interfaces,
        fields,
        methods,
        annotations,
    })
}

fn for_each_attribute<'a>(
    r: &mut Reader<'a>,
    cp: &ConstantPool,
    mut f: impl FnMut(&str, &'a [u8]) -> Result<()>,
) -> Result<()> {
    let n = r.u2()?;
    for _ in 0..n {
        let name = cp.utf8(r.u2()?)?.to_string();
        let len = r.u4()? as usize;
        let body = r.take(len)?;
        f(&name, body)?;
    }
    Ok(())
}

fn read_method(r: &mut Reader, cp: &ConstantPool) -> Result<MethodInfo> {
    let access_flags = r.u2()?;
    let name = cp.utf8(r.u2()?)?.to_string();
    let descriptor = MethodDescriptor::parse(cp.utf8(r.u2()?)?)?;
    let mut code = None;
    let mut annotations = Vec::new();
    let mut parameter_names = Vec::new();
    for_each_attribute(r, cp, |attr, body| {
        match attr {
            "Code" => code = Some(read_code(&mut Reader::new(body), cp)?),
            "RuntimeVisibleAnnotations" => {
                annotations = read_annotation_list(&mut Reader::new(body), cp)?
            }
            "MethodParameters" => {
                let mut br = Reader::new(body);
                let n = br.u1()?;
                for _ in 0..n {
                    let idx = br.u2()?;
                    br.u2()?;
                    parameter_names.push(if idx == 0 {
                        String::new()
                    } else {
                        cp.utf8(idx)?.to_string()
                    });
                }
            }
            _ => {}
        }
        Ok(())
    })?;
    let m = MethodInfo {
        access_flags,
        name,
        descriptor,
        code,
        annotations,
        parameter_names,
    };
    if (m.is_abstract() || m.is_native()) == m.code.is_some() {
        return Err(ClassFileError::Malformed(format!(
            "method {} {} a Code attribute",
            m.name,
            if m.code.is_some() { "must not have" } else { "lacks" }
        )));
    }
    Ok(m)
}

fn read_code(r: &mut Reader, cp: &ConstantPool) -> Result<CodeAttribute> {
    let max_stack = r.u2()?;
    let max_locals = r.u2()?;
    let code_length = r.u4()?;
    let code = r.take(code_length as usize)?;
    let instructions = decode_instructions(code, cp)?;

    let n = r.u2()?;
    let mut exception_table = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let start = r.u2()? as u32;
        let end = r.u2()? as u32;
        let handler = r.u2()? as u32;
        let ct = r.u2()?;
        exception_table.push(ExceptionEntry {
            start,
            end,
            handler,
            catch_type: if ct == 0 { None } else { Some(cp.class(ct)?) },
        });
    }

    let mut local_variables = Vec::new();
    // StackMapTable, LineNumberTable and the rest are skipped.
    for_each_attribute(r, cp, |name, body| {
        if name == "LocalVariableTable" {
            let mut br = Reader::new(body);
            let n = br.u2()?;
            for _ in 0..n {
                local_variables.push(LocalVariable {
                    start: br.u2()? as u32,
                    length: br.u2()? as u32,
                    name: cp.utf8(br.u2()?)?.to_string(),
                    descriptor: cp.utf8(br.u2()?)?.to_string(),
                    index: br.u2()?,
                });
            }
        }
        Ok(())
    })?;

    let code = CodeAttribute {
        max_stack,
        max_locals,
        instructions,
        code_length,
        exception_table,
        local_variables,
    };
    for (off, insn) in &code.instructions {
        for t in insn.targets() {
            if code.index_of(t).is_none() {
                return Err(ClassFileError::BadCode(format!(
                    "branch at {off} targets {t}, which is not an instruction boundary"
                )));
            }
        }
    }
    for e in &code.exception_table {
        let ok = code.index_of(e.start).is_some()
            && code.index_of(e.handler).is_some()
            && (e.end == code_length || code.index_of(e.end).is_some());
        if !ok {
            return Err(ClassFileError::BadCode("exception table entry off an instruction boundary".into()));
        }
    }
    Ok(code)
}

fn newarray_type(atype: u8) -> Result<FieldType> {
    Ok(match atype {
        4 => FieldType::Boolean,
        5 => FieldType::Char,
        6 => FieldType::Float,
        7 => FieldType::Double,
        8 => FieldType::Byte,
        9 => FieldType::Short,
        10 => FieldType::Int,
        11 => FieldType::Long,
        _ => return Err(ClassFileError::BadCode(format!("bad newarray type {atype}"))),
    })
}

/// Class operand of `anewarray`/`checkcast`/`multianewarray`, which may be
/// an array descriptor rather than a class name.
fn class_as_type(name: &str) -> Result<FieldType> {
    if name.starts_with('[') {
        FieldType::parse(name)
    } else {
        Ok(FieldType::Object(name.to_string()))
    }
}

const LOAD_KINDS: [ValueKind; 5] = [
    ValueKind::Int,
    ValueKind::Long,
    ValueKind::Float,
    ValueKind::Double,
    ValueKind::Ref,
];
const ARRAY_KINDS: [ArrayKind; 8] = [
    ArrayKind::Int,
    ArrayKind::Long,
    ArrayKind::Float,
    ArrayKind::Double,
    ArrayKind::Ref,
    ArrayKind::Byte,
    ArrayKind::Char,
    ArrayKind::Short,
];
const ARITH: [ArithOp; 6] = [
    ArithOp::Add,
    ArithOp::Sub,
    ArithOp::Mul,
    ArithOp::Div,
    ArithOp::Rem,
    ArithOp::Neg,
];

fn decode_instructions(code: &[u8], cp: &ConstantPool) -> Result<Vec<(u32, Instruction)>> {
    use Instruction as I;
    let mut r = Reader::new(code);
    let mut out = Vec::new();
    while r.pos < code.len() {
        let at = r.pos as u32;
        let rel16 = |r: &mut Reader| -> Result<u32> {
            let d = r.u2()? as i16 as i64;
            branch(at, d)
        };
        let op = r.u1()?;
        let insn = match op {
            0 => I::Nop,
            1 => I::Const(Constant::Null),
            2..=8 => I::Const(Constant::Int(op as i32 - 3)),
            9 | 10 => I::Const(Constant::Long(op as i64 - 9)),
            11..=13 => I::Const(Constant::Float((op - 11) as f32)),
            14 | 15 => I::Const(Constant::Double((op - 14) as f64)),
            16 => I::Const(Constant::Int(r.u1()? as i8 as i32)),
            17 => I::Const(Constant::Int(r.u2()? as i16 as i32)),
            18 => {
                let c = cp.loadable(r.u1()? as u16)?;
                if matches!(c, Constant::Long(_) | Constant::Double(_)) {
                    return Err(ClassFileError::BadCode("ldc of an 8-byte constant".into()));
                }
                I::Const(c)
            }
            19 | 20 => {
                let c = cp.loadable(r.u2()?)?;
                let wide = matches!(c, Constant::Long(_) | Constant::Double(_));
                if wide != (op == 20) {
                    return Err(ClassFileError::BadCode("ldc operand width mismatch".into()));
                }
                I::Const(c)
            }
            21..=25 => I::Load(LOAD_KINDS[(op - 21) as usize], r.u1()? as u16),
            26..=45 => I::Load(LOAD_KINDS[((op - 26) / 4) as usize], ((op - 26) % 4) as u16),
            46..=53 => I::ArrayLoad(ARRAY_KINDS[(op - 46) as usize]),
            54..=58 => I::Store(LOAD_KINDS[(op - 54) as usize], r.u1()? as u16),
            59..=78 => I::Store(LOAD_KINDS[((op - 59) / 4) as usize], ((op - 59) % 4) as u16),
            79..=86 => I::ArrayStore(ARRAY_KINDS[(op - 79) as usize]),
            87 => I::Pop,
            88 => I::Pop2,
            89 => I::Dup,
            90 => I::DupX1,
            91 => I::DupX2,
            92 => I::Dup2,
            93 => I::Dup2X1,
            94 => I::Dup2X2,
            95 => I::Swap,
            96..=119 => I::Arith(
                NumKind::from_index((op - 96) % 4),
                ARITH[((op - 96) / 4) as usize],
            ),
            120..=131 => {
                let kind = if (op - 120) % 2 == 0 { NumKind::Int } else { NumKind::Long };
                let o = [
                    ArithOp::Shl,
                    ArithOp::Shr,
                    ArithOp::Ushr,
                    ArithOp::And,
                    ArithOp::Or,
                    ArithOp::Xor,
                ][((op - 120) / 2) as usize];
                I::Arith(kind, o)
            }
            132 => I::Iinc(r.u1()? as u16, r.u1()? as i8 as i16),
            133..=144 => {
                let from = (op - 133) / 3;
                let mut to = (op - 133) % 3;
                if to >= from {
                    to += 1;
                }
                I::Convert(NumKind::from_index(from), NumKind::from_index(to))
            }
            145 => I::Narrow(Narrow::Byte),
            146 => I::Narrow(Narrow::Char),
            147 => I::Narrow(Narrow::Short),
            148 => I::Compare(CmpKind::Lcmp),
            149 => I::Compare(CmpKind::Fcmpl),
            150 => I::Compare(CmpKind::Fcmpg),
            151 => I::Compare(CmpKind::Dcmpl),
            152 => I::Compare(CmpKind::Dcmpg),
            153..=158 => I::If(Cond::from_index(op - 153), rel16(&mut r)?),
            159..=164 => I::IfICmp(Cond::from_index(op - 159), rel16(&mut r)?),
            165 => I::IfACmp(Cond::Eq, rel16(&mut r)?),
            166 => I::IfACmp(Cond::Ne, rel16(&mut r)?),
            167 => I::Goto(rel16(&mut r)?),
            168 | 169 | 201 => {
                return Err(ClassFileError::Unsupported(format!(
                    "subroutine instruction at offset {at} (jsr/ret)"
                )))
            }
            170 => {
                while !r.pos.is_multiple_of(4) {
                    r.u1()?;
                }
                let default = branch(at, r.i4()? as i64)?;
                let low = r.i4()?;
                let high = r.i4()?;
                if high < low {
                    return Err(ClassFileError::BadCode("tableswitch high < low".into()));
                }
                let n = (high as i64 - low as i64 + 1) as usize;
                if n > code.len() {
                    return Err(ClassFileError::Truncated(code.len()));
                }
                let mut targets = Vec::with_capacity(n);
                for _ in 0..n {
                    targets.push(branch(at, r.i4()? as i64)?);
                }
                I::TableSwitch { default, low, targets }
            }
            171 => {
                while !r.pos.is_multiple_of(4) {
                    r.u1()?;
                }
                let default = branch(at, r.i4()? as i64)?;
                let n = r.i4()?;
                if n < 0 || n as usize > code.len() {
                    return Err(ClassFileError::BadCode("bad lookupswitch pair count".into()));
                }
                let mut pairs = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let key = r.i4()?;
                    pairs.push((key, branch(at, r.i4()? as i64)?));
                }
                I::LookupSwitch { default, pairs }
            }
            172..=176 => I::Return(Some(LOAD_KINDS[(op - 172) as usize])),
            177 => I::Return(None),
            178 => I::GetStatic(cp.field_ref(r.u2()?)?),
            179 => I::PutStatic(cp.field_ref(r.u2()?)?),
            180 => I::GetField(cp.field_ref(r.u2()?)?),
            181 => I::PutField(cp.field_ref(r.u2()?)?),
            182..=185 => {
                let (method, interface) = cp.method_ref(r.u2()?)?;
                let kind = match op {
                    182 => InvokeKind::Virtual,
                    183 => InvokeKind::Special,
                    184 => InvokeKind::Static,
                    _ => {
                        r.u2()?;
                        InvokeKind::Interface
                    }
                };
                I::Invoke {
                    kind,
                    method,
                    interface,
                }
            }
            186 => {
                let idx = r.u2()?;
                r.u2()?;
                match cp.get(idx)? {
                    CpEntry::InvokeDynamic(nt) => {
                        let (name, desc) = cp.name_and_type(*nt)?;
                        I::InvokeDynamic {
                            name: name.to_string(),
                            descriptor: MethodDescriptor::parse(desc)?,
                        }
                    }
                    _ => return Err(ClassFileError::BadCpIndex(idx)),
                }
            }
            187 => I::New(cp.class(r.u2()?)?),
            188 => I::NewArray(newarray_type(r.u1()?)?),
            189 => I::NewArray(class_as_type(&cp.class(r.u2()?)?)?),
            190 => I::ArrayLength,
            191 => I::AThrow,
            192 => I::CheckCast(cp.class(r.u2()?)?),
            193 => I::InstanceOf(cp.class(r.u2()?)?),
            194 => I::MonitorEnter,
            195 => I::MonitorExit,
            196 => {
                let op2 = r.u1()?;
                let idx = r.u2()?;
                match op2 {
                    21..=25 => I::Load(LOAD_KINDS[(op2 - 21) as usize], idx),
                    54..=58 => I::Store(LOAD_KINDS[(op2 - 54) as usize], idx),
                    132 => I::Iinc(idx, r.u2()? as i16),
                    169 => {
                        return Err(ClassFileError::Unsupported(format!(
                            "subroutine instruction at offset {at} (wide ret)"
                        )))
                    }
                    _ => return Err(ClassFileError::BadCode(format!("bad wide opcode {op2}"))),
                }
            }
            197 => {
                let ty = class_as_type(&cp.class(r.u2()?)?)?;
                let dims = r.u1()?;
                if dims == 0 {
                    return Err(ClassFileError::BadCode("multianewarray with zero dimensions".into()));
                }
                I::MultiANewArray(ty, dims)
            }
            198 => I::IfNull(rel16(&mut r)?),
            199 => I::IfNonNull(rel16(&mut r)?),
            200 => I::Goto(branch(at, r.i4()? as i64)?),
            _ => return Err(ClassFileError::BadCode(format!("unknown opcode {op} at offset {at}"))),
        };
        out.push((at, insn));
    }
    Ok(out)
}

fn branch(at: u32, delta: i64) -> Result<u32> {
    let t = at as i64 + delta;
    if t < 0 || t > u32::MAX as i64 {
        return Err(ClassFileError::BadCode(format!("branch at {at} out of range")));
    }
    Ok(t as u32)
}

fn read_annotation_list(r: &mut Reader, cp: &ConstantPool) -> Result<Vec<Annotation>> {
    let n = r.u2()?;
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        out.push(read_annotation(r, cp)?);
    }
    Ok(out)
}

fn annotation_type_name(desc: &str) -> Result<String> {
    match FieldType::parse(desc)? {
        FieldType::Object(name) => Ok(name.replace('/', ".")),
        _ => Err(ClassFileError::BadDescriptor(desc.to_string())),
    }
}

fn read_annotation(r: &mut Reader, cp: &ConstantPool) -> Result<Annotation> {
    let type_name = annotation_type_name(cp.utf8(r.u2()?)?)?;
    let n = r.u2()?;
    let mut elements = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let name = cp.utf8(r.u2()?)?.to_string();
        elements.push((name, read_element_value(r, cp)?));
    }
    Ok(Annotation {
        type_name,
        elements,
    })
}

fn read_element_value(r: &mut Reader, cp: &ConstantPool) -> Result<ElementValue> {
    let tag = r.u1()?;
    let int_const = |r: &mut Reader| -> Result<i32> {
        let idx = r.u2()?;
        match cp.get(idx)? {
            CpEntry::Int(v) => Ok(*v),
            _ => Err(ClassFileError::BadCpIndex(idx)),
        }
    };
    Ok(match tag {
        b'B' => ElementValue::Byte(int_const(r)? as i8),
        b'C' => ElementValue::Char(int_const(r)? as u16),
        b'I' => ElementValue::Int(int_const(r)?),
        b'S' => ElementValue::Short(int_const(r)? as i16),
        b'Z' => ElementValue::Boolean(int_const(r)? != 0),
        b'J' | b'F' | b'D' => {
            let idx = r.u2()?;
            match (tag, cp.get(idx)?) {
                (b'J', CpEntry::Long(v)) => ElementValue::Long(*v),
                (b'F', CpEntry::Float(v)) => ElementValue::Float(*v),
                (b'D', CpEntry::Double(v)) => ElementValue::Double(*v),
                _ => return Err(ClassFileError::BadCpIndex(idx)),
            }
        }
        b's' => ElementValue::String(cp.utf8(r.u2()?)?.to_string()),
        b'e' => ElementValue::Enum {
            type_name: cp.utf8(r.u2()?)?.to_string(),
            const_name: cp.utf8(r.u2()?)?.to_string(),
        },
        b'c' => ElementValue::Class(cp.utf8(r.u2()?)?.to_string()),
        b'@' => ElementValue::Annotation(read_annotation(r, cp)?),
        b'[' => {
            let n = r.u2()?;
            let mut items = Vec::with_capacity(n as usize);
            for _ in 0..n {
                items.push(read_element_value(r, cp)?);
            }
            ElementValue::Array(items)
        }
        _ => {
            return Err(ClassFileError::Malformed(format!(
                "unknown element value tag {tag:#x}"
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic() {
        let err = parse_class(&[0xCA, 0xFE, 0xBA, 0xBF, 0, 0, 0, 52]).unwrap_err();
        assert_eq!(err.code(), "E_MAGIC");
    }

    #[test]
    fn truncated() {
        let err = parse_class(&[0xCA, 0xFE, 0xBA, 0xBE, 0, 0]).unwrap_err();
        assert_eq!(err.code(), "E_TRUNCATED");
        assert_eq!(parse_class(&[]).unwrap_err().code(), "E_TRUNCATED");
    }

    #[test]
    fn version_window() {
        let mut bytes = vec![0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 48];
        assert_eq!(parse_class(&bytes).unwrap_err().code(), "E_UNSUPPORTED");
        bytes[7] = 66;
        assert_eq!(parse_class(&bytes).unwrap_err().code(), "E_UNSUPPORTED");
    }

    #[test]
    fn long_constants_take_two_slots() {
        // cp: #1 Long, #2 phantom, #3 Utf8 "A", #4 Class #3
        let mut b = vec![0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 52, 0, 5];
        b.extend([5, 0, 0, 0, 0, 0, 0, 0, 7]);
        b.extend([1, 0, 1, b'A']);
        b.extend([7, 0, 3]);
        b.extend([0, 0x21, 0, 4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let cf = parse_class(&b).unwrap();
        assert_eq!(cf.this_class, "A");
        assert_eq!(cf.super_class, None);

        // this_class pointing at the phantom slot is a dangling index
        let n = b.len();
        b[n - 11] = 2;
        assert_eq!(parse_class(&b).unwrap_err(), ClassFileError::BadCpIndex(2));
    }
}
