// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Whole-program translation from classfiles to a Boogie program.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::boogie::{self, BStmt, BType, Decl, Param, ProcBody, Procedure, Program, Spec, SyntaxError, HEAP};
use crate::classfile::{parse_class, ClassFile, ClassFileError, Instruction, MethodRef};
use crate::classpath::ClassSource;
use crate::encode::{
    self, class_const, declared_names, extract_calls, inject_invariants, is_object_init,
    method_name, translate_procedure, translate_type, CalleeKind, Context, EncodeError,
    ProcedureInput, Uses, RET,
};
use crate::frames::{infer_frames, Frame, FrameInfo, Provenance};
use crate::ir::{Body, Expr, ExprKind, LValue, StmtKind, Type};
use crate::lift::{build_cfg, detect_loops, lift_method, LiftError};
use crate::spec::{
    aggregate, extract_inline_checks, extract_loop_invariants, resolve_contracts, Aggregate,
    MethodContracts, Namespace, SpecError, DEFAULT_NAMESPACE, DEFAULT_NODE_BUDGET,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("class `{0}` not found on the class path")]
    ClassNotFound(String),
    #[error("{origin}: {source}")]
    ClassFile {
        origin: String,
        source: ClassFileError,
    },
    #[error("prelude: {0}")]
    Prelude(SyntaxError),
    #[error("{method}: {source}")]
    Lift { method: MethodRef, source: LiftError },
    #[error("{method}: {source}")]
    Spec { method: MethodRef, source: SpecError },
    #[error("{method}: {source}")]
    Encode {
        method: MethodRef,
        source: EncodeError,
    },
    #[error("{0}")]
    Symbols(EncodeError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::ClassNotFound(_) => "E_CLASS_NOT_FOUND",
            Error::ClassFile { source, .. } => source.code(),
            Error::Prelude(_) => "E_PRELUDE_PARSE",
            Error::Lift { source, .. } => source.code(),
            Error::Spec { source, .. } => source.code(),
            Error::Encode { source, .. } | Error::Symbols(source) => source.code(),
        }
    }

    /// 1 for translation errors, 2 for specification errors and 3 for
    /// input and configuration problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::ClassNotFound(_) | Error::Prelude(_) => 3,
            Error::ClassFile { source, .. } => match source {
                ClassFileError::Unsupported(_) => 1,
                _ => 3,
            },
            Error::Lift { .. } => 1,
            Error::Spec { .. } => 2,
            Error::Encode { source, .. } | Error::Symbols(source) => match source {
                EncodeError::Spec(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn method(&self) -> Option<&MethodRef> {
        match self {
            Error::Lift { method, .. } | Error::Spec { method, .. } | Error::Encode { method, .. } => {
                Some(method)
            }
            _ => None,
        }
    }

    pub fn offset(&self) -> Option<u32> {
        match self {
            Error::Lift { source, .. } => source.offset(),
            Error::Spec { source, .. } => source.offset(),
            Error::Encode {
                source: EncodeError::Spec(s),
                ..
            } => s.offset(),
            _ => None,
        }
    }

    /// `class.method(descriptor) at offset N`, when known.
    pub fn location(&self) -> Option<String> {
        let m = self.method()?;
        let mut s = format!("{}.{}{}", m.owner.replace('/', "."), m.name, m.descriptor);
        if let Some(o) = self.offset() {
            s.push_str(&format!(" at offset {o}"));
        }
        Some(s)
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub namespace: Namespace,
    /// Prelude text; the built-in heap model when `None`.
    pub prelude: Option<String>,
    pub node_budget: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            namespace: Namespace::new(DEFAULT_NAMESPACE),
            prelude: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Everything produced by a translation.
#[derive(Clone, Debug)]
pub struct Translation {
    pub program: Program,
    pub text: String,
    /// Frames of every procedure in the analysed program, by Boogie name.
    pub frames: BTreeMap<String, FrameInfo>,
    /// Final IR of each translated procedure.
    pub bodies: BTreeMap<MethodRef, Body>,
    pub aggregates: BTreeMap<MethodRef, Aggregate>,
    pub contracts: BTreeMap<MethodRef, MethodContracts>,
}

impl Translation {
    pub fn frame_of(&self, m: &MethodRef) -> Option<Frame> {
        self.frames.get(&method_name(m)).map(|f| f.frame)
    }
}

fn internal_name(name: &str) -> String {
    name.replace('.', "/")
}

fn referenced_classes(cf: &ClassFile) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.extend(cf.super_class.iter().cloned());
    for m in &cf.methods {
        let Some(code) = &m.code else { continue };
        for (_, insn) in &code.instructions {
            match insn {
                Instruction::Invoke { method, .. } => {
                    out.insert(method.owner.clone());
                }
                Instruction::GetField(f)
                | Instruction::PutField(f)
                | Instruction::GetStatic(f)
                | Instruction::PutStatic(f) => {
                    out.insert(f.owner.clone());
                }
                Instruction::New(c) => {
                    out.insert(c.clone());
                }
                _ => {}
            }
        }
    }
    out.retain(|c| !c.starts_with('['));
    out
}

/// Load the entry classes and every class they reach that the source can
/// provide. Library classes of the namespace are not loaded.
pub fn load_closure(
    source: &dyn ClassSource,
    entries: &[String],
    ns: &Namespace,
) -> Result<Vec<ClassFile>, Error> {
    let mut out = BTreeMap::new();
    let mut missing = BTreeSet::new();
    let mut work: Vec<(String, bool)> = entries.iter().rev().map(|e| (internal_name(e), true)).collect();
    while let Some((name, required)) = work.pop() {
        if out.contains_key(&name) || missing.contains(&name) || ns.owns(&name) {
            continue;
        }
        let Some(bytes) = source.load(&name)? else {
            if required {
                return Err(Error::ClassNotFound(name.replace('/', ".")));
            }
            missing.insert(name);
            continue;
        };
        let cf = parse_class(&bytes).map_err(|source| Error::ClassFile {
            origin: name.replace('/', "."),
            source,
        })?;
        for r in referenced_classes(&cf) {
            work.push((r, false));
        }
        out.insert(name, cf);
    }
    Ok(out.into_values().collect())
}

pub fn translate(source: &dyn ClassSource, entries: &[String], config: &Config) -> Result<Translation, Error> {
    let classes = load_closure(source, entries, &config.namespace)?;
    translate_classes(&classes, config)
}

/// Walk superclasses for the declaration a call site refers to.
fn resolve_in(classes: &BTreeMap<String, &ClassFile>, m: &MethodRef) -> MethodRef {
    let mut owner = Some(m.owner.clone());
    let mut seen = BTreeSet::new();
    while let Some(o) = owner {
        if !seen.insert(o.clone()) {
            break;
        }
        let Some(cf) = classes.get(&o) else { break };
        if cf.find_method(&m.name, &m.descriptor).is_some() {
            return MethodRef::new(&o, &m.name, m.descriptor.clone());
        }
        owner = cf.super_class.clone();
    }
    m.clone()
}

fn post_order<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    for c in e.children() {
        post_order(c, f);
    }
    f(e);
}

/// A procedure with one heap assignment per heap write and one call per
/// call or allocation in `body`, with a note describing each.
fn skeleton(body: &Body, resolve: &dyn Fn(&MethodRef) -> MethodRef) -> (Procedure, Vec<String>) {
    let mut stmts = Vec::new();
    let mut notes = Vec::new();
    for s in &body.stmts {
        let at = s.offset.map(|o| format!(" at offset {o}")).unwrap_or_default();
        for e in s.exprs() {
            post_order(e, &mut |x| {
                let (proc, note) = match &x.kind {
                    ExprKind::Call(c) if !is_object_init(&c.method) => {
                        let m = resolve(&c.method);
                        (method_name(&m), format!("call to `{m}`{at}"))
                    }
                    ExprKind::New(c) => ("new".to_string(), format!("allocation of `{c}`{at}")),
                    ExprKind::NewArray(..) => ("array.new".to_string(), format!("array allocation{at}")),
                    _ => return,
                };
                stmts.push(BStmt::Call {
                    outs: Vec::new(),
                    proc,
                    args: Vec::new(),
                });
                notes.push(note);
            });
        }
        if let StmtKind::Assign(lv, _) = &s.kind {
            if !matches!(lv, LValue::Local(_)) {
                stmts.push(BStmt::Assign(HEAP.to_string(), boogie::BExpr::id(HEAP)));
                notes.push(format!("heap write{at}"));
            }
        }
    }
    let p = Procedure {
        name: method_name(&body.method),
        params: Vec::new(),
        returns: Vec::new(),
        specs: Vec::new(),
        body: Some(ProcBody {
            locals: Vec::new(),
            stmts,
        }),
    };
    (p, notes)
}

fn describe(info: &FrameInfo, notes: Option<&Vec<String>>) -> String {
    match &info.provenance {
        Some(Provenance::Write(i)) => notes.and_then(|n| n.get(*i)).cloned().unwrap_or_default(),
        Some(Provenance::Callee(i, p)) => {
            let n = notes.and_then(|n| n.get(*i)).cloned().unwrap_or_default();
            format!("{n}, whose frame is the whole heap ({p})")
        }
        Some(Provenance::Bodiless) | None => "method has no body".into(),
    }
}

/// A bodiless procedure standing in for a method without translated code.
fn stub(m: &MethodRef, has_receiver: bool) -> Procedure {
    let mut params = Vec::new();
    if has_receiver {
        params.push(Param::new(encode::RECEIVER, BType::reference()));
    }
    for (i, t) in m.descriptor.params.iter().enumerate() {
        params.push(Param::new(&format!("p{i}"), translate_type(&Type::from_field(t))));
    }
    let returns = m
        .descriptor
        .ret
        .iter()
        .map(|t| Param::new(RET, translate_type(&Type::from_field(t))))
        .collect();
    Procedure {
        name: method_name(m),
        params,
        returns,
        specs: vec![Spec::Modifies(vec![HEAP.to_string()])],
        body: None,
    }
}

pub fn translate_classes(classes: &[ClassFile], config: &Config) -> Result<Translation, Error> {
    let ns = &config.namespace;
    let prelude_text = config.prelude.as_deref().unwrap_or(encode::DEFAULT_PRELUDE);
    let prelude = encode::parse_prelude(prelude_text).map_err(Error::Prelude)?;

    let table: BTreeMap<String, &ClassFile> = classes
        .iter()
        .filter(|c| !ns.owns(&c.this_class))
        .map(|c| (c.this_class.clone(), c))
        .collect();
    let resolve = |m: &MethodRef| resolve_in(&table, m);

    let mut contracts = BTreeMap::new();
    for cf in table.values() {
        let c = resolve_contracts(cf, ns).map_err(|(method, source)| Error::Spec { method, source })?;
        contracts.extend(c);
    }
    let is_spec = |m: &MethodRef| contracts.get(&resolve(m)).is_some_and(|c| c.is_spec());

    let no_aggregates = BTreeMap::new();
    let mut reserved = declared_names(&prelude);
    for cf in table.values() {
        reserved.insert(class_const(&cf.this_class));
        reserved.extend(referenced_classes(cf).iter().map(|c| class_const(c)));
    }
    let early = Context {
        contracts: &contracts,
        aggregates: &no_aggregates,
        resolve: &resolve,
        reserved: reserved.clone(),
    };

    let mut bodies: BTreeMap<MethodRef, Body> = BTreeMap::new();
    let mut spec_bodies: BTreeMap<MethodRef, Body> = BTreeMap::new();
    for cf in table.values() {
        for m in &cf.methods {
            if m.code.is_none() {
                continue;
            }
            let mref = m.method_ref(&cf.this_class);
            let lift_err = |source| Error::Lift {
                method: mref.clone(),
                source,
            };
            let spec_err = |source| Error::Spec {
                method: mref.clone(),
                source,
            };
            let mut body = lift_method(&cf.this_class, m, ns).map_err(lift_err)?;
            if contracts.get(&mref).is_some_and(|c| c.is_spec()) {
                spec_bodies.insert(mref, body);
                continue;
            }
            let cfg = build_cfg(&body);
            let loops = detect_loops(&body, &cfg).map_err(lift_err)?;
            let invariants = extract_loop_invariants(&mut body, &cfg, &loops, &is_spec).map_err(spec_err)?;
            let cfg = build_cfg(&body);
            extract_inline_checks(&mut body, &cfg, &is_spec).map_err(spec_err)?;
            inject_invariants(&mut body, &invariants).map_err(lift_err)?;
            extract_calls(&mut body, &early);
            bodies.insert(mref, body);
        }
    }

    let mut analysed = Program::default();
    let mut notes = BTreeMap::new();
    for body in bodies.values().chain(spec_bodies.values()) {
        let (p, n) = skeleton(body, &resolve);
        notes.insert(p.name.clone(), n);
        analysed.decls.push(Decl::Procedure(p));
    }
    let frames = infer_frames(&analysed);
    for (m, c) in &contracts {
        if !c.is_spec() {
            continue;
        }
        let name = method_name(m);
        let info = frames.get(&name).cloned().unwrap_or(FrameInfo {
            frame: Frame::WholeHeap,
            provenance: Some(Provenance::Bodiless),
        });
        if info.frame == Frame::WholeHeap {
            return Err(Error::Spec {
                method: m.clone(),
                source: SpecError::ImpureSpec {
                    provenance: describe(&info, notes.get(&name)),
                },
            });
        }
    }

    let mut aggregates = BTreeMap::new();
    for (m, body) in &spec_bodies {
        let agg = aggregate(body, &is_spec, config.node_budget).map_err(|source| Error::Spec {
            method: m.clone(),
            source,
        })?;
        aggregates.insert(m.clone(), agg);
    }

    let ctx = Context {
        contracts: &contracts,
        aggregates: &aggregates,
        resolve: &resolve,
        reserved,
    };
    let mut uses = Uses::default();
    let mut functions = BTreeMap::new();
    for (m, agg) in &aggregates {
        if !contracts[m].is_pure || ctx.callee_kind(m) != CalleeKind::Pure {
            continue;
        }
        let f = encode::translate_function(&ctx, &mut uses, agg).map_err(|source| Error::Encode {
            method: m.clone(),
            source,
        })?;
        functions.insert(f.name.clone(), (m.clone(), f));
    }
    let default_contracts = MethodContracts::default();
    let mut procedures = BTreeMap::new();
    for (m, body) in &bodies {
        let input = ProcedureInput {
            body,
            contracts: contracts.get(m).unwrap_or(&default_contracts),
            modifies_heap: frames.get(&method_name(m)).is_none_or(|f| f.frame == Frame::WholeHeap),
        };
        let p = translate_procedure(&ctx, &mut uses, &input).map_err(|source| Error::Encode {
            method: m.clone(),
            source,
        })?;
        procedures.insert(p.name.clone(), (m.clone(), p));
    }
    for (m, has_receiver) in &uses.callees {
        let name = method_name(m);
        procedures.entry(name).or_insert_with(|| (m.clone(), stub(m, *has_receiver)));
    }

    let mut seen = BTreeMap::new();
    for name in declared_names(&prelude) {
        seen.insert(name, "prelude".to_string());
    }
    let (class_decls, field_decls) = encode::symbol_decls(&uses, &mut seen).map_err(Error::Symbols)?;
    let mut program = prelude;
    program.decls.extend(class_decls);
    program.decls.extend(field_decls);
    for (name, (m, f)) in functions {
        encode::claim_name(&mut seen, &name, format!("method {m}")).map_err(Error::Symbols)?;
        program.decls.push(Decl::Function(f));
    }
    for (name, (m, p)) in procedures {
        encode::claim_name(&mut seen, &name, format!("method {m}")).map_err(Error::Symbols)?;
        program.decls.push(Decl::Procedure(p));
    }
    let text = boogie::print_program(&program);
    let frames = infer_frames(&Program {
        decls: analysed
            .decls
            .into_iter()
            .chain(program.decls.iter().filter(|d| matches!(d, Decl::Procedure(p) if p.body.is_none())).cloned())
            .collect(),
    });
    Ok(Translation {
        program,
        text,
        frames,
        bodies,
        aggregates,
        contracts,
    })
}
