// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bcb_core::classfile::{Instruction as I, ValueKind};
use bcb_core::classpath::{ClassPath, ClassSource};
use bcb_core::corpus::{self, Asm, Lib};
use bcb_core::pipeline::{translate, Config};
use bcb_core::spec::Namespace;
use support::static_plan;

fn write_dir(dir: &Path, classes: &BTreeMap<String, Vec<u8>>) {
    for (name, bytes) in classes {
        let p = dir.join(format!("{name}.class"));
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, bytes).unwrap();
    }
}

fn write_jar(path: &Path, classes: &BTreeMap<String, Vec<u8>>) {
    let mut z = zip::ZipWriter::new(fs::File::create(path).unwrap());
    let opts = zip::write::SimpleFileOptions::default();
    for (name, bytes) in classes {
        z.start_file(format!("{name}.class"), opts).unwrap();
        z.write_all(bytes).unwrap();
    }
    z.finish().unwrap();
}

fn entries() -> Vec<String> {
    corpus::programs(&Lib::default()).iter().map(|p| p.name.clone()).collect()
}

fn classes() -> BTreeMap<String, Vec<u8>> {
    corpus::build_all(&corpus::programs(&Lib::default()))
}

#[test]
fn directories_and_jars_give_the_same_program() {
    let classes = classes();
    let want = translate(&classes, &entries(), &Config::default()).unwrap().text;

    let dir = tempfile::tempdir().unwrap();
    write_dir(dir.path(), &classes);
    let cp = ClassPath::new(&[dir.path().to_path_buf()]).unwrap();
    assert_eq!(translate(&cp, &entries(), &Config::default()).unwrap().text, want);

    let jar = dir.path().join("corpus.jar");
    write_jar(&jar, &classes);
    let cp = ClassPath::new(&[jar]).unwrap();
    assert_eq!(translate(&cp, &entries(), &Config::default()).unwrap().text, want);
}

#[test]
fn packaged_classes_are_found_by_dotted_name() {
    let mut a = Asm::new();
    a.iload(0).i(I::Return(Some(ValueKind::Int)));
    let plan = static_plan("com/acme/Id", "id", "(I)I", &mut a);
    let dir = tempfile::tempdir().unwrap();
    write_dir(dir.path(), &corpus::build_all(&[plan]));
    let cp = ClassPath::new(&[dir.path().to_path_buf()]).unwrap();
    assert_eq!(cp.load("com/acme/Id").unwrap().map(|b| !b.is_empty()), Some(true));
    let t = translate(&cp, &["com.acme.Id".to_string()], &Config::default()).unwrap();
    assert!(t.text.contains("procedure com.acme.Id.id#"), "{}", t.text);
}

#[test]
fn first_class_path_root_wins() {
    let classes = classes();
    let good = tempfile::tempdir().unwrap();
    let bad = tempfile::tempdir().unwrap();
    write_dir(good.path(), &classes);
    fs::write(bad.path().join("GCD.class"), b"\xca\xfe\xba\xbe").unwrap();
    let entry = ["GCD".to_string()];

    let cp = ClassPath::new(&[good.path().to_path_buf(), bad.path().to_path_buf()]).unwrap();
    assert!(translate(&cp, &entry, &Config::default()).is_ok());

    let cp = ClassPath::new(&[bad.path().to_path_buf(), good.path().to_path_buf()]).unwrap();
    let e = translate(&cp, &entry, &Config::default()).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("E_TRUNCATED", 3));
}

#[test]
fn path_lists_are_split() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_dir(b.path(), &classes());
    let joined = std::env::join_paths([a.path(), b.path()]).unwrap();
    let cp = ClassPath::new(&[PathBuf::from(joined)]).unwrap();
    assert!(cp.load("Loop").unwrap().is_some());
}

#[test]
fn input_errors_exit_with_3() {
    let missing = translate(&classes(), &["Nowhere".to_string()], &Config::default()).unwrap_err();
    assert_eq!((missing.code(), missing.exit_code()), ("E_CLASS_NOT_FOUND", 3));

    let e = ClassPath::new(&[PathBuf::from("/nonexistent/bcb/classes")]).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("E_IO", 3));

    let mut corrupt = classes();
    corrupt.insert("Bad".into(), b"not a classfile".to_vec());
    let e = translate(&corrupt, &["Bad".to_string()], &Config::default()).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("E_MAGIC", 3));

    let config = Config {
        prelude: Some("type ;".into()),
        ..Config::default()
    };
    let e = translate(&classes(), &["Loop".to_string()], &config).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("E_PRELUDE_PARSE", 3));
}

#[test]
fn errors_report_method_and_offset() {
    let lib = Lib::default();
    for (plan, code, _) in corpus::error_cases(&lib) {
        let e = support::criteria::translate_plan(&plan).unwrap_err();
        assert_eq!(e.code(), code);
        if code == "E_NOT_AGGREGABLE" || code == "E_UNSUPPORTED" {
            let loc = e.location().unwrap();
            assert!(loc.starts_with(&format!("{}.", plan.name)), "{loc}");
            assert!(loc.contains(" at offset "), "{code}: {loc}");
        }
    }
}

#[test]
fn namespace_is_taken_from_the_configuration() {
    let custom = Lib {
        ns: Namespace::new("org.example.spec"),
    };
    let plans = corpus::programs(&custom);
    let bytes = corpus::build_all(&plans);
    let config = Config {
        namespace: custom.ns.clone(),
        ..Config::default()
    };
    let got = translate(&bytes, &entries(), &config).unwrap().text;
    let want = translate(&classes(), &entries(), &Config::default()).unwrap().text;
    assert_eq!(got, want);
}

#[test]
fn custom_prelude_replaces_the_heap_model() {
    let prelude = format!("{}\nconst marker: int;\n", bcb_core::encode::DEFAULT_PRELUDE);
    let config = Config {
        prelude: Some(prelude),
        ..Config::default()
    };
    let t = translate(&classes(), &["Loop".to_string()], &config).unwrap();
    assert!(t.text.contains("const marker: int;"));
}

#[test]
fn referenced_classes_are_loaded_transitively() {
    let t = translate(&classes(), &["Counter".to_string()], &Config::default()).unwrap();
    assert!(t.program.procedures().any(|p| p.name.starts_with("Counter.increment#")));
    let only = translate(&classes(), &["Checks".to_string()], &Config::default()).unwrap();
    assert!(!only.text.contains("GCD."));
}

#[test]
fn classfile_versions_49_to_65_are_accepted() {
    let lib = Lib::default();
    let want = support::criteria::translate_plan(&corpus::summary(&lib)).unwrap().text;
    for v in [49, 61, 65] {
        let mut plan = corpus::summary(&lib);
        plan.major_version = v;
        assert_eq!(support::criteria::translate_plan(&plan).unwrap().text, want, "version {v}");
    }
    for v in [48, 66] {
        let mut plan = corpus::summary(&lib);
        plan.major_version = v;
        let e = support::criteria::translate_plan(&plan).unwrap_err();
        assert_eq!((e.code(), e.exit_code()), ("E_UNSUPPORTED", 1), "version {v}");
    }
}
