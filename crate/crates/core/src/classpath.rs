// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Locating classfiles in directories and jar archives.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::pipeline::Error;

/// Something that can produce the bytes of a class by internal name.
pub trait ClassSource {
    fn load(&self, internal: &str) -> Result<Option<Vec<u8>>, Error>;
}

impl ClassSource for BTreeMap<String, Vec<u8>> {
    fn load(&self, internal: &str) -> Result<Option<Vec<u8>>, Error> {
        Ok(self.get(internal).cloned())
    }
}

#[derive(Clone, Debug)]
enum Root {
    Dir(PathBuf),
    Jar(PathBuf),
}

/// An ordered list of class path roots; the first root containing a class
/// wins.
#[derive(Clone, Debug, Default)]
pub struct ClassPath {
    roots: Vec<Root>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

impl ClassPath {
    /// Entries may be directories or `.jar`/`.zip` files. Each entry may
    /// itself be a list separated by the platform path separator.
    pub fn new(entries: &[PathBuf]) -> Result<ClassPath, Error> {
        let mut roots = Vec::new();
        for entry in entries {
            for p in std::env::split_paths(entry) {
                if p.as_os_str().is_empty() {
                    continue;
                }
                let meta = fs::metadata(&p).map_err(|e| io_error(&p, e))?;
                if meta.is_dir() {
                    roots.push(Root::Dir(p));
                } else {
                    roots.push(Root::Jar(p));
                }
            }
        }
        Ok(ClassPath { roots })
    }
}

impl ClassSource for ClassPath {
    fn load(&self, internal: &str) -> Result<Option<Vec<u8>>, Error> {
        let rel = format!("{internal}.class");
        for root in &self.roots {
            match root {
                Root::Dir(d) => {
                    let p = d.join(&rel);
                    if p.is_file() {
                        return fs::read(&p).map(Some).map_err(|e| io_error(&p, e));
                    }
                }
                Root::Jar(j) => {
                    let f = fs::File::open(j).map_err(|e| io_error(j, e))?;
                    let mut z = zip::ZipArchive::new(f).map_err(|e| io_error(j, e))?;
                    let found = match z.by_name(&rel) {
                        Ok(mut entry) => {
                            let mut out = Vec::new();
                            entry.read_to_end(&mut out).map_err(|e| io_error(j, e))?;
                            Some(out)
                        }
                        Err(zip::result::ZipError::FileNotFound) => None,
                        Err(e) => return Err(io_error(j, e)),
                    };
                    if found.is_some() {
                        return Ok(found);
                    }
                }
            }
        }
        Ok(None)
    }
}
