// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! `bcb`: translate annotated JVM classfiles to Boogie.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use bcb_core::classpath::ClassPath;
use bcb_core::pipeline::{self, Config};
use bcb_core::spec::{Namespace, DEFAULT_NAMESPACE};
use clap::Parser;

const EXIT_CONFIG: u8 = 3;
const EXIT_VERIFIER: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "bcb", version, about = "Translate annotated JVM classfiles to Boogie")]
struct Cli {
    /// Class path entry: a directory or a .jar/.zip archive. Repeatable.
    #[arg(long = "classpath", value_name = "PATH")]
    classpath: Vec<PathBuf>,

    /// Entry class, dotted or internal form. Repeatable.
    #[arg(long = "class", value_name = "NAME")]
    class: Vec<String>,

    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Replace the built-in heap model.
    #[arg(long, value_name = "FILE")]
    prelude: Option<PathBuf>,

    /// Package of the specification library.
    #[arg(long, value_name = "PREFIX", default_value = DEFAULT_NAMESPACE)]
    namespace: String,

    /// Verifier command run on the output file, e.g. `boogie /quiet`.
    #[arg(long, value_name = "COMMAND", requires = "output")]
    check: Option<String>,
}

#[derive(Debug)]
struct Failure {
    exit: u8,
    code: &'static str,
    message: String,
    location: Option<String>,
}

impl Failure {
    fn config(message: String) -> Failure {
        Failure {
            exit: EXIT_CONFIG,
            code: "E_IO",
            message,
            location: None,
        }
    }
}

impl From<pipeline::Error> for Failure {
    fn from(e: pipeline::Error) -> Failure {
        Failure {
            exit: e.exit_code() as u8,
            code: e.code(),
            location: e.location(),
            message: e.to_string(),
        }
    }
}

/// Write through a sibling temporary file so readers never see a partial
/// output.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a file path"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(text.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.class.is_empty() {
        return Err(Failure::config("at least one --class is required".into()));
    }
    let prelude = match &cli.prelude {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let config = Config {
        namespace: Namespace::new(&cli.namespace),
        prelude,
        ..Config::default()
    };
    let classpath = ClassPath::new(&cli.classpath)?;
    let translation = pipeline::translate(&classpath, &cli.class, &config)?;

    let Some(out) = &cli.output else {
        print!("{}", translation.text);
        return Ok(());
    };
    write_atomic(out, &translation.text).map_err(|e| Failure::config(format!("{}: {e}", out.display())))?;

    if let Some(check) = &cli.check {
        let mut words = check.split_whitespace();
        let program = words
            .next()
            .ok_or_else(|| Failure::config("empty --check command".into()))?;
        let status = Command::new(program)
            .args(words)
            .arg(out)
            .status()
            .map_err(|e| Failure::config(format!("{program}: {e}")))?;
        if !status.success() {
            return Err(Failure {
                exit: EXIT_VERIFIER,
                code: "E_VERIFY",
                message: format!("`{check}` failed on {} ({status})", out.display()),
                location: None,
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            if let Some(loc) = f.location {
                eprintln!("  --> {loc}");
            }
            ExitCode::from(f.exit)
        }
    }
}
