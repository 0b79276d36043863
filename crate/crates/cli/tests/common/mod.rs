#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

pub const BIN: &str = env!("CARGO_BIN_EXE_airy-ensemble");

/// Everything a run produced: exit code, stdout, stderr and the files
/// written under the output directory.
#[derive(Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub code: Option<i32>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub files: BTreeMap<String, Vec<u8>>,
}

pub fn run(args: &[&str], out: Option<&Path>) -> RunOutput {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    let o = cmd.output().expect("binary runs");
    let mut files = BTreeMap::new();
    if let Some(dir) = out {
        if dir.is_dir() {
            for e in std::fs::read_dir(dir).unwrap() {
                let e = e.unwrap();
                files.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
            }
        } else if dir.is_file() {
            files.insert("<file>".into(), std::fs::read(dir).unwrap());
        }
    }
    RunOutput { code: o.status.code(), stdout: o.stdout, stderr: o.stderr, files }
}

/// Runs `args` twice with one thread and once with eight, each into a fresh
/// output location, and returns the first run if all three agree.
pub fn run_deterministic(args: &[&str], threads: bool, out_is_file: bool) -> Result<RunOutput, String> {
    let mut runs = Vec::new();
    for th in ["1", "1", "8"] {
        let tmp = tempfile::tempdir().unwrap();
        let out = if out_is_file { tmp.path().join("table.csv") } else { tmp.path().join("out") };
        let mut a: Vec<&str> = args.to_vec();
        if threads {
            a.extend(["--threads", th]);
        }
        runs.push(run(&a, Some(&out)));
    }
    if runs[0] != runs[1] {
        return Err(format!("{args:?}: two runs differ"));
    }
    if runs[0] != runs[2] {
        return Err(format!("{args:?}: --threads 1 and 8 differ"));
    }
    Ok(runs.swap_remove(0))
}
