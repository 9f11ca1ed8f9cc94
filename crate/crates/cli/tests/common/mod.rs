#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}):\n{}", self.stdout))
    }
}

pub fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

pub fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clone-forge"));
    cmd.args(args).env_remove("CLONE_FORGE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let start = Instant::now();
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        elapsed: start.elapsed(),
    }
}

pub fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

pub fn table_op(n: u32, arity: usize, f: impl Fn(&[u32]) -> u32) -> Value {
    let len = (n as usize).pow(arity as u32);
    let table: Vec<u32> = (0..len)
        .map(|mut i| {
            let mut x = vec![0; arity];
            for slot in x.iter_mut().rev() {
                *slot = (i % n as usize) as u32;
                i /= n as usize;
            }
            f(&x)
        })
        .collect();
    json!({ "kind": "table", "domain_size": n, "arity": arity, "table": table })
}

pub fn relation(n: u32, arity: usize, tuples: &[&[u32]]) -> Value {
    json!({ "domain_size": n, "arity": arity, "tuples": tuples })
}

pub fn bool_maj() -> Value {
    table_op(2, 3, |x| u32::from(x.iter().sum::<u32>() >= 2))
}
