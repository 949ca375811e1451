#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("walklab binary runs")
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

/// Fresh scratch directory under the target dir.
pub fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
