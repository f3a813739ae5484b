#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

pub fn ppaw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ppaw"))
}

pub fn run(args: &[&str]) -> Output {
    ppaw().args(args).output().expect("binary runs")
}

/// Runs a command that must succeed; returns its stdout.
pub fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Starts `ppaw gateway` on an ephemeral port, replays `manifest` through
/// `ppaw wearable`, and returns both processes' outputs.
pub fn link_session(manifest: &Path, gateway_out: &Path, wearable_out: &Path, extra: &[&str]) -> (Output, Output) {
    let mut gw = ppaw()
        .args(["gateway", "--listen", "127.0.0.1:0", "-o", s(gateway_out)])
        .args(extra)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut err = BufReader::new(gw.stderr.take().unwrap());
    let mut line = String::new();
    err.read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening ").unwrap_or_else(|| panic!("gateway said {line:?}")).to_string();
    let w = run(&["wearable", "--connect", &addr, "--data", s(manifest), "-o", s(wearable_out)]);
    let mut rest = Vec::new();
    std::io::Read::read_to_end(&mut err, &mut rest).unwrap();
    let mut g = gw.wait_with_output().unwrap();
    g.stderr = rest;
    (g, w)
}
