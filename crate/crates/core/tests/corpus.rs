//! Replays the checked-in fuzz seeds through the same properties the fuzz
//! targets assert, so the seeds stay meaningful as formats evolve.

use std::fs;
use std::path::PathBuf;

use ppaw_core::features::{parse_feature_csv, write_feature_csv};
use ppaw_core::ingest::{parse_accel_csv, parse_hr_csv, Manifest};
use ppaw_core::link::{parse_transcript, Message};
use ppaw_core::ppaw::{parse_trace_csv, write_trace_csv};
use ppaw_core::regress::{Ensemble, RegressionTree};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn csv_seeds() {
    for (name, b) in seeds("accel_csv") {
        assert_eq!(parse_accel_csv(&b[..]).is_ok(), name == "two_rows", "{name}");
    }
    for (name, b) in seeds("hr_csv") {
        assert_eq!(parse_hr_csv(&b[..]).is_ok(), name == "two_rows", "{name}");
    }
    for (name, b) in seeds("feature_csv") {
        let recs = parse_feature_csv(&b[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_feature_csv(&mut out, &recs).unwrap();
        assert_eq!(out, b, "{name}");
    }
    for (name, b) in seeds("trace_csv") {
        let trace = parse_trace_csv(&b[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_trace_csv(&mut out, &trace).unwrap();
        assert_eq!(out, b, "{name}");
    }
}

#[test]
fn message_seeds() {
    for (name, b) in seeds("decode_message") {
        match Message::decode(&b) {
            Ok(m) => assert_eq!(m.encode().unwrap().as_bytes(), &b[..], "{name}"),
            Err(_) => assert!(["unknown", "trailing"].contains(&name.as_str()), "{name}"),
        }
    }
    for (name, b) in seeds("transcript") {
        assert!(parse_transcript(&b[..]).is_ok(), "{name}");
    }
}

#[test]
fn model_and_manifest_seeds() {
    for (name, b) in seeds("manifest") {
        let m = Manifest::from_json(text(&b)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(m.to_json().as_bytes(), &b[..]);
    }
    for (name, b) in seeds("tree_json") {
        assert_eq!(RegressionTree::from_json(text(&b)).is_ok(), name != "cycle", "{name}");
    }
    for (name, b) in seeds("ensemble_json") {
        assert!(Ensemble::from_json(text(&b)).is_ok(), "{name}");
    }
}
