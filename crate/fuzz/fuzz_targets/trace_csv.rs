#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::ppaw::{parse_trace_csv, write_trace_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(trace) = parse_trace_csv(data) {
        let mut out = Vec::new();
        write_trace_csv(&mut out, &trace).unwrap();
        assert_eq!(parse_trace_csv(&out[..]).unwrap(), trace);
    }
});
