#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::ingest::{parse_accel_csv, write_accel_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = parse_accel_csv(data) {
        // accepted input survives a write/parse cycle
        let mut out = Vec::new();
        write_accel_csv(&mut out, &samples).unwrap();
        assert_eq!(parse_accel_csv(&out[..]).unwrap(), samples);
    }
});
