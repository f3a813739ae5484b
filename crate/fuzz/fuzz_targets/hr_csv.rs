#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::ingest::{parse_hr_csv, write_hr_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = parse_hr_csv(data) {
        let mut out = Vec::new();
        write_hr_csv(&mut out, &samples).unwrap();
        assert_eq!(parse_hr_csv(&out[..]).unwrap(), samples);
    }
});
