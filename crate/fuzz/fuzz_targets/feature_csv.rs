#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::features::{parse_feature_csv, write_feature_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = parse_feature_csv(data) {
        let mut out = Vec::new();
        write_feature_csv(&mut out, &records).unwrap();
        assert_eq!(parse_feature_csv(&out[..]).unwrap(), records);
    }
});
