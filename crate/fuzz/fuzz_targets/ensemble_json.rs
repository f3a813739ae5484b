#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::regress::Ensemble;
use ppaw_core::FeatureVector;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(e) = Ensemble::from_json(text) {
            let _ = e.peek(&FeatureVector::zeros());
        }
    }
});
