#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::regress::RegressionTree;
use ppaw_core::FeatureVector;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(tree) = RegressionTree::from_json(text) {
            // a tree that loads must be walkable
            let _ = tree.predict(&FeatureVector::zeros());
            let _ = tree.depth();
        }
    }
});
