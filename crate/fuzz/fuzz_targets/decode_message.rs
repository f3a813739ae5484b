#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::link::Message;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = Message::decode(data) {
        let line = m.encode().unwrap();
        assert_eq!(Message::decode(line.as_bytes()).unwrap(), m);
    }
});
