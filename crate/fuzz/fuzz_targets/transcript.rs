#![no_main]

use libfuzzer_sys::fuzz_target;
use ppaw_core::link::{parse_transcript, transcript_line};

fuzz_target!(|data: &[u8]| {
    if let Ok(lines) = parse_transcript(data) {
        let text: String = lines
            .iter()
            .map(|(d, m)| transcript_line(*d, &m.encode().unwrap()))
            .collect();
        assert_eq!(parse_transcript(text.as_bytes()).unwrap(), lines);
    }
});
