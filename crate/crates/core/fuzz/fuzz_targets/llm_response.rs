#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::paraphrase::{parse_completion_body, parse_response};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Some(topics) = parse_response(text) {
        assert!(!topics.is_empty());
    }
    if let Some(content) = parse_completion_body(text) {
        let _ = parse_response(&content);
    }
});
