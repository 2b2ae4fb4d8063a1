#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::corpus::{parse_record, record_line, EmbeddingMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for mode in [EmbeddingMode::default(), EmbeddingMode::PreNormalized] {
        if let Ok(entry) = parse_record(text, 1, mode) {
            assert!(entry.document.is_normalized());
            let line = record_line(&entry).unwrap();
            let back = parse_record(&line, 1, EmbeddingMode::PreNormalized).unwrap();
            assert_eq!(back.ground_truth, entry.ground_truth);
        }
    }
});
