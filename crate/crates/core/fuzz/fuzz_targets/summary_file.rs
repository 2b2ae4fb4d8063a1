#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::paraphrase::paraphrase_offline;
use postdoc_core::summary::SummaryFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = SummaryFile::parse(text) else {
        return;
    };
    for record in &file.summaries {
        if let Ok(content) = paraphrase_offline(record) {
            content.validate().unwrap();
        }
    }
});
