#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::weights::WeightsFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = WeightsFile::parse(text) {
        assert!(file.w.as_slice().iter().all(|&x| x >= 0.0));
        assert_eq!(WeightsFile::parse(&file.to_json()).unwrap(), file);
    }
});
