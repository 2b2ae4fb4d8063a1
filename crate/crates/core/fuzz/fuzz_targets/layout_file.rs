#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::layout::PosterLayout;
use postdoc_core::ngo::score_layout;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(layout) = PosterLayout::parse(text) else {
        return;
    };
    assert_eq!(PosterLayout::parse(&layout.to_json()).unwrap(), layout);
    let _ = score_layout(&layout);
});
