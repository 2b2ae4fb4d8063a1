#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::layout::{generate_layout, LayoutConfig};
use postdoc_core::paraphrase::{PosterContent, Topic};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = LayoutConfig::parse_toml(text) else {
        return;
    };
    // Keep the frame small enough that a run stays fast.
    if config.width > 1e5 || config.height > 1e5 || config.min_font_size < 1.0 {
        return;
    }
    let content = PosterContent {
        title: "Fuzz".into(),
        topics: vec![Topic {
            title: "Topic".into(),
            bullets: vec!["A bullet point of moderate length.".into()],
        }],
        images: vec![],
    };
    if let Ok(layout) = generate_layout(&content, &[], &config) {
        for r in layout.rects() {
            assert!(r.within(config.width, config.height));
        }
    }
});
