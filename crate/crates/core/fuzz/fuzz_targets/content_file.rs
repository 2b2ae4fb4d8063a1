#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::color::{assign_roles, DEFAULT_PALETTE};
use postdoc_core::layout::{generate_layout, LayoutConfig, DEFAULT_ASPECT_RATIO};
use postdoc_core::ngo::total_overlap;
use postdoc_core::paraphrase::PosterContent;
use postdoc_core::render::{render_svg, DEFAULT_FONT};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(content) = PosterContent::parse(text) else {
        return;
    };
    let ratios: Vec<f64> = content
        .images
        .iter()
        .map(|i| i.aspect_ratio.unwrap_or(DEFAULT_ASPECT_RATIO))
        .collect();
    if let Ok(layout) = generate_layout(&content, &ratios, &LayoutConfig::default()) {
        assert_eq!(total_overlap(&layout.rects()), 0.0);
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        render_svg(&layout, &roles, &content, DEFAULT_FONT).unwrap();
    }
});
