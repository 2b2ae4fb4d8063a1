#![no_main]

use libfuzzer_sys::fuzz_target;
use postdoc_core::color::{assign_roles, parse_palette, Color, ColorRoles};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = text.parse::<Color>() {
        assert_eq!(c.to_string().parse::<Color>().unwrap(), c);
    }
    if let Ok(palette) = parse_palette(text) {
        if let Ok(roles) = assign_roles(&palette) {
            assert_eq!(ColorRoles::parse(&roles.to_json()).unwrap(), roles);
        }
    }
    let _ = ColorRoles::parse(text);
});
