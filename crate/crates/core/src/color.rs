//! Palette roles from WCAG luminance.
//!
//! The dominant color of a palette is the one with the largest summed
//! contrast ratio against every other entry. It becomes the background, its
//! RGB complement fills the text boxes, and the text itself is black or white,
//! whichever contrasts more with the box fill.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const BLACK: Color = Color::rgb(0, 0, 0);
    pub const WHITE: Color = Color::rgb(255, 255, 255);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b }
    }

    pub fn complement(self) -> Self {
        Color::rgb(255 - self.r, 255 - self.g, 255 - self.b)
    }

    pub fn hex(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl FromStr for Color {
    type Err = Error;

    /// Accepts `#RRGGBB` or `RRGGBB`, either case.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t.strip_prefix('#').unwrap_or(t);
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::validation(format!(
                "invalid color {s:?}, expected #RRGGBB"
            )));
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).expect("checked hex");
        Ok(Color::rgb(channel(0), channel(2), channel(4)))
    }
}

impl TryFrom<String> for Color {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Color> for String {
    fn from(c: Color) -> Self {
        c.to_string()
    }
}

fn linear(channel: u8) -> f64 {
    let v = f64::from(channel) / 255.0;
    if v <= 0.03928 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// WCAG relative luminance in `[0, 1]`.
pub fn luminance(c: Color) -> f64 {
    0.2126 * linear(c.r) + 0.7152 * linear(c.g) + 0.0722 * linear(c.b)
}

/// WCAG contrast ratio, symmetric and at least 1.
pub fn relative_luminance(a: Color, b: Color) -> f64 {
    let (la, lb) = (luminance(a), luminance(b));
    (la.max(lb) + 0.05) / (la.min(lb) + 0.05)
}

/// Entry with the largest summed contrast against the rest of the palette;
/// the earliest entry wins ties.
pub fn dominant_color(palette: &[Color]) -> Result<Color> {
    if palette.len() < 2 {
        return Err(Error::validation(format!(
            "a palette needs at least 2 colors, got {}",
            palette.len()
        )));
    }
    let mut best: Option<(Color, f64)> = None;
    for (i, &c) in palette.iter().enumerate() {
        let score: f64 = palette
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &o)| relative_luminance(c, o))
            .sum();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((c, score));
        }
    }
    Ok(best.expect("palette is nonempty").0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorRoles {
    pub background: Color,
    pub box_fill: Color,
    pub text_fill: Color,
}

impl ColorRoles {
    pub fn parse(text: &str) -> Result<Self> {
        let roles: ColorRoles = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("invalid roles file: {e}")))?;
        if roles.text_fill != Color::BLACK && roles.text_fill != Color::WHITE {
            return Err(Error::validation(format!(
                "text fill must be #000000 or #FFFFFF, got {}",
                roles.text_fill
            )));
        }
        Ok(roles)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ColorRoles::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("roles serialize");
        s.push('\n');
        s
    }
}

/// Black unless white contrasts strictly better with `fill`.
pub fn text_fill_for(fill: Color) -> Color {
    if relative_luminance(fill, Color::BLACK) >= relative_luminance(fill, Color::WHITE) {
        Color::BLACK
    } else {
        Color::WHITE
    }
}

pub fn assign_roles(palette: &[Color]) -> Result<ColorRoles> {
    let background = dominant_color(palette)?;
    let box_fill = background.complement();
    Ok(ColorRoles {
        background,
        box_fill,
        text_fill: text_fill_for(box_fill),
    })
}

/// Palette used when none is supplied.
pub const DEFAULT_PALETTE: [Color; 5] = [
    Color::rgb(0x1B, 0x3A, 0x5C),
    Color::rgb(0xF2, 0xE8, 0xCF),
    Color::rgb(0x6A, 0x99, 0x4E),
    Color::rgb(0xBC, 0x47, 0x49),
    Color::rgb(0xA7, 0xC9, 0x57),
];

/// Parses a comma-separated list of hex colors.
pub fn parse_palette(list: &str) -> Result<Vec<Color>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Color {
        s.parse().unwrap()
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(c("#112233"), Color::rgb(0x11, 0x22, 0x33));
        assert_eq!(c("aabbcc").to_string(), "#AABBCC");
        assert!("#12345".parse::<Color>().is_err());
        assert!("#12345G".parse::<Color>().is_err());
        assert!("#1234567".parse::<Color>().is_err());
    }

    #[test]
    fn luminance_examples() {
        assert!((luminance(Color::WHITE) - 1.0).abs() < 1e-12);
        assert_eq!(luminance(Color::BLACK), 0.0);
        assert!((luminance(c("#808080")) - 0.2159).abs() < 1e-4);
    }

    #[test]
    fn contrast_examples() {
        assert!((relative_luminance(Color::WHITE, Color::BLACK) - 21.0).abs() < 1e-12);
        assert_eq!(relative_luminance(c("#336699"), c("#336699")), 1.0);
        let gray = c("#808080");
        assert!((relative_luminance(Color::WHITE, gray) - 3.949).abs() < 1e-3);
        assert_eq!(
            relative_luminance(Color::WHITE, gray),
            relative_luminance(gray, Color::WHITE)
        );
    }

    #[test]
    fn dominant_examples() {
        assert_eq!(
            dominant_color(&[Color::WHITE, Color::BLACK]).unwrap(),
            Color::WHITE
        );
        assert_eq!(
            dominant_color(&[Color::WHITE, Color::BLACK, c("#808080")]).unwrap(),
            Color::BLACK
        );
        let same = [c("#123456"); 3];
        assert_eq!(dominant_color(&same).unwrap(), same[0]);
        assert!(dominant_color(&[Color::WHITE]).is_err());
    }

    #[test]
    fn role_assignment() {
        assert_eq!(c("#112233").complement(), c("#EEDDCC"));
        assert_eq!(text_fill_for(c("#EEDDCC")), Color::BLACK);
        assert_eq!(text_fill_for(Color::BLACK), Color::WHITE);
        let roles = assign_roles(&[Color::WHITE, Color::BLACK, c("#808080")]).unwrap();
        assert_eq!(roles.background, Color::BLACK);
        assert_eq!(roles.box_fill, Color::WHITE);
        assert_eq!(roles.text_fill, Color::BLACK);
    }

    #[test]
    fn roles_file_round_trip() {
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        assert_eq!(ColorRoles::parse(&roles.to_json()).unwrap(), roles);
        let bad = r##"{"background":"#000000","box_fill":"#FFFFFF","text_fill":"#FF0000"}"##;
        assert!(ColorRoles::parse(bad).is_err());
    }

    #[test]
    fn palette_list() {
        let p = parse_palette("#000000, #FFFFFF,").unwrap();
        assert_eq!(p, vec![Color::BLACK, Color::WHITE]);
        assert!(parse_palette("#000000,nope").is_err());
    }
}
