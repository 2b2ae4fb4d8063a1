//! Heuristic two-column poster layout.
//!
//! Images (with captions) stack in the left column, topic text boxes stack
//! in the right column, and a title box spans the top. Coordinates have a
//! bottom-left origin with `y` growing upward. Vertical placement inside the
//! body region of height `l`:
//!
//! ```text
//! dh1   = (l − Σ h_T) / (N_T + 1)
//! dh2   = (l − Σ (h_I + h_C) − k1·N_I) / (N_I + 1)      if N_I ≥ 3
//!       = min(dh1, (l − Σ (h_I + h_C) − k2·N_I) / (N_I + 1))  otherwise
//! Y_T^i = l − i·dh1 − Σ_{j<i} h_T^j                       (top edge)
//! Y_I^i = l − i·dh2 − Σ_{j<i} (h_I^j + h_C^j) − (i−1)·k2
//! Y_C^i = Y_I^i − h_I^i − k2
//! ```
//!
//! With at most two images, text boxes lying entirely below the lowest
//! caption are widened across both columns.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paraphrase::{PosterContent, Topic};

/// Aspect ratio assumed for images whose size is unknown.
pub const DEFAULT_ASPECT_RATIO: f64 = 4.0 / 3.0;

const FONT_SHRINK: f64 = 0.9;
const IMAGE_SHRINK: f64 = 0.95;
const BULLET_PREFIX: &str = "• ";

/// Box coordinates are snapped to multiples of this, which keeps vertical
/// flips exact.
pub const GRID: f64 = 1.0 / 64.0;

fn snap(v: f64) -> f64 {
    (v / GRID).round() * GRID
}

/// How the image width is derived from the left column width `b1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageWidthRule {
    /// `b1 − β`
    FullColumn,
    /// `b1 − β/N_I`
    DividedMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub width: f64,
    pub height: f64,
    pub title_frac: f64,
    pub b1_frac: f64,
    /// Horizontal margin of the text column.
    pub alpha: f64,
    /// Horizontal margin of the image column.
    pub beta: f64,
    /// Per-image spacing reduction when there are three or more images.
    pub k1: f64,
    /// Gap between an image and its caption.
    pub k2: f64,
    /// Top and bottom page margin.
    pub margin: f64,
    pub font_size: f64,
    pub min_font_size: f64,
    pub pad_text: f64,
    pub image_width_rule: ImageWidthRule,
    pub elongate: bool,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            width: 1200.0,
            height: 1600.0,
            title_frac: 0.10,
            b1_frac: 0.40,
            alpha: 24.0,
            beta: 24.0,
            k1: 10.0,
            k2: 8.0,
            margin: 24.0,
            font_size: 18.0,
            min_font_size: 8.0,
            pad_text: 12.0,
            image_width_rule: ImageWidthRule::FullColumn,
            elongate: true,
        }
    }
}

pub fn line_height(font_size: f64) -> f64 {
    1.3 * font_size
}

pub fn char_width(font_size: f64) -> f64 {
    0.55 * font_size
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |what: &str, v: f64| Err(Error::validation(format!("layout config: {what} = {v}")));
        if !(self.width > 0.0 && self.width.is_finite()) {
            return bad("width", self.width);
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return bad("height", self.height);
        }
        if !(self.b1_frac > 0.0 && self.b1_frac < 1.0) {
            return bad("b1_frac", self.b1_frac);
        }
        if !(self.title_frac > 0.0 && self.title_frac < 1.0) {
            return bad("title_frac", self.title_frac);
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("k1", self.k1),
            ("k2", self.k2),
            ("margin", self.margin),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, v);
            }
        }
        if !(self.pad_text > 0.0) {
            return bad("pad_text", self.pad_text);
        }
        if !(self.min_font_size > 0.0 && self.font_size >= self.min_font_size) {
            return bad("font_size", self.font_size);
        }
        if self.title_frac * self.height <= self.margin {
            return bad("title_frac", self.title_frac);
        }
        if self.body_height() <= 0.0 {
            return Err(Error::validation(
                "layout config leaves no room below the title",
            ));
        }
        Ok(())
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let config: LayoutConfig = toml::from_str(text)
            .map_err(|e| Error::validation(format!("invalid layout config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LayoutConfig::parse_toml(&text)
    }

    fn title_height(&self) -> f64 {
        self.title_frac * self.height
    }

    /// Height `l` left for the body below the title.
    pub fn body_height(&self) -> f64 {
        self.height - self.title_height() - 2.0 * self.margin
    }

    fn left_column(&self) -> f64 {
        self.b1_frac * self.width
    }
}

/// Characters that fit on one line of a box `box_width` wide.
pub fn chars_per_line(box_width: f64, font_size: f64, pad_text: f64) -> Result<usize> {
    let inner = box_width - 2.0 * pad_text;
    let n = (inner / char_width(font_size)).floor();
    if !(inner > 0.0) || !(n >= 1.0) {
        return Err(Error::validation(format!(
            "box width {box_width} is too narrow for text at font size {font_size}"
        )));
    }
    Ok(n as usize)
}

/// Estimated height of a block of lines wrapped at `chars_per_line`.
pub fn estimate_text_height<S: AsRef<str>>(
    lines: &[S],
    box_width: f64,
    font_size: f64,
    pad_text: f64,
) -> Result<f64> {
    let cpl = chars_per_line(box_width, font_size, pad_text)?;
    let count: usize = lines
        .iter()
        .map(|l| l.as_ref().chars().count().div_ceil(cpl))
        .sum();
    Ok(count as f64 * line_height(font_size) + 2.0 * pad_text)
}

/// The lines drawn for a topic: its title, then each bullet with a marker.
pub fn topic_lines(topic: &Topic) -> Vec<String> {
    std::iter::once(topic.title.clone())
        .chain(topic.bullets.iter().map(|b| format!("{BULLET_PREFIX}{b}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Mirrors the rectangle vertically within a frame of height `h`.
    pub fn flip_y(&self, h: f64) -> Rect {
        Rect {
            x1: self.x1,
            y1: h - self.y2,
            x2: self.x2,
            y2: h - self.y1,
        }
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x1 >= 0.0 && self.y1 >= 0.0 && self.x2 <= width && self.y2 <= height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    Title,
    Text,
    Image,
    Caption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentRef {
    Title,
    Topic(usize),
    Image(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutBox {
    pub kind: BoxKind,
    #[serde(flatten)]
    pub rect: Rect,
    pub content_ref: ContentRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// `y` grows upward from the bottom edge.
    BottomLeft,
    /// `y` grows downward from the top edge.
    TopLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosterLayout {
    pub frame: Frame,
    pub origin: Origin,
    pub config: LayoutConfig,
    /// Font size after any shrinking needed to fit the text.
    pub font_size: f64,
    pub dh1: f64,
    pub dh2: f64,
    pub title_box: LayoutBox,
    pub text_boxes: Vec<LayoutBox>,
    pub image_boxes: Vec<LayoutBox>,
    pub caption_boxes: Vec<LayoutBox>,
}

impl PosterLayout {
    pub fn boxes(&self) -> impl Iterator<Item = &LayoutBox> {
        std::iter::once(&self.title_box)
            .chain(&self.text_boxes)
            .chain(&self.image_boxes)
            .chain(&self.caption_boxes)
    }

    pub fn rects(&self) -> Vec<Rect> {
        self.boxes().map(|b| b.rect).collect()
    }

    pub fn boxes_mut(&mut self) -> impl Iterator<Item = &mut LayoutBox> {
        std::iter::once(&mut self.title_box)
            .chain(&mut self.text_boxes)
            .chain(&mut self.image_boxes)
            .chain(&mut self.caption_boxes)
    }
}

/// Flips every box between bottom-left and top-left origins. Applying it
/// twice is the identity.
pub fn to_render_coords(layout: &PosterLayout) -> PosterLayout {
    let mut out = layout.clone();
    let h = layout.frame.height;
    for b in out.boxes_mut() {
        b.rect = b.rect.flip_y(h);
    }
    out.origin = match layout.origin {
        Origin::BottomLeft => Origin::TopLeft,
        Origin::TopLeft => Origin::BottomLeft,
    };
    out
}

/// Aspect ratio (width over height) for each image of `content`: the value
/// stored in the content file, else the image file's header, else
/// [`DEFAULT_ASPECT_RATIO`]. Relative paths resolve against the working
/// directory.
pub fn resolve_aspect_ratios(content: &PosterContent) -> Vec<f64> {
    content
        .images
        .iter()
        .map(|img| {
            if let Some(ar) = img.aspect_ratio {
                return ar;
            }
            let from_file = img
                .image_path
                .as_deref()
                .filter(|p| !p.is_empty())
                .and_then(|p| image::image_dimensions(p).ok())
                .filter(|&(w, h)| w > 0 && h > 0)
                .map(|(w, h)| f64::from(w) / f64::from(h));
            from_file.unwrap_or(DEFAULT_ASPECT_RATIO)
        })
        .collect()
}

struct ImageColumn {
    widths: Vec<f64>,
    image_heights: Vec<f64>,
    caption_heights: Vec<f64>,
}

impl ImageColumn {
    fn stacked(&self) -> f64 {
        self.image_heights.iter().sum::<f64>() + self.caption_heights.iter().sum::<f64>()
    }
}

fn size_images(
    content: &PosterContent,
    aspect_ratios: &[f64],
    config: &LayoutConfig,
    font: f64,
    l: f64,
) -> Result<ImageColumn> {
    let n = content.images.len();
    let b1 = config.left_column();
    let full = match config.image_width_rule {
        ImageWidthRule::FullColumn => b1 - config.beta,
        ImageWidthRule::DividedMargin => b1 - config.beta / n.max(1) as f64,
    };
    let nf = n as f64;
    let mut scale = 1.0;
    loop {
        let w = snap(full * scale);
        let mut col = ImageColumn {
            widths: vec![w; n],
            image_heights: aspect_ratios.iter().map(|ar| w / ar).collect(),
            caption_heights: Vec::with_capacity(n),
        };
        let mut narrow = false;
        for img in &content.images {
            match estimate_text_height(&[img.caption.as_str()], w, font, config.pad_text) {
                Ok(h) => col.caption_heights.push(h),
                Err(_) => {
                    narrow = true;
                    break;
                }
            }
        }
        if narrow {
            return Err(Error::Overflow(format!(
                "{n} images with captions do not fit in a column of height {l:.1}"
            )));
        }
        let stacked = col.stacked();
        let fits = if n >= 3 {
            let dh2 = (l - stacked - config.k1 * nf) / (nf + 1.0);
            dh2 >= 0.0 && dh2 + nf * (config.k1 - config.k2) >= 0.0
        } else {
            l - stacked - config.k2 * nf >= 0.0
        };
        if fits {
            return Ok(col);
        }
        scale *= IMAGE_SHRINK;
    }
}

/// Top edges (relative to the body bottom) of boxes stacked with gap `dh`.
fn stack_tops(l: f64, dh: f64, heights: &[f64]) -> Vec<f64> {
    let mut above = 0.0;
    heights
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let top = l - (i + 1) as f64 * dh - above;
            above += h;
            top
        })
        .collect()
}

pub fn generate_layout(
    content: &PosterContent,
    aspect_ratios: &[f64],
    config: &LayoutConfig,
) -> Result<PosterLayout> {
    config.validate()?;
    content.validate()?;
    if aspect_ratios.len() != content.images.len() {
        return Err(Error::validation(format!(
            "{} aspect ratios for {} images",
            aspect_ratios.len(),
            content.images.len()
        )));
    }
    if let Some(ar) = aspect_ratios
        .iter()
        .find(|ar| !(**ar > 0.0 && ar.is_finite()))
    {
        return Err(Error::validation(format!(
            "aspect ratio must be positive, got {ar}"
        )));
    }

    let (w, h) = (config.width, config.height);
    let l = config.body_height();
    let bottom = config.margin;
    let b1 = config.left_column();
    let narrow = (snap(b1 + config.alpha / 2.0), snap(w - config.alpha / 2.0));
    let wide = (snap(config.beta / 2.0), narrow.1);
    let blocks: Vec<Vec<String>> = content.topics.iter().map(topic_lines).collect();
    let heights_at = |font: f64, width: f64| -> Result<Vec<f64>> {
        blocks
            .iter()
            .map(|b| estimate_text_height(b, width, font, config.pad_text))
            .collect()
    };

    // Shrink the font until both the narrow text column and the captioned
    // image column fit.
    let n_i = content.images.len();
    let mut font = config.font_size;
    let (mut text_heights, column) = loop {
        let heights = heights_at(font, narrow.1 - narrow.0)?;
        let needed: f64 = heights.iter().sum();
        let attempt = if needed <= l {
            size_images(content, aspect_ratios, config, font, l).map(|col| (heights, col))
        } else {
            let listed: Vec<String> = heights
                .iter()
                .enumerate()
                .map(|(i, h)| format!("topic {i} ({h:.1}px)"))
                .collect();
            Err(Error::Overflow(format!(
                "text boxes need {needed:.1}px but only {l:.1}px is available: {}",
                listed.join(", ")
            )))
        };
        let next = font * FONT_SHRINK;
        match attempt {
            Ok(fitted) => break fitted,
            Err(Error::Overflow(msg)) if next < config.min_font_size => {
                return Err(Error::Overflow(format!("{msg} (font size {font:.2})")));
            }
            Err(Error::Overflow(_)) => font = next,
            Err(other) => return Err(other),
        }
    };

    let stacked = column.stacked();
    let dh1_narrow = (l - text_heights.iter().sum::<f64>()) / (blocks.len() + 1) as f64;
    let dh2 = if n_i >= 3 {
        (l - stacked - config.k1 * n_i as f64) / (n_i + 1) as f64
    } else {
        dh1_narrow.min((l - stacked - config.k2 * n_i as f64) / (n_i + 1) as f64)
    };

    let mut image_boxes = Vec::with_capacity(n_i);
    let mut caption_boxes = Vec::with_capacity(n_i);
    let mut above = 0.0;
    let mut lowest_caption = l;
    for (i, img) in content.images.iter().enumerate() {
        let width = column.widths[i];
        let x1 = snap(config.beta / 2.0 + ((b1 - config.beta) - width).max(0.0) / 2.0);
        let (hi, hc) = (column.image_heights[i], column.caption_heights[i]);
        let y_img = l - (i + 1) as f64 * dh2 - above - i as f64 * config.k2;
        let y_cap = y_img - hi - config.k2;
        above += hi + hc;
        lowest_caption = y_cap - hc;
        image_boxes.push(LayoutBox {
            kind: BoxKind::Image,
            rect: Rect {
                x1,
                y1: bottom + y_img - hi,
                x2: x1 + width,
                y2: bottom + y_img,
            },
            content_ref: ContentRef::Image(img.element_id.clone()),
        });
        caption_boxes.push(LayoutBox {
            kind: BoxKind::Caption,
            rect: Rect {
                x1,
                y1: bottom + y_cap - hc,
                x2: x1 + width,
                y2: bottom + y_cap,
            },
            content_ref: ContentRef::Image(img.element_id.clone()),
        });
    }

    // Widen bottom text boxes that clear the image column. Widening only
    // shrinks heights, which can move a box upward; drop any box that then
    // rises above the lowest caption and try again.
    let narrow_heights = text_heights.clone();
    let mut elongated = vec![false; blocks.len()];
    if n_i <= 2 && config.elongate {
        let tops = stack_tops(l, dh1_narrow, &text_heights);
        for (i, top) in tops.iter().enumerate() {
            elongated[i] = *top <= lowest_caption;
        }
        let wide_heights = heights_at(font, wide.1 - wide.0)?;
        loop {
            for i in 0..blocks.len() {
                text_heights[i] = if elongated[i] {
                    wide_heights[i]
                } else {
                    narrow_heights[i]
                };
            }
            let dh1 = (l - text_heights.iter().sum::<f64>()) / (blocks.len() + 1) as f64;
            let tops = stack_tops(l, dh1, &text_heights);
            let mut changed = false;
            for (i, top) in tops.iter().enumerate() {
                if elongated[i] && *top > lowest_caption {
                    elongated[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    let dh1 = (l - text_heights.iter().sum::<f64>()) / (blocks.len() + 1) as f64;
    let dh2 = if n_i == 0 { dh1 } else { dh2 };
    let tops = stack_tops(l, dh1, &text_heights);
    let text_boxes = tops
        .iter()
        .zip(&text_heights)
        .enumerate()
        .map(|(i, (top, ht))| {
            let (x1, x2) = if elongated[i] { wide } else { narrow };
            LayoutBox {
                kind: BoxKind::Text,
                rect: Rect {
                    x1,
                    y1: bottom + top - ht,
                    x2,
                    y2: bottom + top,
                },
                content_ref: ContentRef::Topic(i),
            }
        })
        .collect();

    let title_box = LayoutBox {
        kind: BoxKind::Title,
        rect: Rect {
            x1: config.beta / 2.0,
            y1: h - config.title_height(),
            x2: w - config.alpha / 2.0,
            y2: h - config.margin,
        },
        content_ref: ContentRef::Title,
    };

    let mut layout = PosterLayout {
        frame: Frame {
            width: w,
            height: h,
        },
        origin: Origin::BottomLeft,
        config: config.clone(),
        font_size: font,
        dh1,
        dh2,
        title_box,
        text_boxes,
        image_boxes,
        caption_boxes,
    };
    for b in layout.boxes_mut() {
        let r = &mut b.rect;
        *r = Rect {
            x1: snap(r.x1),
            y1: snap(r.y1),
            x2: snap(r.x2),
            y2: snap(r.y2),
        };
    }
    for b in layout.boxes() {
        let r = &b.rect;
        if !(r.x1 < r.x2 && r.y1 < r.y2) || !r.within(w, h) {
            return Err(Error::Overflow(format!(
                "{:?} box {:?} at ({:.1},{:.1})-({:.1},{:.1}) does not fit the frame",
                b.kind, b.content_ref, r.x1, r.y1, r.x2, r.y2
            )));
        }
    }
    Ok(layout)
}

// ---------------------------------------------------------------------------
// Layout file

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FileBox {
    kind: BoxKind,
    content_ref: ContentRef,
    /// Bottom-left origin, y up.
    bottom_left: Rect,
    /// Top-left origin, y down.
    top_left: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayoutFile {
    frame: Frame,
    config: LayoutConfig,
    font_size: f64,
    dh1: f64,
    dh2: f64,
    boxes: Vec<FileBox>,
}

impl PosterLayout {
    /// Serializes with both coordinate conventions per box.
    pub fn to_json(&self) -> String {
        let base = match self.origin {
            Origin::BottomLeft => self.clone(),
            Origin::TopLeft => to_render_coords(self),
        };
        let h = base.frame.height;
        let file = LayoutFile {
            frame: base.frame,
            config: base.config.clone(),
            font_size: base.font_size,
            dh1: base.dh1,
            dh2: base.dh2,
            boxes: base
                .boxes()
                .map(|b| FileBox {
                    kind: b.kind,
                    content_ref: b.content_ref.clone(),
                    bottom_left: b.rect,
                    top_left: b.rect.flip_y(h),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("layout serializes");
        s.push('\n');
        s
    }

    /// Reads a layout file; boxes come back with a bottom-left origin.
    pub fn parse(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("invalid layout file: {e}")))?;
        let (w, h) = (file.frame.width, file.frame.height);
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::validation("layout frame must have positive size"));
        }
        let mut title = None;
        let (mut texts, mut images, mut captions) = (Vec::new(), Vec::new(), Vec::new());
        for (i, b) in file.boxes.into_iter().enumerate() {
            let r = b.bottom_left;
            if !(r.x1 < r.x2 && r.y1 < r.y2) {
                return Err(Error::validation(format!("layout box {i} is degenerate")));
            }
            if b.top_left != r.flip_y(h) {
                return Err(Error::validation(format!(
                    "layout box {i}: top-left coordinates disagree with bottom-left ones"
                )));
            }
            let lb = LayoutBox {
                kind: b.kind,
                rect: r,
                content_ref: b.content_ref,
            };
            match lb.kind {
                BoxKind::Title if title.is_none() => title = Some(lb),
                BoxKind::Title => return Err(Error::validation("layout has two title boxes")),
                BoxKind::Text => texts.push(lb),
                BoxKind::Image => images.push(lb),
                BoxKind::Caption => captions.push(lb),
            }
        }
        if images.len() != captions.len() {
            return Err(Error::validation("every image box needs a caption box"));
        }
        Ok(PosterLayout {
            frame: file.frame,
            origin: Origin::BottomLeft,
            config: file.config,
            font_size: file.font_size,
            dh1: file.dh1,
            dh2: file.dh2,
            title_box: title.ok_or_else(|| Error::validation("layout has no title box"))?,
            text_boxes: texts,
            image_boxes: images,
            caption_boxes: captions,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PosterLayout::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngo;
    use crate::paraphrase::PosterImage;

    fn content(n_t: usize, n_i: usize, bullet_len: usize) -> PosterContent {
        PosterContent {
            title: "A poster".into(),
            topics: (0..n_t)
                .map(|i| Topic {
                    title: format!("Topic {i}"),
                    bullets: (0..3).map(|_| "w".repeat(bullet_len)).collect(),
                })
                .collect(),
            images: (0..n_i)
                .map(|i| PosterImage {
                    element_id: format!("img{i}"),
                    image_path: None,
                    caption: format!("Caption for image {i}"),
                    aspect_ratio: None,
                })
                .collect(),
        }
    }

    #[test]
    fn text_height_estimates() {
        let empty: [&str; 0] = [];
        assert_eq!(
            estimate_text_height(&empty, 200.0, 10.0, 5.0).unwrap(),
            10.0
        );
        assert_eq!(
            estimate_text_height(&["short"], 200.0, 10.0, 5.0).unwrap(),
            13.0 + 10.0
        );
        // inner width 220 / 5.5 = 40 chars per line
        let hundred = "x".repeat(100);
        assert_eq!(chars_per_line(230.0, 10.0, 5.0).unwrap(), 40);
        let h = estimate_text_height(&[hundred.as_str()], 230.0, 10.0, 5.0).unwrap();
        assert!((h - (3.0 * 13.0 + 10.0)).abs() < 1e-12);
        assert!(estimate_text_height(&["x"], 10.0, 10.0, 5.0).is_err());
    }

    #[test]
    fn four_by_five_layout() {
        let layout =
            generate_layout(&content(5, 4, 60), &[1.5; 4], &LayoutConfig::default()).unwrap();
        assert_eq!(layout.text_boxes.len(), 5);
        assert_eq!(layout.image_boxes.len(), 4);
        assert_eq!(layout.caption_boxes.len(), 4);
        assert_eq!(ngo::total_overlap(&layout.rects()), 0.0);
        assert!(layout.dh1 >= 0.0 && layout.dh2 >= 0.0);
        for b in layout.boxes() {
            assert!(b.rect.within(1200.0, 1600.0));
        }
    }

    #[test]
    fn spacing_follows_formulas() {
        let config = LayoutConfig::default();
        let layout = generate_layout(&content(4, 4, 40), &[1.3; 4], &config).unwrap();
        let l = config.body_height();
        let sum_t: f64 = layout.text_boxes.iter().map(|b| b.rect.height()).sum();
        assert!((layout.dh1 - (l - sum_t) / 5.0).abs() < 4.0 * GRID);
        let top = layout.text_boxes[0].rect.y2 - config.margin;
        assert!((top - (l - layout.dh1)).abs() < GRID);
        let sum_ic: f64 = layout
            .image_boxes
            .iter()
            .chain(&layout.caption_boxes)
            .map(|b| b.rect.height())
            .sum();
        assert!((layout.dh2 - (l - sum_ic - config.k1 * 4.0) / 5.0).abs() < 4.0 * GRID);
        // caption sits k2 below its image
        let gap = layout.image_boxes[0].rect.y1 - layout.caption_boxes[0].rect.y2;
        assert!((gap - config.k2).abs() < GRID);
    }

    #[test]
    fn boxes_keep_topic_and_image_order() {
        let layout =
            generate_layout(&content(6, 3, 30), &[1.0; 3], &LayoutConfig::default()).unwrap();
        for pair in layout.text_boxes.windows(2) {
            assert!(pair[0].rect.y1 >= pair[1].rect.y2);
        }
        for pair in layout.image_boxes.windows(2) {
            assert!(pair[0].rect.y1 > pair[1].rect.y2);
        }
    }

    #[test]
    fn few_images_elongate_bottom_text() {
        let layout = generate_layout(&content(8, 1, 50), &[2.0], &LayoutConfig::default()).unwrap();
        let lowest = layout.caption_boxes[0].rect.y1;
        let wide: Vec<_> = layout
            .text_boxes
            .iter()
            .filter(|b| b.rect.x1 < 100.0)
            .collect();
        assert!(!wide.is_empty());
        for b in &wide {
            assert!(b.rect.y2 <= lowest);
        }
        assert_eq!(ngo::total_overlap(&layout.rects()), 0.0);
    }

    #[test]
    fn no_images_use_full_width() {
        let layout = generate_layout(&content(3, 0, 40), &[], &LayoutConfig::default()).unwrap();
        assert!(layout.text_boxes.iter().all(|b| b.rect.x1 == 12.0));
        assert_eq!(layout.dh1, layout.dh2);
    }

    #[test]
    fn font_shrinks_then_overflows() {
        let layout = generate_layout(&content(10, 0, 300), &[], &LayoutConfig::default()).unwrap();
        assert!(layout.font_size < 18.0);
        let err =
            generate_layout(&content(10, 0, 3000), &[], &LayoutConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)), "{err}");
    }

    #[test]
    fn tall_images_are_scaled_to_fit() {
        let layout =
            generate_layout(&content(2, 4, 20), &[0.6; 4], &LayoutConfig::default()).unwrap();
        assert!(layout.image_boxes[0].rect.width() < 480.0 - 24.0);
        assert_eq!(ngo::total_overlap(&layout.rects()), 0.0);
        assert!(layout.dh2 >= 0.0);
        // Shrinking makes captions wrap taller, so this never fits.
        let err = generate_layout(&content(2, 6, 20), &[0.3; 6], &LayoutConfig::default());
        assert!(matches!(err, Err(Error::Overflow(_))));
    }

    #[test]
    fn bad_inputs() {
        assert!(generate_layout(&content(2, 1, 20), &[], &LayoutConfig::default()).is_err());
        assert!(generate_layout(&content(2, 1, 20), &[0.0], &LayoutConfig::default()).is_err());
        assert!(generate_layout(&content(0, 0, 20), &[], &LayoutConfig::default()).is_err());
        let cfg = LayoutConfig {
            b1_frac: 1.0,
            ..LayoutConfig::default()
        };
        assert!(generate_layout(&content(1, 0, 20), &[], &cfg).is_err());
    }

    #[test]
    fn aspect_ratio_sources() {
        let dir = std::env::temp_dir().join(format!("postdoc-ar-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let png = dir.join("wide.png");
        image::RgbImage::new(30, 10).save(&png).unwrap();
        let mut c = content(1, 3, 10);
        c.images[0].aspect_ratio = Some(0.5);
        c.images[1].image_path = Some(png.to_string_lossy().into_owned());
        c.images[2].image_path = Some(dir.join("missing.png").to_string_lossy().into_owned());
        assert_eq!(
            resolve_aspect_ratios(&c),
            vec![0.5, 3.0, DEFAULT_ASPECT_RATIO]
        );
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn render_coords() {
        let r = Rect {
            x1: 0.0,
            y1: 0.0,
            x2: 2.0,
            y2: 2.0,
        };
        assert_eq!(
            r.flip_y(10.0),
            Rect {
                x1: 0.0,
                y1: 8.0,
                x2: 2.0,
                y2: 10.0
            }
        );
        let full = Rect {
            x1: 0.0,
            y1: 0.0,
            x2: 5.0,
            y2: 10.0,
        };
        assert_eq!(full.flip_y(10.0), full);
        let layout =
            generate_layout(&content(3, 2, 30), &[1.2, 0.8], &LayoutConfig::default()).unwrap();
        assert_eq!(to_render_coords(&to_render_coords(&layout)), layout);
    }

    #[test]
    fn layout_file_round_trip() {
        let layout =
            generate_layout(&content(3, 2, 30), &[1.2, 0.8], &LayoutConfig::default()).unwrap();
        let back = PosterLayout::parse(&layout.to_json()).unwrap();
        assert_eq!(back, layout);
        assert_eq!(
            PosterLayout::parse(&to_render_coords(&layout).to_json()).unwrap(),
            layout
        );
    }

    #[test]
    fn toml_config() {
        let cfg = LayoutConfig::parse_toml(
            "width = 800.0\nheight = 1000.0\nimage_width_rule = \"divided_margin\"",
        )
        .unwrap();
        assert_eq!(cfg.width, 800.0);
        assert_eq!(cfg.image_width_rule, ImageWidthRule::DividedMargin);
        assert_eq!(cfg.k1, 10.0);
        assert!(LayoutConfig::parse_toml("width = -1.0").is_err());
    }
}
