//! Deterministic SVG output for a poster.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::color::{text_fill_for, Color, ColorRoles};
use crate::error::{Error, Result};
use crate::layout::{
    char_width, chars_per_line, line_height, to_render_coords, topic_lines, ContentRef, LayoutBox,
    Origin, PosterLayout, Rect,
};
use crate::paraphrase::{PosterContent, PosterImage};

pub const DEFAULT_FONT: &str = "Helvetica";

const CORNER_RADIUS: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub font_name: String,
    /// Relative image paths are resolved against this directory when
    /// checking that the file exists.
    pub image_base: Option<PathBuf>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            font_name: DEFAULT_FONT.into(),
            image_base: None,
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn hard_wrap(chars: &[char], cpl: usize) -> Vec<String> {
    chars.chunks(cpl).map(|c| c.iter().collect()).collect()
}

/// Wraps `text` at `cpl` characters, preferring word boundaries. Never
/// produces more than `ceil(len/cpl)` lines, falling back to a hard wrap when
/// word wrapping would.
pub fn wrap_line(text: &str, cpl: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    let budget = chars.len().div_ceil(cpl);
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut current_len = 0usize;
    for word in text.split(' ').filter(|w| !w.is_empty()) {
        let wlen = word.chars().count();
        if current_len > 0 && current_len + 1 + wlen <= cpl {
            current.push(' ');
            current.push_str(word);
            current_len += 1 + wlen;
            continue;
        }
        if current_len > 0 {
            lines.push(std::mem::take(&mut current));
        }
        let wchars: Vec<char> = word.chars().collect();
        let mut pieces = hard_wrap(&wchars, cpl);
        let last = pieces.pop().unwrap_or_default();
        lines.extend(pieces);
        current_len = last.chars().count();
        current = last;
    }
    if current_len > 0 {
        lines.push(current);
    }
    if lines.len() > budget {
        hard_wrap(&chars, cpl)
    } else {
        lines
    }
}

fn num(v: f64) -> String {
    // Display gives the shortest string that parses back to the same value.
    format!("{v}")
}

fn rect_attrs(r: &Rect) -> String {
    format!(
        r#"x="{}" y="{}" width="{}" height="{}""#,
        num(r.x1),
        num(r.y1),
        num(r.width()),
        num(r.height())
    )
}

struct Writer<'a> {
    out: String,
    font: &'a str,
    font_size: f64,
    pad: f64,
}

impl Writer<'_> {
    /// Writes wrapped lines as tspans starting at the top of `r`.
    fn text_block(&mut self, r: &Rect, lines: &[(String, bool)], fill: Color) -> Result<()> {
        let cpl = chars_per_line(r.width(), self.font_size, self.pad)?;
        let lh = line_height(self.font_size);
        let x = r.x1 + self.pad;
        let _ = write!(
            self.out,
            r#"<text font-family="{}" font-size="{}" fill="{fill}">"#,
            escape(self.font),
            num(self.font_size)
        );
        let mut row = 0usize;
        for (line, bold) in lines {
            for piece in wrap_line(line, cpl) {
                let y = r.y1 + self.pad + row as f64 * lh + self.font_size;
                let weight = if *bold { r#" font-weight="bold""# } else { "" };
                let _ = write!(
                    self.out,
                    r#"<tspan x="{}" y="{}"{weight}>{}</tspan>"#,
                    num(x),
                    num(y),
                    escape(&piece)
                );
                row += 1;
            }
        }
        self.out.push_str("</text>");
        Ok(())
    }
}

fn image_exists(img: &PosterImage, base: Option<&Path>) -> bool {
    let Some(path) = img.image_path.as_deref().filter(|p| !p.is_empty()) else {
        return false;
    };
    let p = Path::new(path);
    match base {
        Some(b) if p.is_relative() => b.join(p).is_file(),
        _ => p.is_file(),
    }
}

fn dangling(b: &LayoutBox) -> Error {
    Error::validation(format!(
        "{:?} box refers to {:?}, which the content does not contain",
        b.kind, b.content_ref
    ))
}

/// Renders with default options.
pub fn render_svg(
    layout: &PosterLayout,
    roles: &ColorRoles,
    content: &PosterContent,
    font_name: &str,
) -> Result<String> {
    let options = RenderOptions {
        font_name: font_name.into(),
        ..RenderOptions::default()
    };
    render_svg_with(layout, roles, content, &options)
}

pub fn render_svg_with(
    layout: &PosterLayout,
    roles: &ColorRoles,
    content: &PosterContent,
    options: &RenderOptions,
) -> Result<String> {
    let layout = match layout.origin {
        Origin::TopLeft => layout.clone(),
        Origin::BottomLeft => to_render_coords(layout),
    };
    let (w, h) = (layout.frame.width, layout.frame.height);
    let on_background = text_fill_for(roles.background);
    let mut wr = Writer {
        out: String::new(),
        font: &options.font_name,
        font_size: layout.font_size,
        pad: layout.config.pad_text,
    };

    let _ = write!(
        wr.out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(
        wr.out,
        r#"<rect class="background" x="0" y="0" width="{}" height="{}" fill="{}"/>"#,
        num(w),
        num(h),
        roles.background
    );

    // Title: one centered line, sized to fit the box.
    let t = &layout.title_box.rect;
    let title_chars = content.title.chars().count().max(1) as f64;
    let title_size = (0.45 * t.height())
        .min((t.width() - 2.0 * wr.pad) / (char_width(1.0) * title_chars))
        .max(1.0);
    let (cx, cy) = t.center();
    let _ = writeln!(
        wr.out,
        r#"<text class="title" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-family="{}" font-size="{}" font-weight="bold" fill="{}">{}</text>"#,
        num(cx),
        num(cy),
        escape(&options.font_name),
        num(title_size),
        on_background,
        escape(&content.title)
    );

    for b in &layout.text_boxes {
        let ContentRef::Topic(i) = b.content_ref else {
            return Err(dangling(b));
        };
        let topic = content.topics.get(i).ok_or_else(|| dangling(b))?;
        let lines: Vec<(String, bool)> = topic_lines(topic)
            .into_iter()
            .enumerate()
            .map(|(k, l)| (l, k == 0))
            .collect();
        let _ = write!(
            wr.out,
            r#"<g class="text-box" data-topic="{i}"><rect {} rx="{}" ry="{}" fill="{}"/>"#,
            rect_attrs(&b.rect),
            num(CORNER_RADIUS),
            num(CORNER_RADIUS),
            roles.box_fill
        );
        wr.text_block(&b.rect, &lines, roles.text_fill)?;
        wr.out.push_str("</g>\n");
    }

    for (b, cap) in layout.image_boxes.iter().zip(&layout.caption_boxes) {
        let ContentRef::Image(id) = &b.content_ref else {
            return Err(dangling(b));
        };
        let img = content
            .images
            .iter()
            .find(|im| &im.element_id == id)
            .ok_or_else(|| dangling(b))?;
        if cap.content_ref != b.content_ref {
            return Err(dangling(cap));
        }
        let _ = write!(
            wr.out,
            r#"<g class="image-box" data-image="{}">"#,
            escape(id)
        );
        if image_exists(img, options.image_base.as_deref()) {
            let _ = write!(
                wr.out,
                r#"<image {} preserveAspectRatio="xMidYMid meet" xlink:href="{}"/>"#,
                rect_attrs(&b.rect),
                escape(img.image_path.as_deref().unwrap_or_default())
            );
        } else {
            let _ = write!(
                wr.out,
                r#"<rect {} fill="{}" stroke="{}"/>"#,
                rect_attrs(&b.rect),
                roles.box_fill,
                roles.text_fill
            );
            let (px, py) = b.rect.center();
            let _ = write!(
                wr.out,
                r#"<text x="{}" y="{}" text-anchor="middle" font-family="{}" font-size="{}" fill="{}">{}</text>"#,
                num(px),
                num(py),
                escape(&options.font_name),
                num(layout.font_size),
                roles.text_fill,
                escape(&format!("image {id}"))
            );
        }
        wr.out.push_str("</g>\n");
        let _ = write!(wr.out, r#"<g class="caption" data-image="{}">"#, escape(id));
        wr.text_block(&cap.rect, &[(img.caption.clone(), false)], on_background)?;
        wr.out.push_str("</g>\n");
    }

    wr.out.push_str("</svg>\n");
    Ok(wr.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{assign_roles, DEFAULT_PALETTE};
    use crate::layout::{generate_layout, Frame, LayoutConfig};
    use crate::paraphrase::Topic;

    fn content(n_t: usize, n_i: usize) -> PosterContent {
        PosterContent {
            title: "Poster & <Title>".into(),
            topics: (0..n_t)
                .map(|i| Topic {
                    title: format!("Topic {i}"),
                    bullets: vec!["alpha beta gamma delta".repeat(3), "short".into()],
                })
                .collect(),
            images: (0..n_i)
                .map(|i| PosterImage {
                    element_id: format!("img{i}"),
                    image_path: Some(format!("/nonexistent/img{i}.png")),
                    caption: format!("Figure {i}"),
                    aspect_ratio: None,
                })
                .collect(),
        }
    }

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn wrapping_respects_line_budget() {
        assert_eq!(wrap_line("", 10), Vec::<String>::new());
        assert_eq!(wrap_line("aaa bbb ccc", 7), ["aaa bbb", "ccc"]);
        let hard = wrap_line("abcdefghij", 4);
        assert_eq!(hard, ["abcd", "efgh", "ij"]);
        // Word wrap would need 3 lines; the budget is ceil(11/6) = 2.
        let forced = wrap_line("aaaa bbbb c", 6);
        assert_eq!(forced.len(), 2);
    }

    #[test]
    fn title_only_has_two_shapes() {
        let layout = generate_layout(&content(1, 0), &[], &LayoutConfig::default()).unwrap();
        let mut bare = layout.clone();
        bare.text_boxes.clear();
        let empty = PosterContent {
            title: "Only a title".into(),
            topics: vec![],
            images: vec![],
        };
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        let svg = render_svg(&bare, &roles, &empty, DEFAULT_FONT).unwrap();
        let shapes = count(&svg, "<rect") + count(&svg, "<text") + count(&svg, "<image");
        assert_eq!(shapes, 2);
    }

    #[test]
    fn counts_groups_and_is_deterministic() {
        let c = content(5, 4);
        let layout = generate_layout(&c, &[1.5; 4], &LayoutConfig::default()).unwrap();
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        let a = render_svg(&layout, &roles, &c, "Georgia").unwrap();
        let b = render_svg(&layout, &roles, &c, "Georgia").unwrap();
        assert_eq!(a, b);
        assert_eq!(count(&a, r#"class="text-box""#), 5);
        assert_eq!(count(&a, r#"class="image-box""#), 4);
        assert_eq!(count(&a, r#"class="caption""#), 4);
        assert!(a.contains("Poster &amp; &lt;Title&gt;"));
        assert!(a.contains(r#"font-family="Georgia""#));
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let c = content(3, 1);
        let layout = generate_layout(&c, &[1.0], &LayoutConfig::default()).unwrap();
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        let mut fewer = c.clone();
        fewer.topics.pop();
        assert!(render_svg(&layout, &roles, &fewer, DEFAULT_FONT).is_err());
        let mut no_images = c.clone();
        no_images.images.clear();
        let err = render_svg(&layout, &roles, &no_images, DEFAULT_FONT).unwrap_err();
        assert!(err.to_string().contains("img0"), "{err}");
    }

    #[test]
    fn existing_image_is_referenced() {
        let dir = std::env::temp_dir().join(format!("postdoc-render-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("pic.png"), b"png").unwrap();
        let mut c = content(1, 1);
        c.images[0].image_path = Some("pic.png".into());
        let layout = generate_layout(&c, &[1.0], &LayoutConfig::default()).unwrap();
        let roles = assign_roles(&DEFAULT_PALETTE).unwrap();
        let opts = RenderOptions {
            image_base: Some(dir.clone()),
            ..RenderOptions::default()
        };
        let svg = render_svg_with(&layout, &roles, &c, &opts).unwrap();
        assert!(svg.contains(r#"xlink:href="pic.png""#));
        let svg = render_svg(&layout, &roles, &c, DEFAULT_FONT).unwrap();
        assert!(!svg.contains("<image"));
        std::fs::remove_dir_all(dir).ok();
        let _ = Frame {
            width: 1.0,
            height: 1.0,
        };
    }
}
