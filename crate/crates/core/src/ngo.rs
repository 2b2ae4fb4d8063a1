//! Layout aesthetics: equilibrium, padding, density and overlap, averaged
//! with equal weights into an overall score.
//!
//! Density is `min(1, Σa / (W·H·B))` and overlap is
//! `1 − min(1, ΣΣ O_eff / (W·H))`. Taking `max` in either place would pin
//! density at or above 1 and overlap at or below 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{PosterLayout, Rect};

fn check(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::validation(format!(
            "frame must have positive size, got {width}x{height}"
        )));
    }
    if rects.is_empty() {
        return Err(Error::validation("layout has no boxes"));
    }
    let area: f64 = rects.iter().map(Rect::area).sum();
    if !(area > 0.0) {
        return Err(Error::validation("layout boxes have zero total area"));
    }
    Ok(area)
}

/// `1 − (|EM_x| + |EM_y|)/2`, where `EM` is the area-weighted offset of box
/// centers from the frame center.
pub fn equilibrium(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    let area = check(width, height, rects)?;
    let b = rects.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for r in rects {
        let (cx, cy) = r.center();
        mx += r.area() * (cx - width / 2.0);
        my += r.area() * (cy - height / 2.0);
    }
    let em_x = 2.0 * mx / (b * width * area);
    let em_y = 2.0 * my / (b * height * area);
    Ok(1.0 - (em_x.abs() + em_y.abs()) / 2.0)
}

/// One minus the fraction of the frame spanned by the boxes' bounding hull.
pub fn padding_score(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    check(width, height, rects)?;
    let fold = |f: fn(&Rect) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        rects.iter().map(f).fold(init, pick)
    };
    let r_max = fold(|r| r.x2, f64::NEG_INFINITY, f64::max);
    let l_min = fold(|r| r.x1, f64::INFINITY, f64::min);
    let t_max = fold(|r| r.y2, f64::NEG_INFINITY, f64::max);
    let b_min = fold(|r| r.y1, f64::INFINITY, f64::min);
    Ok(1.0 - (r_max - l_min) * (t_max - b_min) / (width * height))
}

pub fn density_score(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    let area = check(width, height, rects)?;
    Ok((area / (width * height * rects.len() as f64)).min(1.0))
}

/// Intersection area of two boxes, zero when they only touch.
pub fn overlap_area(a: &Rect, b: &Rect) -> f64 {
    let dx = a.x2.min(b.x2) - a.x1.max(b.x1);
    let dy = a.y2.min(b.y2) - a.y1.max(b.y1);
    if dx > 0.0 && dy > 0.0 {
        dx * dy
    } else {
        0.0
    }
}

/// Sum of pairwise intersection areas over unordered pairs.
pub fn total_overlap(rects: &[Rect]) -> f64 {
    let mut total = 0.0;
    for (i, a) in rects.iter().enumerate() {
        for b in &rects[i + 1..] {
            total += overlap_area(a, b);
        }
    }
    total
}

pub fn overlap_score(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    check(width, height, rects)?;
    Ok(1.0 - (total_overlap(rects) / (width * height)).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgoReport {
    pub equilibrium: f64,
    pub padding: f64,
    pub density: f64,
    pub overlap: f64,
    pub overall: f64,
}

pub fn score_rects(width: f64, height: f64, rects: &[Rect]) -> Result<NgoReport> {
    let equilibrium = equilibrium(width, height, rects)?;
    let padding = padding_score(width, height, rects)?;
    let density = density_score(width, height, rects)?;
    let overlap = overlap_score(width, height, rects)?;
    Ok(NgoReport {
        equilibrium,
        padding,
        density,
        overlap,
        overall: 0.25 * (equilibrium + padding + density + overlap),
    })
}

pub fn overall_score(width: f64, height: f64, rects: &[Rect]) -> Result<f64> {
    Ok(score_rects(width, height, rects)?.overall)
}

/// Scores every box of a poster layout, title included.
pub fn score_layout(layout: &PosterLayout) -> Result<NgoReport> {
    score_rects(layout.frame.width, layout.frame.height, &layout.rects())
}
