//! Pixel-level association cues: flow-warped mask containment, mask
//! centroid distance, flow-magnitude statistics for box correction, and the
//! heuristic pixel filter used when no segmentation is available.

use crate::error::{Error, Result};
use crate::geometry::{BBox, FlowField, Mask, PixelSet};

/// Pixel count, mean and population standard deviation of flow magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowStats {
    pub n: u64,
    pub mu: f64,
    pub sigma: f64,
}

impl FlowStats {
    pub const EMPTY: FlowStats = FlowStats {
        n: 0,
        mu: 0.0,
        sigma: 0.0,
    };

    /// Population moments of raw samples.
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::EMPTY;
        }
        let n = samples.len() as f64;
        let mu = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mu) * (s - mu)).sum::<f64>() / n;
        Self {
            n: samples.len() as u64,
            mu,
            sigma: var.max(0.0).sqrt(),
        }
    }
}

/// Moves each point by the flow sampled at its integer location. Points
/// landing outside `[0, w-1] x [0, h-1]` are dropped.
pub fn warp_pixels(pixels: &PixelSet, flow: &FlowField) -> PixelSet {
    let max_x = flow.width() as f64 - 1.0;
    let max_y = flow.height() as f64 - 1.0;
    let points = pixels
        .points()
        .iter()
        .filter_map(|&(x, y)| {
            let (u, v) = flow.at(x as u32, y as u32);
            let (nx, ny) = (x + u, y + v);
            (nx >= 0.0 && ny >= 0.0 && nx <= max_x && ny <= max_y).then_some((nx, ny))
        })
        .collect();
    PixelSet::new(points)
}

/// Negative fraction of warped points that land (rounded to the nearest
/// pixel) on the detection mask.
pub fn pmm_cost(warped: &PixelSet, det_mask: &Mask) -> Result<f64> {
    if warped.is_empty() {
        return Err(Error::EmptyPixelSet);
    }
    let hits = warped
        .points()
        .iter()
        .filter(|(x, y)| det_mask.contains(x.round() as i64, y.round() as i64))
        .count();
    Ok(-(hits as f64) / warped.len() as f64)
}

pub fn centroid_distance(a: &Mask, b: &Mask) -> Result<f64> {
    let (ax, ay) = a.centroid()?;
    let (bx, by) = b.centroid()?;
    Ok((ax - bx).hypot(ay - by))
}

/// Exponentially normalized centroid costs for one track row:
/// `-exp(1 - d / max(min d, eps))`, clamped to [-1, 0].
pub fn cdm_cost_row(distances: &[f64], epsilon: f64) -> Vec<f64> {
    let dmin = distances
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(epsilon);
    distances
        .iter()
        .map(|&d| (-(1.0 - d / dmin).exp()).clamp(-1.0, 0.0))
        .collect()
}

/// Population mean/std/count of `sqrt(u^2 + v^2)` over integer source pixels.
pub fn flow_magnitude_stats(pixels: &PixelSet, flow: &FlowField) -> FlowStats {
    let mags: Vec<f64> = pixels
        .points()
        .iter()
        .map(|&(x, y)| {
            let (u, v) = flow.at(x as u32, y as u32);
            u.hypot(v)
        })
        .collect();
    FlowStats::from_samples(&mags)
}

const MIN_EXTENT: f64 = 1e-6;

/// Box spanned by the min/max coordinates of a warped pixel set.
pub fn flow_box(warped: &PixelSet) -> Result<BBox> {
    let mut it = warped.points().iter();
    let &(x0, y0) = it.next().ok_or(Error::DegeneratePixelSet)?;
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (x0, y0, x0, y0);
    for &(x, y) in it {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    if max_x - min_x < MIN_EXTENT || max_y - min_y < MIN_EXTENT {
        return Err(Error::DegeneratePixelSet);
    }
    BBox::new(
        min_x,
        min_y,
        (max_x - min_x).max(MIN_EXTENT),
        (max_y - min_y).max(MIN_EXTENT),
    )
}

/// Whether a confirmed match qualifies for updating the flow statistics.
pub fn dbc_should_record(kf_iou: f64, flow_iou: f64, tau_d: f64) -> bool {
    flow_iou - kf_iou > tau_d
}

/// Pooled population moments of two disjoint sample groups.
pub fn dbc_merge_stats(prev: FlowStats, cur: FlowStats) -> FlowStats {
    let n = prev.n + cur.n;
    if n == 0 {
        return FlowStats::EMPTY;
    }
    let (np, nc, nf) = (prev.n as f64, cur.n as f64, n as f64);
    let mu = (np * prev.mu + nc * cur.mu) / nf;
    let delta = prev.mu - cur.mu;
    let ss = np * prev.sigma * prev.sigma + nc * cur.sigma * cur.sigma + np * nc * delta * delta / nf;
    FlowStats {
        n,
        mu,
        sigma: (ss / nf).max(0.0).sqrt(),
    }
}

/// Correction fires when the current mean magnitude lies within one standard
/// deviation of the recorded distribution.
pub fn dbc_trigger(stats: &FlowStats, current_mean: f64) -> bool {
    stats.n > 0 && (current_mean - stats.mu).abs() <= stats.sigma
}

pub fn dbc_correct_row(kf_ious: &[f64], flow_ious: &[f64], triggered: bool) -> Vec<f64> {
    assert_eq!(kf_ious.len(), flow_ious.len(), "IoU rows differ in length");
    if !triggered {
        return kf_ious.to_vec();
    }
    kf_ious
        .iter()
        .zip(flow_ious)
        .map(|(&k, &f)| k.max(f))
        .collect()
}

/// Keeps pixels whose min-max normalized flow magnitude reaches `tau_m` and
/// which fall inside the center cross of `bbox` with half-width `alpha`.
pub fn pdf_filter(pixels: &PixelSet, flow: &FlowField, bbox: &BBox, tau_m: f64, alpha: f64) -> PixelSet {
    let mags: Vec<f64> = pixels
        .points()
        .iter()
        .map(|&(x, y)| {
            let (u, v) = flow.at(x as u32, y as u32);
            u.hypot(v)
        })
        .collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let (xc, yc) = bbox.center();
    let points = pixels
        .points()
        .iter()
        .zip(&mags)
        .filter(|(&(x, y), &m)| {
            let normalized = if range > 0.0 { (m - lo) / range } else { 1.0 };
            let in_cross = (x - xc).abs() <= alpha * bbox.w || (y - yc).abs() <= alpha * bbox.h;
            normalized >= tau_m && in_cross
        })
        .map(|(&p, _)| p)
        .collect();
    PixelSet::new(points)
}

/// Integer pixels covered by a box, clipped to the flow grid, column-major.
pub fn box_pixels(bbox: &BBox, width: u32, height: u32) -> PixelSet {
    let x0 = bbox.x.ceil().max(0.0) as i64;
    let y0 = bbox.y.ceil().max(0.0) as i64;
    let x1 = (bbox.right().ceil() as i64).min(width as i64);
    let y1 = (bbox.bottom().ceil() as i64).min(height as i64);
    let mut points = Vec::new();
    for x in x0..x1 {
        for y in y0..y1 {
            points.push((x as f64, y as f64));
        }
    }
    PixelSet::new(points)
}
