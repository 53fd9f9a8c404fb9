//! Shared domain types: boxes, detections, run-length masks, pixel sets,
//! dense flow fields and appearance embeddings.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Axis-aligned box in top-left + size form (MOTChallenge layout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) || !x.is_finite() || !y.is_finite() || !w.is_finite() || !h.is_finite() {
            return Err(Error::InvalidBox { w, h });
        }
        Ok(Self { x, y, w, h })
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }
}

/// Intersection over union of two boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Unit-norm appearance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// Scales `values` to unit length. Fails on a (near) zero vector.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || norm < 1e-9 {
            return Err(Error::DegenerateFeature);
        }
        Ok(Self(values.into_iter().map(|v| v / norm).collect()))
    }

    /// Accepts a vector whose norm is already within 1e-3 of one and
    /// renormalizes it exactly.
    pub fn from_unit(values: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&values);
        if !((1.0 - 1e-3)..=(1.0 + 1e-3)).contains(&norm) {
            return Err(Error::InvalidEmbedding { norm });
        }
        Self::normalized(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Binary mask stored as COCO-style uncompressed RLE: column-major run
/// lengths, the first run counting background.
///
/// The decoded bitmap is kept alongside the runs for membership queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    height: u32,
    width: u32,
    runs: Vec<u32>,
    bits: Vec<bool>,
    count: usize,
}

impl Mask {
    pub fn from_runs(height: u32, width: u32, runs: Vec<u32>) -> Result<Self> {
        let expected = height as u64 * width as u64;
        let actual: u64 = runs.iter().map(|&r| r as u64).sum();
        if actual != expected {
            return Err(Error::RunSum { expected, actual });
        }
        if let Some(index) = runs.iter().skip(1).position(|&r| r == 0) {
            return Err(Error::NonCanonicalRuns { index: index + 1 });
        }
        let mut bits = Vec::with_capacity(expected as usize);
        let mut count = 0;
        for (i, &r) in runs.iter().enumerate() {
            let fg = i % 2 == 1;
            if fg {
                count += r as usize;
            }
            bits.extend(std::iter::repeat_n(fg, r as usize));
        }
        Ok(Self {
            height,
            width,
            runs,
            bits,
            count,
        })
    }

    /// Builds a mask from a column-major bitmap (`bits[x * height + y]`).
    pub fn from_bitmap(height: u32, width: u32, bits: Vec<bool>) -> Result<Self> {
        let expected = height as usize * width as usize;
        if bits.len() != expected {
            return Err(Error::RunSum {
                expected: expected as u64,
                actual: bits.len() as u64,
            });
        }
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &b in &bits {
            if b != current {
                runs.push(len);
                len = 0;
                current = b;
            }
            len += 1;
        }
        runs.push(len);
        // an all-background mask encodes as a single run; an empty image as [0]
        let count = bits.iter().filter(|&&b| b).count();
        Ok(Self {
            height,
            width,
            runs,
            bits,
            count,
        })
    }

    /// Builds a mask from a predicate over pixel coordinates.
    pub fn from_fn(height: u32, width: u32, mut inside: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height as usize * width as usize);
        for x in 0..width {
            for y in 0..height {
                bits.push(inside(x, y));
            }
        }
        Self::from_bitmap(height, width, bits).expect("bitmap size matches by construction")
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    pub fn pixel_count(&self) -> usize {
        self.count
    }

    /// Membership of integer pixel (x, y); false outside the image.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.bits[x as usize * self.height as usize + y as usize]
    }

    /// Foreground pixels in column-major order.
    pub fn pixels(&self) -> PixelSet {
        let h = self.height as usize;
        let points = self
            .bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ((i / h) as f64, (i % h) as f64))
            .collect();
        PixelSet::new(points)
    }

    /// Unweighted mean of foreground pixel coordinates.
    pub fn centroid(&self) -> Result<(f64, f64)> {
        if self.count == 0 {
            return Err(Error::EmptyMask);
        }
        let h = self.height as usize;
        let (mut sx, mut sy) = (0.0, 0.0);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            sx += (i / h) as f64;
            sy += (i % h) as f64;
        }
        let n = self.count as f64;
        Ok((sx / n, sy / n))
    }

    /// Tight integer pixel bounds `(min_x, min_y, max_x, max_y)`, inclusive.
    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        if self.count == 0 {
            return None;
        }
        let h = self.height as usize;
        let mut b = (u32::MAX, u32::MAX, 0, 0);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &v)| v) {
            let (x, y) = ((i / h) as u32, (i % h) as u32);
            b.0 = b.0.min(x);
            b.1 = b.1.min(y);
            b.2 = b.2.max(x);
            b.3 = b.3.max(y);
        }
        Some(b)
    }
}

pub fn mask_pixels(m: &Mask) -> PixelSet {
    m.pixels()
}

pub fn mask_centroid(m: &Mask) -> Result<(f64, f64)> {
    m.centroid()
}

/// Ordered list of (x, y) pixel locations, possibly fractional after warping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PixelSet {
    points: Vec<(f64, f64)>,
}

impl PixelSet {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        debug_assert!(points.iter().all(|(x, y)| x.is_finite() && y.is_finite()));
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Dense per-pixel displacement field, stored row-major as the `.flo`
/// format does. Components are kept in single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: u32,
    width: u32,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(height: u32, width: u32, u: Vec<f32>, v: Vec<f32>) -> Result<Self> {
        let expected = height as usize * width as usize;
        for grid in [&u, &v] {
            if grid.len() != expected {
                return Err(Error::FlowShape {
                    expected,
                    actual: grid.len(),
                });
            }
        }
        Ok(Self { height, width, u, v })
    }

    pub fn zeros(height: u32, width: u32) -> Self {
        let n = height as usize * width as usize;
        Self {
            height,
            width,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    /// Displacement at integer pixel (x, y).
    pub fn at(&self, x: u32, y: u32) -> (f64, f64) {
        let i = y as usize * self.width as usize + x as usize;
        (self.u[i] as f64, self.v[i] as f64)
    }

    pub fn set(&mut self, x: u32, y: u32, du: f32, dv: f32) {
        let i = y as usize * self.width as usize + x as usize;
        self.u[i] = du;
        self.v[i] = dv;
    }

    pub fn all_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|f| f.is_finite())
    }
}

/// One detector output in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub det_id: i64,
    pub bbox: BBox,
    pub confidence: f64,
    pub mask: Option<Arc<Mask>>,
    pub embedding: Option<Embedding>,
}

impl Detection {
    pub fn new(frame: u32, det_id: i64, bbox: BBox, confidence: f64) -> Self {
        Self {
            frame,
            det_id,
            bbox,
            confidence: confidence.clamp(0.0, 1.0),
            mask: None,
            embedding: None,
        }
    }

    pub fn with_mask(mut self, mask: Mask) -> Self {
        self.mask = Some(Arc::new(mask));
        self
    }

    pub fn with_embedding(mut self, e: Embedding) -> Self {
        self.embedding = Some(e);
        self
    }
}
