//! Deterministic synthetic scenes: rasterized objects with exact masks,
//! exact flow, jittered detections and noisy per-identity embeddings.
//!
//! Frames are numbered from 1. Object centers are rounded to an integer
//! anchor before rasterizing, so a rigid object's pixel set is an exact
//! integer translation of itself and the generated flow reproduces it.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataio::{self, MotRow};
use crate::error::{Error, Result};
use crate::geometry::{BBox, Detection, Embedding, FlowField, Mask};
use crate::tracker::FrameInput;

/// Fraction of an object's pixels that must overlap another object before
/// its detection confidence drops.
pub const OCCLUSION_DROP: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rectangle,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Linear { vx: f64, vy: f64 },
    /// Oscillation along `axis` plus a constant horizontal drift.
    Sinusoidal {
        axis: Axis,
        amplitude: f64,
        period: f64,
        drift_vx: f64,
    },
    /// Straight line from the start point to the partner's position at
    /// `frame`, continued at the same velocity afterwards.
    Crossing { partner: usize, frame: u32 },
}

/// Size pulsation about the object center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deform {
    pub amplitude: f64,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub base_size: (u32, u32),
    /// Center at frame 1.
    pub start: (f64, f64),
    pub motion: Motion,
    pub deform: Option<Deform>,
    pub appear_frame: u32,
    /// Last live frame, inclusive.
    pub disappear_frame: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub bbox_jitter_sigma: f64,
    pub conf_base: f64,
    pub conf_occluded: f64,
    pub embed_noise_sigma: f64,
    pub dropout_prob: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            bbox_jitter_sigma: 0.0,
            conf_base: 0.9,
            conf_occluded: 0.4,
            embed_noise_sigma: 0.0,
            dropout_prob: 0.0,
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            bbox_jitter_sigma: 1.0,
            conf_base: 0.9,
            conf_occluded: 0.4,
            embed_noise_sigma: 0.05,
            dropout_prob: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub image_size: (u32, u32),
    pub n_frames: u32,
    pub objects: Vec<ObjectSpec>,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub embed_dim: usize,
}

impl SceneSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn noiseless(mut self) -> Self {
        self.noise = NoiseSpec::noiseless();
        self
    }

    /// Continuous center of object `i` at `frame` (defined for any frame).
    pub fn center(&self, i: usize, frame: u32) -> (f64, f64) {
        let o = &self.objects[i];
        let k = frame as f64 - 1.0;
        match o.motion {
            Motion::Linear { vx, vy } => (o.start.0 + vx * k, o.start.1 + vy * k),
            Motion::Sinusoidal {
                axis,
                amplitude,
                period,
                drift_vx,
            } => {
                let wave = amplitude * (2.0 * PI * k / period).sin();
                match axis {
                    Axis::X => (o.start.0 + drift_vx * k + wave, o.start.1),
                    Axis::Y => (o.start.0 + drift_vx * k, o.start.1 + wave),
                }
            }
            Motion::Crossing { partner, frame: at } => {
                let target = self.center(partner, at);
                let steps = (at as f64 - 1.0).max(1.0);
                let vx = (target.0 - o.start.0) / steps;
                let vy = (target.1 - o.start.1) / steps;
                (o.start.0 + vx * k, o.start.1 + vy * k)
            }
        }
    }

    /// Size scale factor of object `i` at `frame`.
    fn scale(&self, i: usize, frame: u32) -> f64 {
        match self.objects[i].deform {
            Some(d) => 1.0 + d.amplitude * (2.0 * PI * (frame as f64 - 1.0) / d.period).sin(),
            None => 1.0,
        }
    }

    /// Integer placement `(x0, y0, w, h)` of object `i` at `frame`.
    pub fn placement(&self, i: usize, frame: u32) -> (i64, i64, i64, i64) {
        let o = &self.objects[i];
        let s = self.scale(i, frame);
        let w = ((o.base_size.0 as f64 * s).round() as i64).max(1);
        let h = ((o.base_size.1 as f64 * s).round() as i64).max(1);
        let (cx, cy) = self.center(i, frame);
        let (ax, ay) = (cx.round() as i64, cy.round() as i64);
        (ax - w / 2, ay - h / 2, w, h)
    }

    pub fn is_live(&self, i: usize, frame: u32) -> bool {
        let o = &self.objects[i];
        frame >= o.appear_frame && frame <= o.disappear_frame && frame <= self.n_frames
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInfeasible(m));
        let (width, height) = self.image_size;
        if width == 0 || height == 0 {
            return bad("image size must be positive".into());
        }
        if self.n_frames < 2 {
            return bad("need at least 2 frames".into());
        }
        if self.objects.is_empty() {
            return bad("scene has no objects".into());
        }
        if self.embed_dim == 0 {
            return bad("embedding dimension must be positive".into());
        }
        let n = &self.noise;
        if !(n.bbox_jitter_sigma >= 0.0 && n.embed_noise_sigma >= 0.0) {
            return bad("noise sigmas must be non-negative".into());
        }
        if !(0.0..1.0).contains(&n.dropout_prob) {
            return bad("dropout_prob must lie in [0, 1)".into());
        }
        if !((0.0..=1.0).contains(&n.conf_base) && (0.0..=1.0).contains(&n.conf_occluded)) {
            return bad("confidences must lie in [0, 1]".into());
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.base_size.0 == 0 || o.base_size.1 == 0 {
                return bad(format!("object {i} has zero size"));
            }
            if o.appear_frame < 1 || o.appear_frame > o.disappear_frame {
                return bad(format!("object {i} has an empty lifetime"));
            }
            match o.motion {
                Motion::Crossing { partner, frame } => {
                    if partner >= self.objects.len() || partner == i {
                        return bad(format!("object {i} crosses an invalid partner"));
                    }
                    if matches!(self.objects[partner].motion, Motion::Crossing { .. }) {
                        return bad(format!("object {i}: crossing partners cannot both be Crossing"));
                    }
                    if frame < 2 {
                        return bad(format!("object {i}: crossing frame must be after frame 1"));
                    }
                }
                Motion::Sinusoidal { period, .. } if !(period > 0.0) => {
                    return bad(format!("object {i} has a non-positive period"));
                }
                _ => {}
            }
            if let Some(d) = o.deform {
                if !(d.period > 0.0 && d.amplitude >= 0.0 && d.amplitude < 1.0) {
                    return bad(format!("object {i} has an invalid deformation"));
                }
            }
            for t in o.appear_frame..=o.disappear_frame.min(self.n_frames) {
                let (x0, y0, w, h) = self.placement(i, t);
                if x0 < 0 || y0 < 0 || x0 + w > width as i64 || y0 + h > height as i64 {
                    return bad(format!("object {i} leaves the image at frame {t}"));
                }
            }
        }
        Ok(())
    }
}

/// Pixels covered by object `i` at `frame`, column-major order.
fn raster(spec: &SceneSpec, i: usize, frame: u32) -> Vec<(u32, u32)> {
    let (x0, y0, w, h) = spec.placement(i, frame);
    let mut out = Vec::with_capacity((w * h) as usize);
    let (rx, ry) = (w as f64 / 2.0, h as f64 / 2.0);
    let (cx, cy) = ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0);
    for dx in 0..w {
        for dy in 0..h {
            let inside = match spec.objects[i].shape {
                Shape::Rectangle => true,
                Shape::Ellipse => {
                    let nx = (dx as f64 - cx) / rx;
                    let ny = (dy as f64 - cy) / ry;
                    nx * nx + ny * ny <= 1.0
                }
            };
            if inside {
                out.push(((x0 + dx) as u32, (y0 + dy) as u32));
            }
        }
    }
    out
}

fn pixel_bbox(pixels: &[(u32, u32)]) -> Option<BBox> {
    let min_x = pixels.iter().map(|p| p.0).min()?;
    let max_x = pixels.iter().map(|p| p.0).max()?;
    let min_y = pixels.iter().map(|p| p.1).min()?;
    let max_y = pixels.iter().map(|p| p.1).max()?;
    BBox::new(
        min_x as f64,
        min_y as f64,
        (max_x - min_x + 1) as f64,
        (max_y - min_y + 1) as f64,
    )
    .ok()
}

fn centi(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Ground truth for one object in one frame.
#[derive(Debug, Clone)]
pub struct ObjectState {
    pub object: usize,
    pub full: Arc<Mask>,
    pub visible: Arc<Mask>,
    /// Share of the object's pixels hidden by nearer objects.
    pub occluded_fraction: f64,
    /// Share of the object's pixels overlapped by any other object, in
    /// front or behind; drives the confidence drop.
    pub overlap_fraction: f64,
    pub gt_box: BBox,
    /// Index of this object's detection in the frame, if it was detected.
    pub det_id: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct SceneFrame {
    pub frame: u32,
    pub detections: Vec<Detection>,
    pub objects: Vec<ObjectState>,
}

#[derive(Debug, Clone)]
pub struct SceneBundle {
    pub spec: SceneSpec,
    pub frames: Vec<SceneFrame>,
    /// `flows[k]` maps frame k + 1 to frame k + 2.
    pub flows: Vec<FlowField>,
    pub gt: Vec<MotRow>,
}

pub fn generate(spec: &SceneSpec) -> Result<SceneBundle> {
    spec.validate()?;
    let (width, height) = spec.image_size;
    let n_obj = spec.objects.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let bases: Vec<Vec<f64>> = (0..n_obj)
        .map(|_| {
            let v: Vec<f64> = (0..spec.embed_dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();

    let mut frames = Vec::with_capacity(spec.n_frames as usize);
    let mut flows = Vec::with_capacity(spec.n_frames as usize - 1);
    let mut gt = Vec::new();
    let idx = |x: u32, y: u32| x as usize * height as usize + y as usize;

    for t in 1..=spec.n_frames {
        let live: Vec<usize> = (0..n_obj).filter(|&i| spec.is_live(i, t)).collect();
        let rasters: Vec<Vec<(u32, u32)>> = live.iter().map(|&i| raster(spec, i, t)).collect();

        // z-buffer: higher object index is nearer
        let mut owner: Vec<Option<usize>> = vec![None; (width * height) as usize];
        let mut layers = vec![0u8; (width * height) as usize];
        for (slot, px) in rasters.iter().enumerate() {
            for &(x, y) in px {
                owner[idx(x, y)] = Some(slot);
                layers[idx(x, y)] = layers[idx(x, y)].saturating_add(1);
            }
        }

        let mut states = Vec::with_capacity(live.len());
        let mut dets = Vec::new();
        for (slot, &i) in live.iter().enumerate() {
            let px = &rasters[slot];
            let visible: Vec<(u32, u32)> = px
                .iter()
                .copied()
                .filter(|&(x, y)| owner[idx(x, y)] == Some(slot))
                .collect();
            // rasters are generated in sorted column-major order
            let full = Mask::from_fn(height, width, |x, y| px.binary_search(&(x, y)).is_ok());
            let vis_mask = Mask::from_fn(height, width, |x, y| owner[idx(x, y)] == Some(slot));
            let occluded_fraction = 1.0 - visible.len() as f64 / px.len() as f64;
            let shared = px.iter().filter(|&&(x, y)| layers[idx(x, y)] > 1).count();
            let overlap_fraction = shared as f64 / px.len() as f64;
            let gt_box = pixel_bbox(px).expect("objects have at least one pixel");
            gt.push(MotRow {
                frame: t,
                id: i as i64 + 1,
                bbox: gt_box,
                confidence: 1.0,
            });

            // fixed draw order keeps the stream aligned across noise levels
            let sigma = spec.noise.bbox_jitter_sigma;
            let jitter: [f64; 4] = std::array::from_fn(|_| sigma * rng.sample::<f64, _>(StandardNormal));
            let embed: Vec<f64> = bases[i]
                .iter()
                .map(|b| b + spec.noise.embed_noise_sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let dropped = rng.random::<f64>() < spec.noise.dropout_prob;

            let full = Arc::new(full);
            let vis_mask = Arc::new(vis_mask);
            if let (false, Some(tight)) = (dropped, pixel_bbox(&visible)) {
                let bbox = BBox {
                    x: centi(tight.x + jitter[0]),
                    y: centi(tight.y + jitter[1]),
                    w: centi((tight.w + jitter[2]).max(1.0)),
                    h: centi((tight.h + jitter[3]).max(1.0)),
                };
                let conf = if overlap_fraction >= OCCLUSION_DROP {
                    spec.noise.conf_occluded
                } else {
                    spec.noise.conf_base
                };
                let embedding = Embedding::normalized(embed)
                    .and_then(|e| Embedding::from_unit(e.values().to_vec()))?;
                let mut d = Detection::new(t, -1, bbox, centi(conf)).with_embedding(embedding);
                d.mask = Some(vis_mask.clone());
                dets.push((states.len(), d));
            }
            states.push(ObjectState {
                object: i,
                full,
                visible: vis_mask,
                occluded_fraction,
                overlap_fraction,
                gt_box,
                det_id: None,
            });
        }

        dets.shuffle(&mut rng);
        let detections = dets
            .into_iter()
            .enumerate()
            .map(|(k, (s, mut d))| {
                d.det_id = k as i64;
                states[s].det_id = Some(k as i64);
                d
            })
            .collect();

        if t < spec.n_frames {
            let mut flow = FlowField::zeros(height, width);
            for (slot, &i) in live.iter().enumerate() {
                let (x0, y0, w, h) = spec.placement(i, t);
                let (x1, y1, w1, h1) = spec.placement(i, t + 1);
                let (sx, sy) = (w1 as f64 / w as f64, h1 as f64 / h as f64);
                // placement corner plus half-extent is the anchor used for scaling
                let (ax0, ay0) = ((x0 + w / 2) as f64, (y0 + h / 2) as f64);
                let (ax1, ay1) = ((x1 + w1 / 2) as f64, (y1 + h1 / 2) as f64);
                for &(x, y) in &rasters[slot] {
                    if owner[idx(x, y)] != Some(slot) {
                        continue;
                    }
                    let du = ax1 + (x as f64 - ax0) * sx - x as f64;
                    let dv = ay1 + (y as f64 - ay0) * sy - y as f64;
                    flow.set(x, y, du as f32, dv as f32);
                }
            }
            flows.push(flow);
        }

        frames.push(SceneFrame {
            frame: t,
            detections,
            objects: states,
        });
    }
    gt.sort_by_key(|r| (r.frame, r.id));
    Ok(SceneBundle {
        spec: spec.clone(),
        frames,
        flows,
        gt,
    })
}

/// Which optional inputs to attach when converting a bundle for tracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inputs {
    pub masks: bool,
    pub flow: bool,
    pub embeddings: bool,
}

impl Inputs {
    pub const ALL: Inputs = Inputs {
        masks: true,
        flow: true,
        embeddings: true,
    };
    pub const NONE: Inputs = Inputs {
        masks: false,
        flow: false,
        embeddings: false,
    };
}

pub const MANIFEST: &str = "scene.txt";
pub const GT_FILE: &str = "gt.txt";
pub const DETS_FILE: &str = "dets.txt";
pub const MASKS_FILE: &str = "masks.txt";
pub const EMBEDS_FILE: &str = "embeds.txt";
pub const FLOW_DIR: &str = "flow";

impl SceneBundle {
    /// Tracker inputs; frame t carries the flow from t - 1 to t.
    pub fn frame_inputs(&self, inputs: Inputs) -> Vec<FrameInput> {
        self.frames
            .iter()
            .map(|f| {
                let detections = f
                    .detections
                    .iter()
                    .map(|d| {
                        let mut d = d.clone();
                        if !inputs.masks {
                            d.mask = None;
                        }
                        if !inputs.embeddings {
                            d.embedding = None;
                        }
                        d
                    })
                    .collect();
                let flow = if inputs.flow && f.frame >= 2 {
                    self.flows.get(f.frame as usize - 2).cloned()
                } else {
                    None
                };
                FrameInput {
                    frame: f.frame,
                    image_size: self.spec.image_size,
                    detections,
                    flow,
                }
            })
            .collect()
    }

    pub fn manifest(&self, name: &str) -> String {
        let s = &self.spec;
        format!(
            "scenario = {name}\nseed = {}\nwidth = {}\nheight = {}\nframes = {}\nobjects = {}\nembed_dim = {}\n\
             gt = {GT_FILE}\ndets = {DETS_FILE}\nmasks = {MASKS_FILE}\nembeds = {EMBEDS_FILE}\nflow_dir = {FLOW_DIR}\n\
             flow_files = {}\n",
            s.seed,
            s.image_size.0,
            s.image_size.1,
            s.n_frames,
            s.objects.len(),
            s.embed_dim,
            self.flows.len(),
        )
    }

    /// Writes the bundle files under `dir` and returns their paths.
    pub fn write(&self, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
        let flow_dir = dir.join(FLOW_DIR);
        std::fs::create_dir_all(&flow_dir).map_err(|e| Error::io(&flow_dir, e))?;
        let mut dets = String::new();
        let mut masks = String::new();
        let mut embeds = String::new();
        for f in &self.frames {
            dets.push_str(&dataio::format_detections(&f.detections));
            for d in &f.detections {
                if let Some(m) = &d.mask {
                    masks.push_str(&dataio::format_mask_line(d.frame, d.det_id, m));
                }
                if let Some(e) = &d.embedding {
                    embeds.push_str(&dataio::format_embedding_line(d.frame, d.det_id, e));
                }
            }
        }
        let mut written = Vec::new();
        let files = [
            (MANIFEST, self.manifest(name)),
            (GT_FILE, dataio::format_gt(&self.gt)),
            (DETS_FILE, dets),
            (MASKS_FILE, masks),
            (EMBEDS_FILE, embeds),
        ];
        for (file, text) in files {
            let p = dir.join(file);
            dataio::write_atomic(&p, text.as_bytes())?;
            written.push(p);
        }
        for (k, flow) in self.flows.iter().enumerate() {
            let p = flow_dir.join(dataio::flow_file_name(k as u32 + 1));
            dataio::write_flow(flow, &p)?;
            written.push(p);
        }
        Ok(written)
    }
}

fn rect(w: u32, h: u32, start: (f64, f64), motion: Motion, n_frames: u32) -> ObjectSpec {
    ObjectSpec {
        shape: Shape::Rectangle,
        base_size: (w, h),
        start,
        motion,
        deform: None,
        appear_frame: 1,
        disappear_frame: n_frames,
    }
}

fn ellipse(w: u32, h: u32, start: (f64, f64), motion: Motion, n_frames: u32) -> ObjectSpec {
    ObjectSpec {
        shape: Shape::Ellipse,
        ..rect(w, h, start, motion, n_frames)
    }
}

fn lin(vx: f64, vy: f64) -> Motion {
    Motion::Linear { vx, vy }
}

fn sin(axis: Axis, amplitude: f64, period: f64, drift_vx: f64) -> Motion {
    Motion::Sinusoidal {
        axis,
        amplitude,
        period,
        drift_vx,
    }
}

const SIZE: (u32, u32) = (240, 180);
const EMBED_DIM: usize = 32;

fn linear_easy() -> SceneSpec {
    let n = 50;
    SceneSpec {
        image_size: SIZE,
        n_frames: n,
        objects: vec![
            rect(24, 36, (30.0, 35.0), lin(2.0, 0.0), n),
            ellipse(28, 28, (200.0, 90.0), lin(-2.5, 0.0), n),
            rect(20, 30, (40.0, 150.0), lin(3.0, -0.2), n),
        ],
        noise: NoiseSpec {
            bbox_jitter_sigma: 0.5,
            dropout_prob: 0.0,
            ..NoiseSpec::default()
        },
        seed: 0,
        embed_dim: EMBED_DIM,
    }
}

fn crossing_pair() -> SceneSpec {
    let n = 40;
    SceneSpec {
        image_size: SIZE,
        n_frames: n,
        objects: vec![
            rect(26, 40, (40.0, 90.0), lin(4.0, 0.0), n),
            ellipse(30, 44, (200.0, 96.0), Motion::Crossing { partner: 0, frame: 20 }, n),
        ],
        noise: NoiseSpec::default(),
        seed: 0,
        embed_dim: EMBED_DIM,
    }
}

fn nonlinear_dance() -> SceneSpec {
    let n = 60;
    let mut objects = vec![
        rect(24, 48, (45.0, 90.0), sin(Axis::X, 20.0, 12.0, 0.0), n),
        ellipse(26, 50, (100.0, 95.0), sin(Axis::Y, 25.0, 10.0, 0.3), n),
        rect(22, 46, (150.0, 88.0), sin(Axis::X, 22.0, 14.0, -0.2), n),
        ellipse(24, 48, (195.0, 92.0), sin(Axis::X, 18.0, 9.0, 0.0), n),
    ];
    objects[1].deform = Some(Deform {
        amplitude: 0.15,
        period: 16.0,
    });
    objects[3].deform = Some(Deform {
        amplitude: 0.12,
        period: 12.0,
    });
    SceneSpec {
        image_size: SIZE,
        n_frames: n,
        objects,
        noise: NoiseSpec {
            dropout_prob: 0.03,
            ..NoiseSpec::default()
        },
        seed: 0,
        embed_dim: EMBED_DIM,
    }
}

fn crowded_small() -> SceneSpec {
    let n = 40;
    let paths = [
        ((30.0, 30.0), (3.0, 1.0)),
        ((210.0, 40.0), (-3.0, 1.5)),
        ((40.0, 150.0), (2.5, -2.0)),
        ((200.0, 150.0), (-2.5, -2.0)),
        ((120.0, 20.0), (0.0, 3.0)),
        ((120.0, 160.0), (0.5, -3.0)),
        ((20.0, 90.0), (4.0, 0.0)),
        ((220.0, 90.0), (-4.0, 0.2)),
    ];
    let objects = paths
        .iter()
        .enumerate()
        .map(|(k, &(start, (vx, vy)))| {
            if k % 2 == 0 {
                rect(16, 24, start, lin(vx, vy), n)
            } else {
                ellipse(18, 24, start, lin(vx, vy), n)
            }
        })
        .collect();
    SceneSpec {
        image_size: SIZE,
        n_frames: n,
        objects,
        noise: NoiseSpec::default(),
        seed: 0,
        embed_dim: EMBED_DIM,
    }
}

/// Named scenarios, seed 0.
pub fn builtin_scenarios() -> Vec<(&'static str, SceneSpec)> {
    vec![
        ("linear_easy", linear_easy()),
        ("crossing_pair", crossing_pair()),
        ("nonlinear_dance", nonlinear_dance()),
        ("crowded_small", crowded_small()),
    ]
}

pub fn scenario(name: &str, seed: u64) -> Result<SceneSpec> {
    let all = builtin_scenarios();
    match all.iter().find(|(n, _)| *n == name) {
        Some((_, s)) => Ok(s.clone().with_seed(seed)),
        None => Err(Error::UnknownScenario {
            name: name.to_string(),
            valid: all.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        }),
    }
}
