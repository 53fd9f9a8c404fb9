//! Subcommands of the `flowmot` binary.
//!
//! Exit codes: 0 success, 1 malformed input or configuration, 2 I/O
//! failure. Every output file is written to a temporary name and renamed
//! into place, so failed runs leave nothing behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::warn;

use crate::config::AssocConfig;
use crate::dataio::{self, MotRow};
use crate::error::{Error, Result};
use crate::geometry::FlowField;
use crate::metrics::{self, MetricsReport};
use crate::synth;
use crate::tracker::{FrameInput, Tracker};

#[derive(Debug, Parser)]
#[command(name = "flowmot", version, about = "Offline multi-object tracking with pixel-level motion cues")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Associate detections into tracks and write MOTChallenge output.
    Track(TrackArgs),
    /// Generate a synthetic scene bundle.
    Synth(SynthArgs),
    /// Score tracker output against ground truth.
    Eval(EvalArgs),
    /// Render masks and track boxes to one PPM image per frame.
    Overlay(OverlayArgs),
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Directory of `flow_%06d.flo` files; file t maps frame t to t+1.
    #[arg(long)]
    pub flow_dir: Option<PathBuf>,
    #[arg(long)]
    pub embeds: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Image size as WxH; inferred from masks, flow or boxes when absent.
    #[arg(long, value_parser = parse_size)]
    pub image_size: Option<(u32, u32)>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = metrics::DEFAULT_IOU)]
    pub iou: f64,
    /// Also write the report as `key=value` lines to this file.
    #[arg(long)]
    pub kv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlayArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: u32 = w.parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("image size must be positive, got `{s}`"));
    }
    Ok((w, h))
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        2
    } else {
        1
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Track(a) => cmd_track(a),
        Command::Synth(a) => cmd_synth(a).map(|manifest| print!("{manifest}")),
        Command::Eval(a) => cmd_eval(a).map(|r| print!("{}", r.to_text())),
        Command::Overlay(a) => cmd_overlay(a).map(|_| ()),
    }
}

/// Frame inputs assembled from files, plus the names of absent cues.
pub struct LoadedInputs {
    pub frames: Vec<FrameInput>,
    pub missing: Vec<&'static str>,
}

pub fn load_inputs(a: &TrackArgs, cfg: &AssocConfig) -> Result<LoadedInputs> {
    let dets = dataio::read_detections(&a.dets)?;
    let masks = match &a.masks {
        Some(p) => Some(dataio::read_masks(p, a.image_size)?),
        None => None,
    };
    let embeds = match &a.embeds {
        Some(p) => Some(dataio::read_embeddings(p, cfg.embed_dim)?),
        None => None,
    };
    if let Some(dir) = &a.flow_dir {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "flow directory not found"),
            ));
        }
    }

    let last = dets.keys().next_back().copied().unwrap_or(0);
    let first = dets.keys().next().copied().unwrap_or(1).min(1);
    let mut flows: BTreeMap<u32, FlowField> = BTreeMap::new();
    if let Some(dir) = &a.flow_dir {
        for t in first.max(2)..=last {
            let p = dir.join(dataio::flow_file_name(t - 1));
            if p.is_file() {
                flows.insert(t, dataio::read_flow(&p)?);
            }
        }
    }

    let image_size = a
        .image_size
        .or_else(|| masks.as_ref()?.values().next().map(|m| (m.width(), m.height())))
        .or_else(|| flows.values().next().map(|f| (f.width(), f.height())))
        .unwrap_or_else(|| {
            let boxes = dets.values().flatten().map(|d| d.bbox);
            let (w, h) = boxes.fold((1.0f64, 1.0f64), |(w, h), b| (w.max(b.right()), h.max(b.bottom())));
            (w.ceil() as u32, h.ceil() as u32)
        });

    let mut missing = Vec::new();
    if masks.is_none() {
        missing.push("masks");
    }
    if a.flow_dir.is_none() {
        missing.push("flow");
    }
    if embeds.is_none() {
        missing.push("embeddings");
    }

    let mut frames = Vec::new();
    if !dets.is_empty() {
        for t in first..=last {
            let mut detections = dets.get(&t).cloned().unwrap_or_default();
            for d in &mut detections {
                if let Some(m) = masks.as_ref().and_then(|m| m.get(&(t, d.det_id))) {
                    d.mask = Some(Arc::new(m.clone()));
                }
                if let Some(e) = embeds.as_ref().and_then(|e| e.get(&(t, d.det_id))) {
                    d.embedding = Some(e.clone());
                }
            }
            frames.push(FrameInput {
                frame: t,
                image_size,
                detections,
                flow: flows.remove(&t),
            });
        }
    }
    Ok(LoadedInputs { frames, missing })
}

pub fn cmd_track(a: &TrackArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => dataio::read_config(p)?,
        None => AssocConfig::default(),
    };
    let inputs = load_inputs(a, &cfg)?;
    let mut tracker = Tracker::new(cfg)?;
    if !inputs.missing.is_empty() {
        warn!(
            "no {} given; the corresponding cues are neutral",
            inputs.missing.join(", ")
        );
        tracker.silence_missing_flow_warning();
    }
    let mut records = Vec::new();
    for f in &inputs.frames {
        records.extend(tracker.step(f)?);
    }
    records.sort_by_key(|r| (r.frame, r.track_id));
    dataio::write_tracks(&records, &a.out)
}

/// Writes the bundle and returns its manifest.
pub fn cmd_synth(a: &SynthArgs) -> Result<String> {
    let spec = synth::scenario(&a.scenario, a.seed)?;
    let bundle = synth::generate(&spec)?;
    bundle.write(&a.out_dir, &a.scenario)?;
    Ok(bundle.manifest(&a.scenario))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<MetricsReport> {
    if !(a.iou > 0.0 && a.iou < 1.0) {
        return Err(Error::InvalidConfig(format!("--iou must lie in (0, 1), got {}", a.iou)));
    }
    let gt = dataio::read_gt(&a.gt)?;
    let pred = dataio::read_tracks(&a.pred)?;
    let name = a
        .gt
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    let seq = metrics::evaluate(&name, &gt, &pred, a.iou).map_err(|e| e.in_file(&a.gt))?;
    let report = MetricsReport::from_sequences(vec![seq])?;
    if let Some(p) = &a.kv {
        dataio::write_atomic(p, report.to_key_values().as_bytes())?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// overlay

/// Reads `key = value` lines of a bundle manifest.
pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse {
                line: i + 1,
                message: "expected `key = value`".into(),
            }
            .in_file(path)
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn manifest_u32(m: &BTreeMap<String, String>, key: &str, path: &Path) -> Result<u32> {
    m.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| {
            Error::Parse {
                line: 0,
                message: format!("manifest lacks a valid `{key}`"),
            }
            .in_file(path)
        })
}

/// Stable, reasonably saturated color for a track id.
pub fn id_color(id: i64) -> [u8; 3] {
    // splitmix64 finalizer
    let mut z = (id as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let c = |shift: u32| 64 + ((z >> shift) & 0xFF) as u8 % 192;
    [c(0), c(16), c(32)]
}

/// 3x5 bitmaps for the digits 0-9, one row per entry, MSB on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

struct Canvas {
    w: u32,
    h: u32,
    px: Vec<u8>,
}

impl Canvas {
    fn new(w: u32, h: u32) -> Self {
        Self {
            w,
            h,
            px: vec![0; (w * h * 3) as usize],
        }
    }

    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.w as i64 || y >= self.h as i64 {
            return;
        }
        let i = ((y as u32 * self.w + x as u32) * 3) as usize;
        self.px[i..i + 3].copy_from_slice(&c);
    }

    fn rect_outline(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: [u8; 3]) {
        for t in 0..2 {
            for x in x0..=x1 {
                self.put(x, y0 + t, c);
                self.put(x, y1 - t, c);
            }
            for y in y0..=y1 {
                self.put(x0 + t, y, c);
                self.put(x1 - t, y, c);
            }
        }
    }

    fn label(&mut self, x: i64, y: i64, id: i64, c: [u8; 3]) {
        let scale = 2;
        for (k, ch) in id.to_string().bytes().enumerate() {
            let Some(d) = ch.checked_sub(b'0').filter(|d| *d < 10) else { continue };
            let ox = x + k as i64 * 4 * scale;
            for (row, bits) in DIGITS[d as usize].iter().enumerate() {
                for col in 0..3 {
                    if bits & (0b100 >> col) != 0 {
                        for sy in 0..scale {
                            for sx in 0..scale {
                                self.put(ox + col * scale + sx, y + row as i64 * scale + sy, c);
                            }
                        }
                    }
                }
            }
        }
    }

    fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.w, self.h).into_bytes();
        out.extend_from_slice(&self.px);
        out
    }
}

/// Renders the overlay frames and returns the written paths.
pub fn cmd_overlay(a: &OverlayArgs) -> Result<Vec<PathBuf>> {
    let manifest_path = a.bundle.join(synth::MANIFEST);
    let m = read_manifest(&manifest_path)?;
    let width = manifest_u32(&m, "width", &manifest_path)?;
    let height = manifest_u32(&m, "height", &manifest_path)?;
    let n_frames = manifest_u32(&m, "frames", &manifest_path)?;
    let masks_file = m.get("masks").map(String::as_str).unwrap_or(synth::MASKS_FILE);
    let masks = dataio::read_masks(&a.bundle.join(masks_file), Some((width, height)))?;
    let tracks: Vec<MotRow> = dataio::read_tracks(&a.tracks)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;

    let mut written = Vec::new();
    for t in 1..=n_frames {
        let mut canvas = Canvas::new(width, height);
        for ((_, _), mask) in masks.range((t, i64::MIN)..=(t, i64::MAX)) {
            for &(x, y) in mask.pixels().points() {
                canvas.put(x as i64, y as i64, [90, 90, 90]);
            }
        }
        for r in tracks.iter().filter(|r| r.frame == t) {
            let c = id_color(r.id);
            let b = r.bbox;
            let (x0, y0) = (b.x.round() as i64, b.y.round() as i64);
            let (x1, y1) = ((b.right() - 1.0).round() as i64, (b.bottom() - 1.0).round() as i64);
            canvas.rect_outline(x0, y0, x1, y1, c);
            canvas.label(x0 + 3, y0 + 3, r.id, c);
        }
        let p = a.out_dir.join(format!("frame_{t:06}.ppm"));
        dataio::write_atomic(&p, &canvas.to_ppm())?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_flag() {
        assert_eq!(parse_size("640x480"), Ok((640, 480)));
        assert!(parse_size("640").is_err());
        assert!(parse_size("0x4").is_err());
    }

    #[test]
    fn id_colors_are_stable_and_distinct() {
        assert_eq!(id_color(3), id_color(3));
        assert_ne!(id_color(3), id_color(4));
        assert!(id_color(9).iter().all(|&c| c >= 64));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_from(["flowmot", "track"]), 1);
        assert_eq!(run_from(["flowmot", "bogus"]), 1);
        assert_eq!(run_from(["flowmot", "--help"]), 0);
    }

    #[test]
    fn digits_render() {
        let mut c = Canvas::new(20, 12);
        c.label(0, 0, 10, [255, 0, 0]);
        let lit = c.px.chunks(3).filter(|p| p[0] == 255).count();
        // "1" has 8 cells, "0" has 12, each a 2x2 block
        assert_eq!(lit, (8 + 12) * 4);
        assert!(c.to_ppm().starts_with(b"P6\n20 12\n255\n"));
    }
}
