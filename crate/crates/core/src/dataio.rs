//! Readers and writers for the interchange formats: detections, RLE masks,
//! Middlebury `.flo` flow, embeddings, MOTChallenge tracks/ground truth and
//! the flat `key = value` configuration.
//!
//! Text is always LF and '.'-decimal. Parsers reject malformed input with
//! the 1-based line number instead of repairing it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::AssocConfig;
use crate::error::{Error, Result};
use crate::geometry::{BBox, Detection, Embedding, FlowField, Mask};

const FLO_MAGIC: f32 = 202021.25;

/// One emitted track box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: u32,
    pub track_id: u64,
    pub bbox: BBox,
    pub confidence: f64,
}

/// One row of a MOTChallenge gt or result file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRow {
    pub frame: u32,
    pub id: i64,
    pub bbox: BBox,
    pub confidence: f64,
}

/// Detections grouped by frame, file order kept within a frame.
pub type FrameDetections = BTreeMap<u32, Vec<Detection>>;
pub type MaskTable = BTreeMap<(u32, i64), Mask>;
pub type EmbeddingTable = BTreeMap<(u32, i64), Embedding>;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to a sibling temp file and renames it over `path`, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Non-blank lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from `{s}`"),
    })
}

fn finite(line: usize, s: &str, what: &str) -> Result<f64> {
    let v: f64 = field(line, s, what)?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what} is not finite"),
        });
    }
    Ok(v)
}

fn expect_fields<'a>(line: usize, raw: &'a str, min: usize, max: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() < min || parts.len() > max {
        let want = if min == max {
            format!("{min}")
        } else {
            format!("{min}..{max}")
        };
        return Err(Error::Parse {
            line,
            message: format!("expected {want} comma-separated fields, found {}", parts.len()),
        });
    }
    Ok(parts)
}

/// Fixed 2-decimal formatting without a negative zero.
fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// detections

pub fn parse_detections(text: &str) -> Result<FrameDetections> {
    let mut out = FrameDetections::new();
    for (n, raw) in lines(text) {
        let p = expect_fields(n, raw, 7, 7)?;
        let frame: u32 = field(n, p[0], "frame")?;
        let det_id: i64 = field(n, p[1], "det_id")?;
        let x = finite(n, p[2], "x")?;
        let y = finite(n, p[3], "y")?;
        let w = finite(n, p[4], "w")?;
        let h = finite(n, p[5], "h")?;
        let conf = finite(n, p[6], "confidence")?;
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::NonPositiveSize { line: n });
        }
        if !(0.0..=1.0).contains(&conf) {
            return Err(Error::Parse {
                line: n,
                message: format!("confidence {conf} outside [0, 1]"),
            });
        }
        let bbox = BBox::new(x, y, w, h).map_err(|_| Error::NonPositiveSize { line: n })?;
        let frame_dets = out.entry(frame).or_default();
        if frame_dets.iter().any(|d| d.det_id == det_id) {
            return Err(Error::DuplicateDetId { line: n, frame, det_id });
        }
        frame_dets.push(Detection::new(frame, det_id, bbox, conf));
    }
    Ok(out)
}

pub fn read_detections(path: &Path) -> Result<FrameDetections> {
    parse_detections(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn format_detections<'a>(dets: impl IntoIterator<Item = &'a Detection>) -> String {
    let mut s = String::new();
    for d in dets {
        let b = &d.bbox;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            d.frame,
            d.det_id,
            fmt2(b.x),
            fmt2(b.y),
            fmt2(b.w),
            fmt2(b.h),
            fmt2(d.confidence)
        );
    }
    s
}

// ---------------------------------------------------------------------------
// masks

/// Parses `frame,det_id,height,width,runs`. With `image_size = Some((w, h))`
/// every mask must have that size; otherwise the first line fixes it.
pub fn parse_masks(text: &str, image_size: Option<(u32, u32)>) -> Result<MaskTable> {
    let mut out = MaskTable::new();
    let mut size = image_size;
    for (n, raw) in lines(text) {
        let p = expect_fields(n, raw, 5, 5)?;
        let frame: u32 = field(n, p[0], "frame")?;
        let det_id: i64 = field(n, p[1], "det_id")?;
        let height: u32 = field(n, p[2], "height")?;
        let width: u32 = field(n, p[3], "width")?;
        let (ew, eh) = *size.get_or_insert((width, height));
        if (width, height) != (ew, eh) {
            return Err(Error::SizeMismatch {
                line: n,
                height,
                width,
                expected_height: eh,
                expected_width: ew,
            });
        }
        let runs = p[4]
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| field::<u32>(n, t, "run length"))
            .collect::<Result<Vec<_>>>()?;
        let mask = Mask::from_runs(height, width, runs).map_err(|e| match e {
            Error::RunSum { expected, actual } => Error::RunSumMismatch {
                line: n,
                expected,
                actual,
            },
            Error::NonCanonicalRuns { index } => Error::Parse {
                line: n,
                message: format!("zero-length run at position {index}"),
            },
            other => other,
        })?;
        if out.insert((frame, det_id), mask).is_some() {
            return Err(Error::DuplicateDetId { line: n, frame, det_id });
        }
    }
    Ok(out)
}

pub fn read_masks(path: &Path, image_size: Option<(u32, u32)>) -> Result<MaskTable> {
    parse_masks(&read_text(path)?, image_size).map_err(|e| e.in_file(path))
}

pub fn format_mask_line(frame: u32, det_id: i64, mask: &Mask) -> String {
    let runs: Vec<String> = mask.runs().iter().map(u32::to_string).collect();
    format!("{frame},{det_id},{},{},{}\n", mask.height(), mask.width(), runs.join(" "))
}

// ---------------------------------------------------------------------------
// flow

pub fn encode_flow(flow: &FlowField) -> Vec<u8> {
    let n = flow.u().len();
    let mut out = Vec::with_capacity(12 + 8 * n);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_flow(bytes: &[u8]) -> Result<FlowField> {
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().expect("4-byte slice") };
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < 12 {
        return Err(Error::TruncatedFile {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let width = i32::from_le_bytes(word(4));
    let height = i32::from_le_bytes(word(8));
    if width < 0 || height < 0 {
        return Err(Error::FlowShape {
            expected: 0,
            actual: 0,
        });
    }
    let n = width as usize * height as usize;
    let expected = 12 + 8 * n;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for k in 0..n {
        let at = 12 + 8 * k;
        u.push(f32::from_le_bytes(word(at)));
        v.push(f32::from_le_bytes(word(at + 4)));
    }
    FlowField::new(height as u32, width as u32, u, v)
}

pub fn read_flow(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_flow(&bytes).map_err(|e| e.in_file(path))
}

pub fn write_flow(flow: &FlowField, path: &Path) -> Result<()> {
    write_atomic(path, &encode_flow(flow))
}

/// `flow_%06d.flo`; index t holds the flow from frame t to t + 1.
pub fn flow_file_name(index: u32) -> String {
    format!("flow_{index:06}.flo")
}

// ---------------------------------------------------------------------------
// embeddings

/// Parses `frame,det_id,v0,...`. `dim = 0` takes the length of the first
/// line and requires every later line to agree.
pub fn parse_embeddings(text: &str, dim: usize) -> Result<EmbeddingTable> {
    let mut out = EmbeddingTable::new();
    let mut dim = (dim > 0).then_some(dim);
    for (n, raw) in lines(text) {
        let p: Vec<&str> = raw.split(',').collect();
        if p.len() < 3 {
            return Err(Error::Parse {
                line: n,
                message: "expected frame, det_id and at least one value".into(),
            });
        }
        let frame: u32 = field(n, p[0], "frame")?;
        let det_id: i64 = field(n, p[1], "det_id")?;
        let expected = *dim.get_or_insert(p.len() - 2);
        if p.len() - 2 != expected {
            return Err(Error::DimMismatch {
                line: n,
                expected,
                actual: p.len() - 2,
            });
        }
        let values = p[2..]
            .iter()
            .map(|s| finite(n, s, "embedding value"))
            .collect::<Result<Vec<_>>>()?;
        let e = Embedding::from_unit(values).map_err(|e| match e {
            Error::InvalidEmbedding { norm } => Error::NotUnitNorm { line: n, norm },
            other => other,
        })?;
        if out.insert((frame, det_id), e).is_some() {
            return Err(Error::DuplicateDetId { line: n, frame, det_id });
        }
    }
    Ok(out)
}

pub fn read_embeddings(path: &Path, dim: usize) -> Result<EmbeddingTable> {
    parse_embeddings(&read_text(path)?, dim).map_err(|e| e.in_file(path))
}

pub fn format_embedding_line(frame: u32, det_id: i64, e: &Embedding) -> String {
    let mut s = format!("{frame},{det_id}");
    for v in e.values() {
        // shortest round-trip representation
        let _ = write!(s, ",{v}");
    }
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// MOTChallenge tracks and ground truth

pub fn format_tracks(records: &[TrackRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let b = &r.bbox;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},-1,-1,-1",
            r.frame,
            r.track_id,
            fmt2(b.x),
            fmt2(b.y),
            fmt2(b.w),
            fmt2(b.h),
            fmt2(r.confidence)
        );
    }
    s
}

pub fn write_tracks(records: &[TrackRecord], path: &Path) -> Result<()> {
    debug_assert!(records
        .windows(2)
        .all(|w| (w[0].frame, w[0].track_id) <= (w[1].frame, w[1].track_id)));
    write_atomic(path, format_tracks(records).as_bytes())
}

pub fn format_gt(rows: &[MotRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let b = &r.bbox;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},1,1,1",
            r.frame,
            r.id,
            fmt2(b.x),
            fmt2(b.y),
            fmt2(b.w),
            fmt2(b.h)
        );
    }
    s
}

/// Parses MOTChallenge rows (`frame,id,x,y,w,h[,conf,...]`, 6 to 10
/// fields). Rows whose 7th field is 0 are dropped when `drop_ignored` is
/// set, following the gt "consider" flag.
pub fn parse_mot(text: &str, drop_ignored: bool) -> Result<Vec<MotRow>> {
    let mut out = Vec::new();
    for (n, raw) in lines(text) {
        let p = expect_fields(n, raw, 6, 10)?;
        let frame: u32 = field(n, p[0], "frame")?;
        let id: i64 = field(n, p[1], "id")?;
        let x = finite(n, p[2], "x")?;
        let y = finite(n, p[3], "y")?;
        let w = finite(n, p[4], "w")?;
        let h = finite(n, p[5], "h")?;
        let confidence = match p.get(6) {
            Some(s) => finite(n, s, "confidence")?,
            None => 1.0,
        };
        if drop_ignored && p.len() > 6 && confidence == 0.0 {
            continue;
        }
        let bbox = BBox::new(x, y, w, h).map_err(|_| Error::NonPositiveSize { line: n })?;
        out.push(MotRow {
            frame,
            id,
            bbox,
            confidence,
        });
    }
    Ok(out)
}

pub fn read_gt(path: &Path) -> Result<Vec<MotRow>> {
    parse_mot(&read_text(path)?, true).map_err(|e| e.in_file(path))
}

pub fn read_tracks(path: &Path) -> Result<Vec<MotRow>> {
    parse_mot(&read_text(path)?, false).map_err(|e| e.in_file(path))
}

// ---------------------------------------------------------------------------
// configuration

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Parses flat `key = value` text over the defaults. Every key is checked
/// on its own line; cross-key constraints are checked once at the end.
pub fn parse_config(text: &str) -> Result<AssocConfig> {
    let mut c = AssocConfig::default();
    for (n, raw) in lines(text) {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Parse {
                line: n,
                message: format!("expected `key = value`, found `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = || Error::BadValue {
            line: n,
            key: key.to_string(),
            value: value.to_string(),
        };
        let real = |ok: fn(f64) -> bool| -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && ok(*v))
                .ok_or_else(bad)
        };
        let count = |min: u32| -> Result<u32> {
            value.parse::<u32>().ok().filter(|v| *v >= min).ok_or_else(bad)
        };
        let flag = || parse_bool(value).ok_or_else(bad);
        let nonneg = |v: f64| v >= 0.0;
        let positive = |v: f64| v > 0.0;
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        let closed_unit = |v: f64| (0.0..=1.0).contains(&v);
        match key {
            "lambda_ilm" => c.lambda_ilm = real(nonneg)?,
            "lambda_p" => c.lambda_p = real(nonneg)?,
            "lambda_c" => c.lambda_c = real(nonneg)?,
            "lambda_ocm" => c.lambda_ocm = real(nonneg)?,
            "lambda_appr" => c.lambda_appr = real(nonneg)?,
            "tau_d" => c.tau_d = real(positive)?,
            "cluster_iou_thresh" => c.cluster_iou_thresh = real(open_unit)?,
            "high_conf_thresh" => c.high_conf_thresh = real(|v| v > 0.0 && v <= 1.0)?,
            "low_conf_thresh" => c.low_conf_thresh = real(|v| v > 0.0 && v <= 1.0)?,
            "ema_alpha" => c.ema_alpha = real(open_unit)?,
            "max_age" => c.max_age = count(1)?,
            "min_hits" => c.min_hits = count(1)?,
            "ocm_delta_t" => c.ocm_delta_t = count(1)?,
            "match_gate" => c.match_gate = real(closed_unit)?,
            "recovery_iou_thresh" => c.recovery_iou_thresh = real(closed_unit)?,
            "cdm_epsilon" => c.cdm_epsilon = real(positive)?,
            "appearance_in_byte" => c.appearance_in_byte = flag()?,
            "pmm_enabled" => c.pmm_enabled = flag()?,
            "cdm_enabled" => c.cdm_enabled = flag()?,
            "dbc_enabled" => c.dbc_enabled = flag()?,
            "careid_enabled" => c.careid_enabled = flag()?,
            "pdf_enabled" => c.pdf_enabled = flag()?,
            "pdf_tau_m" => c.pdf_tau_m = real(closed_unit)?,
            "pdf_alpha" => c.pdf_alpha = real(|v| v > 0.0 && v <= 0.5)?,
            "strict_flow" => c.strict_flow = flag()?,
            "embed_dim" => c.embed_dim = count(0)? as usize,
            "kf_init_pos" => c.kalman.init_pos = real(positive)?,
            "kf_init_vel" => c.kalman.init_vel = real(positive)?,
            "kf_process_pos" => c.kalman.process_pos = real(positive)?,
            "kf_process_vel" => c.kalman.process_vel = real(positive)?,
            "kf_process_scale_vel" => c.kalman.process_scale_vel = real(positive)?,
            "kf_measure_pos" => c.kalman.measure_pos = real(positive)?,
            "kf_measure_shape" => c.kalman.measure_shape = real(positive)?,
            _ => {
                return Err(Error::UnknownKey {
                    line: n,
                    key: key.to_string(),
                })
            }
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn read_config(path: &Path) -> Result<AssocConfig> {
    parse_config(&read_text(path)?).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn detection_line() {
        let d = parse_detections("1,0,10,20,30,40,0.9\n").unwrap();
        assert_eq!(d.len(), 1);
        let det = &d[&1][0];
        assert_eq!(det.bbox, BBox::new(10., 20., 30., 40.).unwrap());
        assert_eq!(det.confidence, 0.9);
        assert!(parse_detections("").unwrap().is_empty());
    }

    #[test]
    fn detection_errors() {
        assert!(matches!(
            parse_detections("1,0,10,20,0,40,0.9"),
            Err(Error::NonPositiveSize { line: 1 })
        ));
        assert!(matches!(
            parse_detections("1,0,1,1,1,1,0.5\n1,0,1,1,1,1,0.5\n"),
            Err(Error::DuplicateDetId { line: 2, .. })
        ));
        assert!(matches!(
            parse_detections("1,0,1,1,1,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_detections("\n1,0,1,x,1,1,0.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn detections_grouped_by_frame() {
        let d = parse_detections("3,0,1,1,2,2,0.5\n1,4,1,1,2,2,0.5\n3,1,1,1,2,2,0.5\n").unwrap();
        let frames: Vec<u32> = d.keys().copied().collect();
        assert_eq!(frames, vec![1, 3]);
        let ids: Vec<i64> = d[&3].iter().map(|x| x.det_id).collect();
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn mask_lines() {
        let m = parse_masks("1,0,2,2,0 4\n", Some((2, 2))).unwrap();
        assert_eq!(m[&(1, 0)].pixel_count(), 4);
        let m = parse_masks("1,0,2,2,1 1 1 1\n", Some((2, 2))).unwrap();
        assert_eq!(m[&(1, 0)].pixels().points(), &[(0.0, 1.0), (1.0, 1.0)]);
        assert!(matches!(
            parse_masks("1,0,2,2,1 1 1\n", Some((2, 2))),
            Err(Error::RunSumMismatch { line: 1, expected: 4, actual: 3 })
        ));
        assert!(matches!(
            parse_masks("1,0,2,3,6\n", Some((2, 2))),
            Err(Error::SizeMismatch { line: 1, .. })
        ));
        assert!(matches!(
            parse_masks("1,0,2,2,4\n1,1,3,2,6\n", None),
            Err(Error::SizeMismatch { line: 2, .. })
        ));
    }

    #[test]
    fn flow_examples() {
        let f = FlowField::new(1, 1, vec![3.0], vec![4.0]).unwrap();
        let bytes = encode_flow(&f);
        assert_eq!(bytes.len(), 20);
        assert_eq!(decode_flow(&bytes).unwrap(), f);

        let mut bad = bytes.clone();
        bad[..4].copy_from_slice(&0f32.to_le_bytes());
        assert!(matches!(decode_flow(&bad), Err(Error::BadMagic(m)) if m == 0.0));
        assert!(matches!(
            decode_flow(&bytes[..19]),
            Err(Error::TruncatedFile { expected: 20, actual: 19 })
        ));
        assert!(matches!(decode_flow(&bytes[..8]), Err(Error::TruncatedFile { .. })));
    }

    #[test]
    fn flow_file_names() {
        assert_eq!(flow_file_name(7), "flow_000007.flo");
    }

    #[test]
    fn embedding_lines() {
        let e = parse_embeddings("1,0,1.0,0.0\n", 2).unwrap();
        assert_eq!(e[&(1, 0)].values(), &[1.0, 0.0]);
        assert!(matches!(
            parse_embeddings("1,0,0.5,0.0\n", 2),
            Err(Error::NotUnitNorm { line: 1, .. })
        ));
        assert!(matches!(
            parse_embeddings("1,0,1.0,0.0,0.0\n", 2),
            Err(Error::DimMismatch { line: 1, expected: 2, actual: 3 })
        ));
        assert!(matches!(
            parse_embeddings("1,0,1.0,0.0\n1,1,1.0,0.0,0.0\n", 0),
            Err(Error::DimMismatch { line: 2, .. })
        ));
    }

    #[test]
    fn track_line_format() {
        let r = TrackRecord {
            frame: 1,
            track_id: 1,
            bbox: BBox::new(10., 20., 30., 40.).unwrap(),
            confidence: 0.95,
        };
        assert_eq!(format_tracks(&[r]), "1,1,10.00,20.00,30.00,40.00,0.95,-1,-1,-1\n");
        assert_eq!(format_tracks(&[]), "");
        assert_eq!(fmt2(-0.001), "0.00");
    }

    #[test]
    fn gt_drops_ignored_rows() {
        let rows = parse_mot("1,1,0,0,5,5,1,1,1\n1,2,0,0,5,5,0,1,1\n", true).unwrap();
        assert_eq!(rows.len(), 1);
        let rows = parse_mot("1,1,0,0,5,5\n", true).unwrap();
        assert_eq!(rows[0].confidence, 1.0);
    }

    #[test]
    fn config_defaults_and_errors() {
        assert_eq!(parse_config("").unwrap(), AssocConfig::default());
        let c = parse_config("# comment\ntau_d = 0.1\nmin_hits=2 # trailing\n").unwrap();
        assert_eq!(c.tau_d, 0.1);
        assert_eq!(c.min_hits, 2);
        assert!(matches!(
            parse_config("tau_d = -1"),
            Err(Error::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\nfoo = 1"),
            Err(Error::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("pmm_enabled = maybe"),
            Err(Error::BadValue { .. })
        ));
        assert!(matches!(parse_config("tau_d"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_config("low_conf_thresh = 0.9\nhigh_conf_thresh = 0.5"),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let missing = dir.path().join("no/such/dir/x.txt");
        assert!(write_atomic(&missing, b"x").unwrap_err().is_io());
    }

    proptest! {
        #[test]
        fn mask_rle_round_trip(h in 1u32..12, w in 1u32..12, seed in proptest::collection::vec(any::<bool>(), 144)) {
            let bits: Vec<bool> = seed[..(h * w) as usize].to_vec();
            let m = Mask::from_bitmap(h, w, bits).unwrap();
            let line = format_mask_line(4, 2, &m);
            let back = parse_masks(&line, Some((w, h))).unwrap();
            prop_assert_eq!(&back[&(4, 2)], &m);
        }

        #[test]
        fn flow_round_trip(h in 0u32..6, w in 0u32..6, vals in proptest::collection::vec(any::<f32>(), 72)) {
            let n = (h * w) as usize;
            let f = FlowField::new(h, w, vals[..n].to_vec(), vals[36..36 + n].to_vec()).unwrap();
            let back = decode_flow(&encode_flow(&f)).unwrap();
            // compare bit patterns so NaN payloads count too
            let bits = |g: &FlowField| -> Vec<u32> { g.u().iter().chain(g.v()).map(|x| x.to_bits()).collect() };
            prop_assert_eq!(bits(&back), bits(&f));
            prop_assert_eq!((back.height(), back.width()), (h, w));
        }

        #[test]
        fn track_reparse_within_a_hundredth(
            x in -500.0..500.0f64, y in -500.0..500.0f64,
            w in 1.0..300.0f64, h in 1.0..300.0f64, c in 0.0..1.0f64,
        ) {
            let r = TrackRecord { frame: 3, track_id: 9, bbox: BBox::new(x, y, w, h).unwrap(), confidence: c };
            let rows = parse_mot(&format_tracks(&[r]), false).unwrap();
            let b = rows[0].bbox;
            for (a, e) in [(b.x, x), (b.y, y), (b.w, w), (b.h, h)] {
                prop_assert!((a - e).abs() <= 0.005 + 1e-9);
            }
        }

        #[test]
        fn embedding_round_trip(vals in proptest::collection::vec(-1.0..1.0f64, 1..16)) {
            prop_assume!(vals.iter().map(|v| v * v).sum::<f64>() > 1e-6);
            let e = Embedding::normalized(vals).unwrap();
            let back = parse_embeddings(&format_embedding_line(1, 0, &e), 0).unwrap();
            let got = &back[&(1, 0)];
            for (a, b) in got.values().iter().zip(e.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
