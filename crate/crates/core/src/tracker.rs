//! Frame loop: prediction, cue computation, staged association, state and
//! statistics updates, appearance maintenance and track lifecycle.

use std::sync::Arc;

use log::warn;

use crate::appearance::{build_clusters, careid_update, cosine_cost};
use crate::association::{associate_stage1, associate_stage2, associate_stage3, CostMatrix, MatchResult};
use crate::config::AssocConfig;
use crate::dataio::TrackRecord;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox, Detection, Embedding, FlowField, Mask, PixelSet};
use crate::motion::{kf_init, kf_predict, kf_update, ocm_cost, KFState, ObservationHistory};
use crate::pixel_cues::{
    box_pixels, cdm_cost_row, dbc_merge_stats, dbc_should_record, dbc_trigger, flow_box, flow_magnitude_stats, pdf_filter,
    pmm_cost, warp_pixels, FlowStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Active,
    Lost,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub kf: KFState,
    /// Kalman prediction for the frame being processed.
    pub predicted: BBox,
    pub history: ObservationHistory,
    pub last_box: BBox,
    pub last_mask: Option<Arc<Mask>>,
    pub last_obs_frame: u32,
    pub flow_stats: FlowStats,
    pub feature: Option<Embedding>,
    pub status: TrackStatus,
    pub hits: u32,
    pub time_since_update: u32,
    pub born_frame: u32,
    pub confidence: f64,
    last_centroid: Option<(f64, f64)>,
}

/// Everything the tracker consumes for one frame.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub frame: u32,
    /// (width, height) in pixels.
    pub image_size: (u32, u32),
    pub detections: Vec<Detection>,
    /// Flow from frame `frame - 1` to `frame`.
    pub flow: Option<FlowField>,
}

impl FrameInput {
    pub fn empty(frame: u32, image_size: (u32, u32)) -> Self {
        Self {
            frame,
            image_size,
            detections: Vec::new(),
            flow: None,
        }
    }
}

/// Flow-derived quantities for one track in the current frame.
#[derive(Debug, Clone)]
struct PixelCue {
    warped: PixelSet,
    flow_box: Option<BBox>,
    current: FlowStats,
    triggered: bool,
}

#[derive(Debug)]
pub struct Tracker {
    cfg: AssocConfig,
    tracks: Vec<Track>,
    next_id: u64,
    first_frame: Option<u32>,
    last_frame: Option<u32>,
    warned_missing_flow: bool,
}

impl Tracker {
    pub fn new(cfg: AssocConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tracks: Vec::new(),
            next_id: 1,
            first_frame: None,
            last_frame: None,
            warned_missing_flow: false,
        })
    }

    pub fn config(&self) -> &AssocConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Suppresses the missing-flow warning for callers that have already
    /// reported it.
    pub fn silence_missing_flow_warning(&mut self) {
        self.warned_missing_flow = true;
    }

    fn pixel_cues_wanted(&self) -> bool {
        self.cfg.pmm_enabled || self.cfg.dbc_enabled
    }

    pub fn step(&mut self, input: &FrameInput) -> Result<Vec<TrackRecord>> {
        let frame = input.frame;
        if let Some(prev) = self.last_frame {
            if frame <= prev {
                return Err(Error::OutOfOrderFrame { prev, got: frame });
            }
        }
        let first = *self.first_frame.get_or_insert(frame);
        self.last_frame = Some(frame);

        // (1) motion prediction
        let noise = self.cfg.kalman;
        for t in &mut self.tracks {
            let (kf, b) = kf_predict(&t.kf, &noise);
            t.kf = kf;
            t.predicted = b;
        }

        // (2) pixel cues for tracks observed in the previous frame
        let flow = self.usable_flow(input, first)?;
        let cues: Vec<Option<PixelCue>> = self
            .tracks
            .iter()
            .map(|t| flow.and_then(|f| self.pixel_cue(t, frame, f)))
            .collect();

        // (3) confidence split
        let dets = &input.detections;
        let high: Vec<usize> = (0..dets.len())
            .filter(|&j| dets[j].confidence >= self.cfg.high_conf_thresh)
            .collect();
        let low: Vec<usize> = (0..dets.len())
            .filter(|&j| {
                let c = dets[j].confidence;
                c >= self.cfg.low_conf_thresh && c < self.cfg.high_conf_thresh
            })
            .collect();

        // (4) three association stages
        let all_tracks: Vec<usize> = (0..self.tracks.len()).collect();
        let s1 = self.stage1(&all_tracks, &high, dets, &cues);
        let s2 = self.stage2(&s1.unmatched_tracks, &low, dets, &cues, frame);
        let s3 = self.stage3(&s2.unmatched_tracks, &s1.unmatched_dets, dets);

        let mut matches: Vec<(usize, usize)> = s1
            .matches
            .iter()
            .chain(&s2.matches)
            .chain(&s3.matches)
            .copied()
            .collect();
        matches.sort_unstable();

        // (5) state and statistics updates
        let early = frame - first < self.cfg.min_hits;
        for &(ti, dj) in &matches {
            let det = &dets[dj];
            let cue = cues[ti].as_ref();
            let t = &mut self.tracks[ti];
            if self.cfg.dbc_enabled {
                if let Some(fb) = cue.and_then(|c| c.flow_box) {
                    let kf_iou = iou(&t.predicted, &det.bbox);
                    let flow_iou = iou(&fb, &det.bbox);
                    if dbc_should_record(kf_iou, flow_iou, self.cfg.tau_d) {
                        let cur = cue.expect("flow box implies cue").current;
                        if cur.n > 0 {
                            t.flow_stats = dbc_merge_stats(t.flow_stats, cur);
                        }
                    }
                }
            }
            t.kf = kf_update(&t.kf, &det.bbox, &noise);
            t.history.push(frame, det.bbox);
            t.last_box = det.bbox;
            t.last_centroid = det.mask.as_ref().and_then(|m| m.centroid().ok());
            t.last_mask = det.mask.clone();
            t.last_obs_frame = frame;
            t.hits += 1;
            t.time_since_update = 0;
            t.confidence = det.confidence;
            t.status = if t.hits >= self.cfg.min_hits || t.born_frame - first < self.cfg.min_hits {
                TrackStatus::Active
            } else {
                TrackStatus::Tentative
            };
        }

        // (6) appearance update, clustered over the matched detections
        if !matches.is_empty() {
            let matched: Vec<Detection> = matches.iter().map(|&(_, d)| dets[d].clone()).collect();
            let partition = build_clusters(&matched, self.cfg.cluster_iou_thresh);
            let mut feats: Vec<Option<Embedding>> =
                matches.iter().map(|&(t, _)| self.tracks[t].feature.take()).collect();
            let local: Vec<(usize, usize)> = (0..matches.len()).map(|k| (k, k)).collect();
            careid_update(
                &mut feats,
                &local,
                &matched,
                &partition,
                self.cfg.ema_alpha,
                self.cfg.careid_enabled,
            );
            for (&(t, _), f) in matches.iter().zip(feats) {
                self.tracks[t].feature = f;
            }
        }

        // (8) unmatched tracks age out; done before births so newborns are untouched
        let mut matched_track = vec![false; self.tracks.len()];
        for &(t, _) in &matches {
            matched_track[t] = true;
        }
        for (t, was_matched) in self.tracks.iter_mut().zip(&matched_track) {
            if !was_matched {
                t.time_since_update += 1;
                t.status = TrackStatus::Lost;
            }
        }
        let max_age = self.cfg.max_age;
        self.tracks.retain(|t| t.time_since_update <= max_age);

        // (7) births from leftover high-confidence detections
        for &dj in &s3.unmatched_dets {
            let det = &dets[dj];
            let id = self.next_id;
            self.next_id += 1;
            let kf = kf_init(&det.bbox, &noise);
            let mut history = ObservationHistory::new(self.cfg.ocm_delta_t as usize + 1);
            history.push(frame, det.bbox);
            self.tracks.push(Track {
                id,
                kf,
                predicted: det.bbox,
                history,
                last_box: det.bbox,
                last_centroid: det.mask.as_ref().and_then(|m| m.centroid().ok()),
                last_mask: det.mask.clone(),
                last_obs_frame: frame,
                flow_stats: FlowStats::EMPTY,
                feature: det.embedding.clone(),
                status: if early || self.cfg.min_hits <= 1 {
                    TrackStatus::Active
                } else {
                    TrackStatus::Tentative
                },
                hits: 1,
                time_since_update: 0,
                born_frame: frame,
                confidence: det.confidence,
            });
        }

        // (9) output
        Ok(self
            .tracks
            .iter()
            .filter(|t| t.status == TrackStatus::Active && t.time_since_update == 0)
            .map(|t| TrackRecord {
                frame,
                track_id: t.id,
                bbox: t.kf.to_bbox(),
                confidence: t.confidence,
            })
            .collect())
    }

    fn usable_flow<'a>(&mut self, input: &'a FrameInput, first: u32) -> Result<Option<&'a FlowField>> {
        if !self.pixel_cues_wanted() {
            return Ok(None);
        }
        match &input.flow {
            Some(f) => Ok(Some(f)),
            None if input.frame == first || self.tracks.is_empty() => Ok(None),
            None if self.cfg.strict_flow => Err(Error::MissingFlowWhenPixelCuesEnabled { frame: input.frame }),
            None => {
                if !self.warned_missing_flow {
                    warn!(
                        "frame {}: no optical flow available, flow-based cues fall back to neutral",
                        input.frame
                    );
                    self.warned_missing_flow = true;
                }
                Ok(None)
            }
        }
    }

    fn pixel_cue(&self, t: &Track, frame: u32, flow: &FlowField) -> Option<PixelCue> {
        if t.last_obs_frame + 1 != frame {
            return None;
        }
        let source = if self.cfg.pdf_enabled {
            let raw = box_pixels(&t.last_box, flow.width(), flow.height());
            pdf_filter(&raw, flow, &t.last_box, self.cfg.pdf_tau_m, self.cfg.pdf_alpha)
        } else {
            let mask = t.last_mask.as_ref()?;
            if mask.width() != flow.width() || mask.height() != flow.height() {
                return None;
            }
            mask.pixels()
        };
        if source.is_empty() {
            return None;
        }
        let warped = warp_pixels(&source, flow);
        let current = flow_magnitude_stats(&source, flow);
        let flow_box = if self.cfg.dbc_enabled { flow_box(&warped).ok() } else { None };
        let triggered = self.cfg.dbc_enabled && flow_box.is_some() && dbc_trigger(&t.flow_stats, current.mu);
        Some(PixelCue {
            warped,
            flow_box,
            current,
            triggered,
        })
    }

    fn base_matrix(&self, rows: &[usize], cols: &[usize], dets: &[Detection], cues: &[Option<PixelCue>]) -> (CostMatrix, Vec<bool>) {
        let mut m = CostMatrix::new(rows.len(), cols.len());
        let mut triggers = vec![false; rows.len()];
        for (r, &ti) in rows.iter().enumerate() {
            let t = &self.tracks[ti];
            let cue = cues[ti].as_ref();
            triggers[r] = cue.is_some_and(|c| c.triggered);
            for (c, &dj) in cols.iter().enumerate() {
                m.iou[r][c] = iou(&t.predicted, &dets[dj].bbox);
                if let Some(fb) = cue.and_then(|c| c.flow_box) {
                    m.flow_iou[r][c] = iou(&fb, &dets[dj].bbox);
                }
            }
        }
        (m, triggers)
    }

    fn stage1(&self, rows: &[usize], cols: &[usize], dets: &[Detection], cues: &[Option<PixelCue>]) -> MatchResult {
        let (mut m, triggers) = self.base_matrix(rows, cols, dets, cues);
        for (r, &ti) in rows.iter().enumerate() {
            let t = &self.tracks[ti];
            let cue = cues[ti].as_ref();
            for (c, &dj) in cols.iter().enumerate() {
                let d = &dets[dj];
                m.ocm[r][c] = ocm_cost(&t.history, &d.bbox, self.cfg.ocm_delta_t);
                if self.cfg.pmm_enabled {
                    if let (Some(cue), Some(mask)) = (cue, d.mask.as_ref()) {
                        m.pmm[r][c] = pmm_cost(&cue.warped, mask).unwrap_or(0.0);
                    }
                }
                if self.cfg.lambda_appr != 0.0 {
                    if let (Some(tf), Some(df)) = (&t.feature, &d.embedding) {
                        m.appearance[r][c] = cosine_cost(tf, df);
                    }
                }
            }
        }
        associate_stage1(&mut m, &self.cfg, &triggers).remap(rows, cols)
    }

    fn stage2(
        &self,
        rows: &[usize],
        cols: &[usize],
        dets: &[Detection],
        cues: &[Option<PixelCue>],
        frame: u32,
    ) -> MatchResult {
        let (mut m, triggers) = self.base_matrix(rows, cols, dets, cues);
        if self.cfg.cdm_enabled && !cols.is_empty() {
            let det_centroids: Vec<Option<(f64, f64)>> = cols
                .iter()
                .map(|&dj| dets[dj].mask.as_ref().and_then(|m| m.centroid().ok()))
                .collect();
            for (r, &ti) in rows.iter().enumerate() {
                let t = &self.tracks[ti];
                // a centroid from an older frame lags the object; treat as absent
                let Some((tx, ty)) = t.last_centroid.filter(|_| t.last_obs_frame + 1 == frame) else {
                    continue;
                };
                let with_mask: Vec<usize> = (0..cols.len()).filter(|&c| det_centroids[c].is_some()).collect();
                if with_mask.is_empty() {
                    continue;
                }
                let dists: Vec<f64> = with_mask
                    .iter()
                    .map(|&c| {
                        let (dx, dy) = det_centroids[c].expect("filtered");
                        (tx - dx).hypot(ty - dy)
                    })
                    .collect();
                for (&c, cost) in with_mask.iter().zip(cdm_cost_row(&dists, self.cfg.cdm_epsilon)) {
                    m.cdm[r][c] = cost;
                }
            }
        }
        if self.cfg.appearance_in_byte && self.cfg.lambda_appr != 0.0 {
            for (r, &ti) in rows.iter().enumerate() {
                for (c, &dj) in cols.iter().enumerate() {
                    if let (Some(tf), Some(df)) = (&self.tracks[ti].feature, &dets[dj].embedding) {
                        m.appearance[r][c] = cosine_cost(tf, df);
                    }
                }
            }
        }
        associate_stage2(&mut m, &self.cfg, &triggers).remap(rows, cols)
    }

    fn stage3(&self, rows: &[usize], cols: &[usize], dets: &[Detection]) -> MatchResult {
        let grid: Vec<Vec<f64>> = rows
            .iter()
            .map(|&ti| cols.iter().map(|&dj| iou(&self.tracks[ti].last_box, &dets[dj].bbox)).collect())
            .collect();
        associate_stage3(&grid, cols.len(), &self.cfg).remap(rows, cols)
    }
}

/// Runs the tracker over an ordered sequence; output sorted by (frame, id).
pub fn run_sequence(inputs: &[FrameInput], cfg: &AssocConfig) -> Result<Vec<TrackRecord>> {
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut out = Vec::new();
    for input in inputs {
        out.extend(tracker.step(input)?);
    }
    out.sort_by_key(|r| (r.frame, r.track_id));
    Ok(out)
}
