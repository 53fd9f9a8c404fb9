//! Cost fusion and the three-stage matching cascade.
//!
//! All costs follow "lower is better": IoU enters negated, the pixel cues are
//! already negative affinities in [-1, 0], direction and appearance costs are
//! non-negative penalties.

use crate::assignment::hungarian;
use crate::config::AssocConfig;
use crate::pixel_cues::dbc_correct_row;

pub type Grid = Vec<Vec<f64>>;

fn zeros(rows: usize, cols: usize) -> Grid {
    vec![vec![0.0; cols]; rows]
}

/// Which matching pass a cost matrix is built for. Selects the active cues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// High-confidence detections: IoU, direction, PMM, appearance.
    High,
    /// Low-confidence BYTE pass: IoU and centroid distance.
    Byte,
}

/// Per-cue layers for a `tracks x detections` block. Layers not supplied by
/// the caller stay at the neutral value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    /// IoU of the Kalman prediction with each detection.
    pub iou: Grid,
    /// IoU of the flow-warped pixel box with each detection.
    pub flow_iou: Grid,
    pub ocm: Grid,
    pub pmm: Grid,
    pub cdm: Grid,
    pub appearance: Grid,
    /// IoU after distribution-based correction; filled by [`fuse_costs`].
    pub corrected_iou: Grid,
    pub fused: Grid,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            iou: zeros(rows, cols),
            flow_iou: zeros(rows, cols),
            ocm: zeros(rows, cols),
            pmm: zeros(rows, cols),
            cdm: zeros(rows, cols),
            appearance: zeros(rows, cols),
            corrected_iou: zeros(rows, cols),
            fused: zeros(rows, cols),
        }
    }
}

/// Fills `corrected_iou` and `fused` for `stage`. `dbc_triggers[i]` marks
/// rows whose IoU may be replaced by the flow-box IoU.
pub fn fuse_costs(m: &mut CostMatrix, cfg: &AssocConfig, dbc_triggers: &[bool], stage: Stage) {
    debug_assert_eq!(dbc_triggers.len(), m.rows);
    let lambda_p = if stage == Stage::High && cfg.pmm_enabled { cfg.lambda_p } else { 0.0 };
    let lambda_c = if stage == Stage::Byte && cfg.cdm_enabled { cfg.lambda_c } else { 0.0 };
    let lambda_ocm = if stage == Stage::High { cfg.lambda_ocm } else { 0.0 };
    let lambda_appr = match stage {
        Stage::High => cfg.lambda_appr,
        Stage::Byte if cfg.appearance_in_byte => cfg.lambda_appr,
        Stage::Byte => 0.0,
    };
    for i in 0..m.rows {
        let triggered = cfg.dbc_enabled && dbc_triggers[i];
        m.corrected_iou[i] = dbc_correct_row(&m.iou[i], &m.flow_iou[i], triggered);
        for j in 0..m.cols {
            let ilm = -m.corrected_iou[i][j] + lambda_ocm * m.ocm[i][j];
            let mut c = cfg.lambda_ilm * ilm;
            // skip zero-weight terms so disabled cues cannot leak through
            if lambda_p != 0.0 {
                c += lambda_p * m.pmm[i][j];
            }
            if lambda_c != 0.0 {
                c += lambda_c * m.cdm[i][j];
            }
            if lambda_appr != 0.0 {
                c += lambda_appr * m.appearance[i][j];
            }
            m.fused[i][j] = c;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
}

impl MatchResult {
    fn from_accepted(rows: usize, cols: usize, matches: Vec<(usize, usize)>) -> Self {
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; cols];
        for &(r, c) in &matches {
            row_used[r] = true;
            col_used[c] = true;
        }
        Self {
            matches,
            unmatched_tracks: (0..rows).filter(|&r| !row_used[r]).collect(),
            unmatched_dets: (0..cols).filter(|&c| !col_used[c]).collect(),
        }
    }

    /// Translates local indices back through the given index maps.
    pub fn remap(&self, tracks: &[usize], dets: &[usize]) -> MatchResult {
        MatchResult {
            matches: self.matches.iter().map(|&(r, c)| (tracks[r], dets[c])).collect(),
            unmatched_tracks: self.unmatched_tracks.iter().map(|&r| tracks[r]).collect(),
            unmatched_dets: self.unmatched_dets.iter().map(|&c| dets[c]).collect(),
        }
    }
}

fn solve_gated(m: &CostMatrix, accept: impl Fn(usize, usize) -> bool) -> MatchResult {
    if m.rows == 0 || m.cols == 0 {
        return MatchResult::from_accepted(m.rows, m.cols, Vec::new());
    }
    let matches = hungarian(&m.fused)
        .into_iter()
        .filter(|&(r, c)| accept(r, c))
        .collect();
    MatchResult::from_accepted(m.rows, m.cols, matches)
}

/// High-confidence pass. A pair survives when its motion affinity (the
/// larger of corrected IoU and PMM containment) reaches `match_gate`.
pub fn associate_stage1(m: &mut CostMatrix, cfg: &AssocConfig, dbc_triggers: &[bool]) -> MatchResult {
    fuse_costs(m, cfg, dbc_triggers, Stage::High);
    let m = &*m;
    solve_gated(m, |r, c| {
        let iou = m.corrected_iou[r][c];
        let pmm = if cfg.pmm_enabled { -m.pmm[r][c] } else { 0.0 };
        let affinity = iou.max(pmm);
        affinity > 0.0 && affinity >= cfg.match_gate
    })
}

/// BYTE pass over low-confidence detections, gated on corrected IoU.
pub fn associate_stage2(m: &mut CostMatrix, cfg: &AssocConfig, dbc_triggers: &[bool]) -> MatchResult {
    fuse_costs(m, cfg, dbc_triggers, Stage::Byte);
    let m = &*m;
    solve_gated(m, |r, c| {
        let iou = m.corrected_iou[r][c];
        iou >= cfg.match_gate && iou > 0.0
    })
}

/// Recovery pass: `last_obs_iou[i][j]` is the IoU between track `i`'s last
/// observed box and detection `j` of `cols`. Pairs must exceed
/// `recovery_iou_thresh`.
pub fn associate_stage3(last_obs_iou: &Grid, cols: usize, cfg: &AssocConfig) -> MatchResult {
    let rows = last_obs_iou.len();
    let mut m = CostMatrix::new(rows, cols);
    m.iou = last_obs_iou.clone();
    m.fused = last_obs_iou.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    solve_gated(&m, |r, c| m.iou[r][c] > cfg.recovery_iou_thresh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AssocConfig {
        AssocConfig::default()
    }

    fn grid(rows: &[&[f64]]) -> Grid {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn baseline_weights_reduce_to_motion_cost() {
        let c = AssocConfig {
            lambda_p: 0.0,
            lambda_c: 0.0,
            lambda_appr: 0.0,
            ..cfg()
        };
        let mut m = CostMatrix::new(2, 2);
        m.iou = grid(&[&[0.5, 0.1], &[0.0, 0.9]]);
        m.ocm = grid(&[&[0.25, 1.0], &[0.5, 0.0]]);
        m.pmm = grid(&[&[-1.0, -1.0], &[-1.0, -1.0]]);
        m.appearance = grid(&[&[2.0, 2.0], &[2.0, 2.0]]);
        fuse_costs(&mut m, &c, &[false, false], Stage::High);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.fused[i][j], -m.iou[i][j] + c.lambda_ocm * m.ocm[i][j]);
            }
        }
    }

    #[test]
    fn published_weights_by_hand() {
        let c = AssocConfig {
            lambda_ocm: 0.0,
            lambda_appr: 0.5,
            ..cfg()
        };
        assert_eq!((c.lambda_ilm, c.lambda_p, c.lambda_c), (1.0, 0.2, 1.0));
        let mut m = CostMatrix::new(2, 2);
        m.iou = grid(&[&[0.6, 0.2], &[0.1, 0.7]]);
        m.pmm = grid(&[&[-0.8, -0.1], &[0.0, -0.5]]);
        m.cdm = grid(&[&[-1.0, -0.2], &[-0.3, -1.0]]);
        m.appearance = grid(&[&[0.1, 0.9], &[0.8, 0.2]]);
        fuse_costs(&mut m, &c, &[false, false], Stage::High);
        // -0.6 + 0.2*(-0.8) + 0.5*0.1 = -0.71, etc.
        let expected_high = [[-0.71, 0.23], [0.3, -0.7]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.fused[i][j] - expected_high[i][j]).abs() < 1e-12);
            }
        }
        fuse_costs(&mut m, &c, &[false, false], Stage::Byte);
        // -0.6 + 1.0*(-1.0) = -1.6, etc.
        let expected_byte = [[-1.6, -0.4], [-0.4, -1.7]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.fused[i][j] - expected_byte[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triggered_row_lowers_cost_by_iou_gain() {
        let c = cfg();
        let mut m = CostMatrix::new(1, 1);
        m.iou = grid(&[&[0.4]]);
        m.flow_iou = grid(&[&[0.9]]);
        fuse_costs(&mut m, &c, &[false], Stage::High);
        let plain = m.fused[0][0];
        fuse_costs(&mut m, &c, &[true], Stage::High);
        assert!((plain - m.fused[0][0] - c.lambda_ilm * 0.5).abs() < 1e-12);
        assert_eq!(m.corrected_iou[0][0], 0.9);
    }

    #[test]
    fn stage1_basic() {
        let mut m = CostMatrix::new(1, 1);
        m.iou = grid(&[&[1.0]]);
        let r = associate_stage1(&mut m, &cfg(), &[false]);
        assert_eq!(r.matches, vec![(0, 0)]);

        let mut empty = CostMatrix::new(2, 0);
        let r = associate_stage1(&mut empty, &cfg(), &[false, false]);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_tracks, vec![0, 1]);
    }

    #[test]
    fn stage1_pmm_breaks_iou_tie() {
        let mut m = CostMatrix::new(2, 2);
        m.iou = grid(&[&[0.5, 0.5], &[0.5, 0.5]]);
        m.pmm = grid(&[&[0.0, -0.9], &[-0.9, 0.0]]);
        let r = associate_stage1(&mut m, &cfg(), &[false, false]);
        assert_eq!(r.matches, vec![(0, 1), (1, 0)]);

        let mut off = m.clone();
        let no_pmm = AssocConfig { pmm_enabled: false, ..cfg() };
        let r = associate_stage1(&mut off, &no_pmm, &[false, false]);
        assert_eq!(r.matches, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn stage1_gate_rejects_unsupported_pairs() {
        let mut m = CostMatrix::new(1, 2);
        m.iou = grid(&[&[0.0, 0.05]]);
        let r = associate_stage1(&mut m, &cfg(), &[false]);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_dets, vec![0, 1]);

        // no overlap, but the flow-warped pixels land on the detection
        let mut m = CostMatrix::new(1, 1);
        m.pmm = grid(&[&[-0.8]]);
        let r = associate_stage1(&mut m, &cfg(), &[false]);
        assert_eq!(r.matches, vec![(0, 0)]);
    }

    #[test]
    fn stage2_cdm_breaks_tie() {
        let mut m = CostMatrix::new(1, 2);
        m.iou = grid(&[&[0.2, 0.2]]);
        m.cdm = vec![crate::pixel_cues::cdm_cost_row(&[10.0, 2.0], 1e-6)];
        let r = associate_stage2(&mut m, &cfg(), &[false]);
        assert_eq!(r.matches, vec![(0, 1)]);
        assert_eq!(r.unmatched_dets, vec![0]);

        // with lambda_c = 0 this is plain IoU matching
        let byte_only = AssocConfig { lambda_c: 0.0, ..cfg() };
        let mut m2 = CostMatrix::new(1, 2);
        m2.iou = grid(&[&[0.3, 0.6]]);
        m2.cdm = vec![vec![-1.0, 0.0]];
        let r = associate_stage2(&mut m2, &byte_only, &[false]);
        assert_eq!(r.matches, vec![(0, 1)]);

        let mut none = CostMatrix::new(3, 0);
        let r = associate_stage2(&mut none, &cfg(), &[false; 3]);
        assert_eq!(r.unmatched_tracks, vec![0, 1, 2]);
    }

    #[test]
    fn stage3_recovers_overlapping_last_box() {
        let r = associate_stage3(&grid(&[&[0.8, 0.0], &[0.0, 0.2]]), 2, &cfg());
        assert_eq!(r.matches, vec![(0, 0)]);
        assert_eq!(r.unmatched_tracks, vec![1]);
        assert_eq!(r.unmatched_dets, vec![1]);
        let r = associate_stage3(&grid(&[&[0.0, 0.0]]), 2, &cfg());
        assert!(r.matches.is_empty());
    }

    #[test]
    fn remap_translates_indices() {
        let r = MatchResult {
            matches: vec![(0, 1)],
            unmatched_tracks: vec![1],
            unmatched_dets: vec![0],
        };
        let g = r.remap(&[4, 7], &[2, 9]);
        assert_eq!(g.matches, vec![(4, 9)]);
        assert_eq!(g.unmatched_tracks, vec![7]);
        assert_eq!(g.unmatched_dets, vec![2]);
    }
}
