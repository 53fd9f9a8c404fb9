//! CLEAR-MOT style evaluation: per-frame IoU matching, MOTA with identity
//! switches, and IDF1 from a global identity assignment.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::assignment::hungarian;
use crate::dataio::MotRow;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

pub const DEFAULT_IOU: f64 = 0.5;

/// Matching of one frame's gt boxes (rows) to predicted boxes (columns).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrameMatch {
    pub matches: Vec<(usize, usize)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

/// Pairs with IoU below `iou_thresh` are never matched. Among admissible
/// matchings the largest one is taken, ties broken by total IoU.
pub fn frame_match(gt: &[BBox], pred: &[BBox], iou_thresh: f64) -> FrameMatch {
    let mut out = FrameMatch::default();
    if !gt.is_empty() && !pred.is_empty() {
        // the constant term makes every admissible pair worth more than any
        // IoU gain from a smaller matching
        let bonus = gt.len().min(pred.len()) as f64 + 1.0;
        let ious: Vec<Vec<f64>> = gt.iter().map(|g| pred.iter().map(|p| iou(g, p)).collect()).collect();
        let cost: Vec<Vec<f64>> = ious
            .iter()
            .map(|r| r.iter().map(|&v| if v >= iou_thresh { -(bonus + v) } else { 0.0 }).collect())
            .collect();
        out.matches = hungarian(&cost)
            .into_iter()
            .filter(|&(g, p)| ious[g][p] >= iou_thresh)
            .collect();
    }
    out.unmatched_gt = (0..gt.len()).filter(|g| !out.matches.iter().any(|m| m.0 == *g)).collect();
    out.unmatched_pred = (0..pred.len()).filter(|p| !out.matches.iter().any(|m| m.1 == *p)).collect();
    out
}

/// One frame's matched identity pairs and error counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub frame: u32,
    /// `(gt_id, pred_id)` pairs.
    pub pairs: Vec<(i64, i64)>,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub n_gt: usize,
}

fn by_frame(rows: &[MotRow]) -> BTreeMap<u32, Vec<&MotRow>> {
    let mut m: BTreeMap<u32, Vec<&MotRow>> = BTreeMap::new();
    for r in rows {
        m.entry(r.frame).or_default().push(r);
    }
    m
}

pub fn correspondences(gt: &[MotRow], pred: &[MotRow], iou_thresh: f64) -> Vec<Correspondence> {
    let g = by_frame(gt);
    let p = by_frame(pred);
    let mut frames: Vec<u32> = g.keys().chain(p.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();
    let empty = Vec::new();
    frames
        .into_iter()
        .map(|f| {
            let gs = g.get(&f).unwrap_or(&empty);
            let ps = p.get(&f).unwrap_or(&empty);
            let gb: Vec<BBox> = gs.iter().map(|r| r.bbox).collect();
            let pb: Vec<BBox> = ps.iter().map(|r| r.bbox).collect();
            let m = frame_match(&gb, &pb, iou_thresh);
            Correspondence {
                frame: f,
                pairs: m.matches.iter().map(|&(a, b)| (gs[a].id, ps[b].id)).collect(),
                false_positives: m.unmatched_pred.len(),
                false_negatives: m.unmatched_gt.len(),
                n_gt: gs.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotaCounts {
    pub mota: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    pub n_gt: usize,
    pub matches: usize,
}

/// An identity switch is counted whenever a gt identity is matched to a
/// predicted id different from the one it was last matched to.
pub fn compute_mota(corr: &[Correspondence]) -> Result<MotaCounts> {
    let mut last: HashMap<i64, i64> = HashMap::new();
    let (mut fp, mut fnn, mut idsw, mut n_gt, mut matches) = (0, 0, 0, 0, 0);
    for c in corr {
        fp += c.false_positives;
        fnn += c.false_negatives;
        n_gt += c.n_gt;
        matches += c.pairs.len();
        for &(g, p) in &c.pairs {
            if let Some(prev) = last.insert(g, p) {
                if prev != p {
                    idsw += 1;
                }
            }
        }
    }
    if n_gt == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(MotaCounts {
        mota: 1.0 - (fp + fnn + idsw) as f64 / n_gt as f64,
        false_positives: fp,
        false_negatives: fnn,
        id_switches: idsw,
        n_gt,
        matches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdCounts {
    pub idf1: f64,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

pub fn compute_id_counts(gt: &[MotRow], pred: &[MotRow], iou_thresh: f64) -> Result<IdCounts> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let index = |rows: &[MotRow]| -> BTreeMap<i64, usize> {
        let mut ids: Vec<i64> = rows.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().enumerate().map(|(k, id)| (id, k)).collect()
    };
    let gi = index(gt);
    let pi = index(pred);
    let mut co = vec![vec![0usize; pi.len()]; gi.len()];
    let preds = by_frame(pred);
    for (f, gs) in by_frame(gt) {
        let Some(ps) = preds.get(&f) else { continue };
        for g in &gs {
            for p in ps {
                if iou(&g.bbox, &p.bbox) >= iou_thresh {
                    co[gi[&g.id]][pi[&p.id]] += 1;
                }
            }
        }
    }
    let idtp = if pi.is_empty() {
        0
    } else {
        let cost: Vec<Vec<f64>> = co.iter().map(|r| r.iter().map(|&c| -(c as f64)).collect()).collect();
        hungarian(&cost).into_iter().map(|(g, p)| co[g][p]).sum()
    };
    let idfn = gt.len() - idtp;
    let idfp = pred.len() - idtp;
    let denom = 2 * idtp + idfp + idfn;
    Ok(IdCounts {
        idf1: 2.0 * idtp as f64 / denom as f64,
        idtp,
        idfp,
        idfn,
    })
}

pub fn compute_idf1(gt: &[MotRow], pred: &[MotRow], iou_thresh: f64) -> Result<f64> {
    compute_id_counts(gt, pred, iou_thresh).map(|c| c.idf1)
}

/// Raw counts for one sequence; rates are derived on demand so that
/// sequences aggregate by summation.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMetrics {
    pub name: String,
    pub n_gt: usize,
    pub n_pred: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

impl SequenceMetrics {
    pub fn mota(&self) -> f64 {
        1.0 - (self.false_positives + self.false_negatives + self.id_switches) as f64 / self.n_gt as f64
    }

    pub fn idf1(&self) -> f64 {
        let denom = 2 * self.idtp + self.idfp + self.idfn;
        2.0 * self.idtp as f64 / denom as f64
    }
}

pub fn evaluate(name: &str, gt: &[MotRow], pred: &[MotRow], iou_thresh: f64) -> Result<SequenceMetrics> {
    let m = compute_mota(&correspondences(gt, pred, iou_thresh))?;
    let id = compute_id_counts(gt, pred, iou_thresh)?;
    Ok(SequenceMetrics {
        name: name.to_string(),
        n_gt: m.n_gt,
        n_pred: pred.len(),
        false_positives: m.false_positives,
        false_negatives: m.false_negatives,
        id_switches: m.id_switches,
        idtp: id.idtp,
        idfp: id.idfp,
        idfn: id.idfn,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mota: f64,
    pub idf1: f64,
    pub id_switches: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub n_gt: usize,
    pub per_sequence: Vec<SequenceMetrics>,
}

impl MetricsReport {
    pub fn from_sequences(per_sequence: Vec<SequenceMetrics>) -> Result<Self> {
        let total = per_sequence.iter().fold(
            SequenceMetrics {
                name: "all".into(),
                n_gt: 0,
                n_pred: 0,
                false_positives: 0,
                false_negatives: 0,
                id_switches: 0,
                idtp: 0,
                idfp: 0,
                idfn: 0,
            },
            |mut a, s| {
                a.n_gt += s.n_gt;
                a.n_pred += s.n_pred;
                a.false_positives += s.false_positives;
                a.false_negatives += s.false_negatives;
                a.id_switches += s.id_switches;
                a.idtp += s.idtp;
                a.idfp += s.idfp;
                a.idfn += s.idfn;
                a
            },
        );
        if total.n_gt == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        Ok(Self {
            mota: total.mota(),
            idf1: total.idf1(),
            id_switches: total.id_switches,
            false_positives: total.false_positives,
            false_negatives: total.false_negatives,
            n_gt: total.n_gt,
            per_sequence,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<16} {:>8} {:>8} {:>6} {:>6} {:>6} {:>7}", "sequence", "MOTA", "IDF1", "IDSW", "FP", "FN", "GT");
        for q in &self.per_sequence {
            let _ = writeln!(
                s,
                "{:<16} {:>8.4} {:>8.4} {:>6} {:>6} {:>6} {:>7}",
                q.name,
                q.mota(),
                q.idf1(),
                q.id_switches,
                q.false_positives,
                q.false_negatives,
                q.n_gt
            );
        }
        if self.per_sequence.len() != 1 {
            let _ = writeln!(
                s,
                "{:<16} {:>8.4} {:>8.4} {:>6} {:>6} {:>6} {:>7}",
                "all", self.mota, self.idf1, self.id_switches, self.false_positives, self.false_negatives, self.n_gt
            );
        }
        s
    }

    /// `key=value` lines, one metric per line.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mota={:.6}", self.mota);
        let _ = writeln!(s, "idf1={:.6}", self.idf1);
        let _ = writeln!(s, "idsw={}", self.id_switches);
        let _ = writeln!(s, "fp={}", self.false_positives);
        let _ = writeln!(s, "fn={}", self.false_negatives);
        let _ = writeln!(s, "n_gt={}", self.n_gt);
        for q in &self.per_sequence {
            let n = &q.name;
            let _ = writeln!(s, "{n}.mota={:.6}", q.mota());
            let _ = writeln!(s, "{n}.idf1={:.6}", q.idf1());
            let _ = writeln!(s, "{n}.idsw={}", q.id_switches);
            let _ = writeln!(s, "{n}.fp={}", q.false_positives);
            let _ = writeln!(s, "{n}.fn={}", q.false_negatives);
            let _ = writeln!(s, "{n}.n_gt={}", q.n_gt);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(frame: u32, id: i64, x: f64) -> MotRow {
        MotRow {
            frame,
            id,
            bbox: BBox::new(x, 0.0, 10.0, 10.0).unwrap(),
            confidence: 1.0,
        }
    }

    fn b(x: f64) -> BBox {
        BBox::new(x, 0.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn frame_match_examples() {
        let gt = [b(0.0), b(50.0)];
        let m = frame_match(&gt, &gt, 0.5);
        assert_eq!(m.matches, vec![(0, 0), (1, 1)]);
        assert!(m.unmatched_gt.is_empty() && m.unmatched_pred.is_empty());

        let m = frame_match(&gt, &[], 0.5);
        assert_eq!(m.unmatched_gt, vec![0, 1]);

        let m = frame_match(&[b(0.0)], &[b(1.0), b(2.0)], 0.5);
        assert_eq!(m.matches, vec![(0, 0)]);
        assert_eq!(m.unmatched_pred, vec![1]);
    }

    #[test]
    fn frame_match_prefers_more_matches() {
        // g0 overlaps both preds, g1 only p0: the larger matching wins even
        // though g0-p0 alone has the best IoU
        let gt = [b(0.0), b(3.0)];
        let pred = [b(1.0), b(-3.0)];
        let m = frame_match(&gt, &pred, 0.4);
        assert_eq!(m.matches.len(), 2);
    }

    #[test]
    fn perfect_tracking() {
        let gt: Vec<MotRow> = (1..=10).flat_map(|f| [row(f, 1, f as f64), row(f, 2, 100.0)]).collect();
        let m = compute_mota(&correspondences(&gt, &gt, 0.5)).unwrap();
        assert_eq!(m.mota, 1.0);
        assert_eq!((m.false_positives, m.false_negatives, m.id_switches), (0, 0, 0));
        assert_eq!(compute_idf1(&gt, &gt, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn one_miss_in_ten() {
        let gt: Vec<MotRow> = (1..=10).map(|f| row(f, 1, 0.0)).collect();
        let pred: Vec<MotRow> = (1..=9).map(|f| row(f, 7, 0.0)).collect();
        let m = compute_mota(&correspondences(&gt, &pred, 0.5)).unwrap();
        assert_eq!(m.false_negatives, 1);
        assert!((m.mota - 0.9).abs() < 1e-12);
    }

    #[test]
    fn single_swap() {
        let gt: Vec<MotRow> = (1..=20).map(|f| row(f, 1, 0.0)).collect();
        let pred: Vec<MotRow> = (1..=20).map(|f| row(f, if f <= 10 { 5 } else { 6 }, 0.0)).collect();
        let m = compute_mota(&correspondences(&gt, &pred, 0.5)).unwrap();
        assert_eq!(m.id_switches, 1);
        assert_eq!(m.mota, 1.0 - 1.0 / 20.0);
    }

    #[test]
    fn half_split_idf1() {
        let gt: Vec<MotRow> = (1..=10).map(|f| row(f, 1, 0.0)).collect();
        let pred: Vec<MotRow> = (1..=10).map(|f| row(f, if f <= 5 { 1 } else { 2 }, 0.0)).collect();
        let c = compute_id_counts(&gt, &pred, 0.5).unwrap();
        assert_eq!((c.idtp, c.idfp, c.idfn), (5, 5, 5));
        assert_eq!(c.idf1, 0.5);
    }

    #[test]
    fn empty_cases() {
        let gt: Vec<MotRow> = (1..=3).map(|f| row(f, 1, 0.0)).collect();
        assert_eq!(compute_idf1(&gt, &[], 0.5).unwrap(), 0.0);
        let m = compute_mota(&correspondences(&gt, &[], 0.5)).unwrap();
        assert_eq!(m.false_negatives, 3);
        assert!(matches!(compute_idf1(&[], &gt, 0.5), Err(Error::EmptyGroundTruth)));
        assert!(matches!(compute_mota(&[]), Err(Error::EmptyGroundTruth)));
    }

    #[test]
    fn report_aggregates_by_sum() {
        let gt: Vec<MotRow> = (1..=10).map(|f| row(f, 1, 0.0)).collect();
        let pred: Vec<MotRow> = (1..=9).map(|f| row(f, 1, 0.0)).collect();
        let a = evaluate("a", &gt, &gt, 0.5).unwrap();
        let b = evaluate("b", &gt, &pred, 0.5).unwrap();
        let r = MetricsReport::from_sequences(vec![a, b]).unwrap();
        assert_eq!(r.n_gt, 20);
        assert_eq!(r.false_negatives, 1);
        assert!((r.mota - 0.95).abs() < 1e-12);
        let kv = r.to_key_values();
        assert!(kv.contains("fn=1\n") && kv.contains("b.fn=1\n"));
        assert!(r.to_text().contains("all"));
    }

    fn arb_rows(max_id: i64) -> impl Strategy<Value = Vec<MotRow>> {
        proptest::collection::vec((1u32..6, 1..=max_id, 0.0..60.0f64, 0.0..60.0f64), 1..25).prop_map(|v| {
            let mut seen = std::collections::HashSet::new();
            v.into_iter()
                .filter(|(f, id, _, _)| seen.insert((*f, *id)))
                .map(|(frame, id, x, y)| MotRow {
                    frame,
                    id,
                    bbox: BBox::new(x, y, 12.0, 12.0).unwrap(),
                    confidence: 1.0,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn identical_predictions_are_perfect(gt in arb_rows(6)) {
            let r = evaluate("s", &gt, &gt, 0.5).unwrap();
            prop_assert_eq!(r.mota(), 1.0);
            prop_assert_eq!(r.id_switches, 0);
            prop_assert_eq!(r.false_positives, 0);
            prop_assert_eq!(r.false_negatives, 0);
            prop_assert_eq!(r.idf1(), 1.0);
        }

        #[test]
        fn relabelling_predictions_changes_nothing(gt in arb_rows(5), pred in arb_rows(5), shift in 1i64..50) {
            let relabelled: Vec<MotRow> = pred.iter().map(|r| MotRow { id: 100 - r.id * 7 + shift, ..*r }).collect();
            let a = evaluate("s", &gt, &pred, 0.5).unwrap();
            let b = evaluate("s", &gt, &relabelled, 0.5).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn idf1_within_recall_bound(gt in arb_rows(5), pred in arb_rows(5)) {
            let corr = correspondences(&gt, &pred, 0.5);
            let m = compute_mota(&corr).unwrap();
            let r = m.matches as f64 / m.n_gt as f64;
            let idf1 = compute_idf1(&gt, &pred, 0.5).unwrap();
            prop_assert!(idf1 <= 2.0 * r / (1.0 + r) + 1e-12);
            prop_assert!((0.0..=1.0).contains(&idf1));
            prop_assert!(m.mota <= 1.0);
        }
    }
}
