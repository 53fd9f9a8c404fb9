//! Appearance cue: cosine cost, EMA feature maintenance and the
//! cluster-aware selective update.

use crate::error::{Error, Result};
use crate::geometry::{iou, Detection, Embedding};

pub fn cosine_cost(a: &Embedding, b: &Embedding) -> f64 {
    (1.0 - a.dot(b)).clamp(0.0, 2.0)
}

/// `normalize(alpha * track + (1 - alpha) * det)`.
pub fn ema_update(track_feat: &Embedding, det_feat: &Embedding, alpha: f64) -> Result<Embedding> {
    let blend: Vec<f64> = track_feat
        .values()
        .iter()
        .zip(det_feat.values())
        .map(|(t, d)| alpha * t + (1.0 - alpha) * d)
        .collect();
    Embedding::normalized(blend).map_err(|_| Error::DegenerateFeature)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the detection overlap graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    /// Member indices per cluster, ascending; clusters ordered by their
    /// smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Highest-confidence member of each cluster.
    pub representatives: Vec<usize>,
    cluster_of: Vec<usize>,
}

impl ClusterPartition {
    pub fn cluster_of(&self, det: usize) -> usize {
        self.cluster_of[det]
    }

    pub fn is_representative(&self, det: usize) -> bool {
        self.representatives[self.cluster_of[det]] == det
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

pub fn build_clusters(dets: &[Detection], iou_thresh: f64) -> ClusterPartition {
    let n = dets.len();
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if iou(&dets[i].bbox, &dets[j].bbox) > iou_thresh {
                ds.union(i, j);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    let mut cluster_of = vec![0; n];
    for i in 0..n {
        let r = ds.find(i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        cluster_of[i] = root_slot[r];
        clusters[root_slot[r]].push(i);
    }
    let representatives = clusters
        .iter()
        .map(|members| {
            // strict comparison keeps the lowest index on ties
            let mut best = members[0];
            for &m in &members[1..] {
                if dets[m].confidence > dets[best].confidence {
                    best = m;
                }
            }
            best
        })
        .collect();
    ClusterPartition {
        clusters,
        representatives,
        cluster_of,
    }
}

/// Applies appearance updates for matched `(track, det)` pairs.
///
/// With `cluster_aware` set, only detections that represent their cluster
/// update a track; otherwise every matched detection does. Tracks without a
/// feature adopt the detection embedding. Detections without an embedding
/// are skipped.
pub fn careid_update(
    features: &mut [Option<Embedding>],
    matches: &[(usize, usize)],
    dets: &[Detection],
    partition: &ClusterPartition,
    alpha: f64,
    cluster_aware: bool,
) {
    for &(t, d) in matches {
        if cluster_aware && !partition.is_representative(d) {
            continue;
        }
        let Some(det_feat) = dets[d].embedding.as_ref() else {
            continue;
        };
        features[t] = match features[t].take() {
            None => Some(det_feat.clone()),
            Some(old) => match ema_update(&old, det_feat, alpha) {
                Ok(f) => Some(f),
                Err(_) => Some(old),
            },
        };
    }
}

/// Cosine costs between track features and detection embeddings, row-major
/// `tracks x dets`; missing features on either side give 0.
pub fn appearance_cost_matrix(track_feats: &[Option<&Embedding>], dets: &[&Detection]) -> Vec<Vec<f64>> {
    track_feats
        .iter()
        .map(|tf| {
            dets.iter()
                .map(|d| match (tf, &d.embedding) {
                    (Some(t), Some(e)) => cosine_cost(t, e),
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}
