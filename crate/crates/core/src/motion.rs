//! Constant-velocity Kalman filter over `[cx, cy, s, r, vcx, vcy, vs]` and
//! the velocity-direction consistency cost.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};

use crate::config::KalmanNoise;
use crate::geometry::BBox;

pub type StateVec = SVector<f64, 7>;
pub type StateCov = SMatrix<f64, 7, 7>;
type Meas = SVector<f64, 4>;

const MIN_SCALE: f64 = 1e-3;
const MIN_RATIO: f64 = 1e-3;

/// Box center/area/aspect state with velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct KFState {
    pub mean: StateVec,
    pub covariance: StateCov,
}

fn transition() -> StateCov {
    let mut f = StateCov::identity();
    f[(0, 4)] = 1.0;
    f[(1, 5)] = 1.0;
    f[(2, 6)] = 1.0;
    f
}

fn observation() -> SMatrix<f64, 4, 7> {
    SMatrix::<f64, 4, 7>::identity()
}

fn to_measurement(b: &BBox) -> Meas {
    let (cx, cy) = b.center();
    Meas::new(cx, cy, b.w * b.h, b.w / b.h)
}

impl KFState {
    pub fn to_bbox(&self) -> BBox {
        let s = self.mean[2].max(MIN_SCALE);
        let r = self.mean[3].max(MIN_RATIO);
        let w = (s * r).sqrt();
        let h = s / w;
        BBox {
            x: self.mean[0] - w / 2.0,
            y: self.mean[1] - h / 2.0,
            w,
            h,
        }
    }

    /// Velocity of the box center in px/frame.
    pub fn velocity(&self) -> (f64, f64) {
        (self.mean[4], self.mean[5])
    }
}

pub fn kf_init(b: &BBox, noise: &KalmanNoise) -> KFState {
    let z = to_measurement(b);
    let mut mean = StateVec::zeros();
    mean.fixed_rows_mut::<4>(0).copy_from(&z);
    let mut diag = StateVec::from_element(noise.init_pos);
    for i in 4..7 {
        diag[i] = noise.init_vel;
    }
    KFState {
        mean,
        covariance: StateCov::from_diagonal(&diag),
    }
}

fn process_noise(noise: &KalmanNoise) -> StateCov {
    StateCov::from_diagonal(&StateVec::from_column_slice(&[
        noise.process_pos,
        noise.process_pos,
        noise.process_pos,
        noise.process_pos,
        noise.process_vel,
        noise.process_vel,
        noise.process_scale_vel,
    ]))
}

fn symmetrize(p: &mut StateCov) {
    *p = (*p + p.transpose()) * 0.5;
}

pub fn kf_predict(state: &KFState, noise: &KalmanNoise) -> (KFState, BBox) {
    let mut mean = state.mean;
    if mean[2] + mean[6] <= 0.0 {
        mean[6] = 0.0;
    }
    let f = transition();
    let mut covariance = f * state.covariance * f.transpose() + process_noise(noise);
    symmetrize(&mut covariance);
    let next = KFState {
        mean: f * mean,
        covariance,
    };
    let b = next.to_bbox();
    (next, b)
}

pub fn kf_update(state: &KFState, obs: &BBox, noise: &KalmanNoise) -> KFState {
    let h = observation();
    let r = SMatrix::<f64, 4, 4>::from_diagonal(&Meas::new(
        noise.measure_pos,
        noise.measure_pos,
        noise.measure_shape,
        noise.measure_shape,
    ));
    let innovation = to_measurement(obs) - h * state.mean;
    let s = h * state.covariance * h.transpose() + r;
    let s_inv = s
        .try_inverse()
        .expect("innovation covariance is positive definite");
    let gain = state.covariance * h.transpose() * s_inv;
    let mut mean = state.mean + gain * innovation;
    mean[2] = mean[2].max(MIN_SCALE);
    mean[3] = mean[3].max(MIN_RATIO);
    // Joseph form keeps the posterior positive semi-definite
    let ikh = StateCov::identity() - gain * h;
    let mut covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(&mut covariance);
    KFState { mean, covariance }
}

/// Bounded record of recent (frame, observed box) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationHistory {
    capacity: usize,
    entries: VecDeque<(u32, BBox)>,
}

impl ObservationHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(2),
            entries: VecDeque::new(),
        }
    }

    /// Appends an observation. Frames must be strictly increasing; a
    /// non-increasing frame is ignored and `false` returned.
    pub fn push(&mut self, frame: u32, b: BBox) -> bool {
        if let Some(&(last, _)) = self.entries.back() {
            if frame <= last {
                return false;
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((frame, b));
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&(u32, BBox)> {
        self.entries.back()
    }

    /// Observation `steps` entries before the latest, clamped to the oldest.
    pub fn back(&self, steps: usize) -> Option<&(u32, BBox)> {
        let n = self.entries.len();
        if n == 0 {
            return None;
        }
        self.entries.get(n - 1 - steps.min(n - 1))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, BBox)> {
        self.entries.iter()
    }
}

const MIN_DIRECTION_NORM: f64 = 1e-6;

/// Angle between the track's recent motion direction and the direction from
/// its older observation to the detection, scaled to [0, 1].
///
/// Neutral (0) when fewer than two observations exist or either direction
/// is shorter than 1e-6 px.
pub fn ocm_cost(history: &ObservationHistory, det: &BBox, delta_t: u32) -> f64 {
    if history.len() < 2 {
        return 0.0;
    }
    let (_, latest) = history.last().expect("non-empty");
    let (_, older) = history.back(delta_t as usize).expect("non-empty");
    let (ox, oy) = older.center();
    let (lx, ly) = latest.center();
    let (dx, dy) = det.center();
    let track_dir = (lx - ox, ly - oy);
    let det_dir = (dx - ox, dy - oy);
    let n1 = track_dir.0.hypot(track_dir.1);
    let n2 = det_dir.0.hypot(det_dir.1);
    if n1 < MIN_DIRECTION_NORM || n2 < MIN_DIRECTION_NORM {
        return 0.0;
    }
    let cos = ((track_dir.0 * det_dir.0 + track_dir.1 * det_dir.1) / (n1 * n2)).clamp(-1.0, 1.0);
    cos.acos() / PI
}
