//! Association and tracking configuration.

use crate::error::{Error, Result};

/// Kalman noise diagonals, SORT conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanNoise {
    /// Initial variance of position, scale and ratio.
    pub init_pos: f64,
    /// Initial variance of the velocity components.
    pub init_vel: f64,
    /// Process noise on position, scale and ratio.
    pub process_pos: f64,
    /// Process noise on center velocity.
    pub process_vel: f64,
    /// Process noise on scale velocity.
    pub process_scale_vel: f64,
    /// Measurement noise on the box center.
    pub measure_pos: f64,
    /// Measurement noise on scale and ratio.
    pub measure_shape: f64,
}

impl Default for KalmanNoise {
    fn default() -> Self {
        Self {
            init_pos: 10.0,
            init_vel: 1e4,
            process_pos: 1.0,
            process_vel: 1e-2,
            process_scale_vel: 1e-4,
            measure_pos: 1.0,
            measure_shape: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssocConfig {
    pub lambda_ilm: f64,
    pub lambda_p: f64,
    pub lambda_c: f64,
    pub lambda_ocm: f64,
    pub lambda_appr: f64,
    pub tau_d: f64,
    pub cluster_iou_thresh: f64,
    pub high_conf_thresh: f64,
    pub low_conf_thresh: f64,
    pub ema_alpha: f64,
    pub max_age: u32,
    pub min_hits: u32,
    pub ocm_delta_t: u32,
    /// Minimum motion affinity (DBC-corrected IoU, or PMM containment) for
    /// a stage-1/2 pair to be kept.
    pub match_gate: f64,
    /// Minimum IoU against the last observed box for recovery matches.
    pub recovery_iou_thresh: f64,
    pub cdm_epsilon: f64,
    pub appearance_in_byte: bool,
    pub pmm_enabled: bool,
    pub cdm_enabled: bool,
    pub dbc_enabled: bool,
    pub careid_enabled: bool,
    pub pdf_enabled: bool,
    pub pdf_tau_m: f64,
    pub pdf_alpha: f64,
    /// Error out on missing flow instead of degrading to neutral cues.
    pub strict_flow: bool,
    /// Expected embedding length; 0 accepts whatever the input declares.
    pub embed_dim: usize,
    pub kalman: KalmanNoise,
}

impl Default for AssocConfig {
    fn default() -> Self {
        Self {
            lambda_ilm: 1.0,
            lambda_p: 0.2,
            lambda_c: 1.0,
            lambda_ocm: 0.2,
            lambda_appr: 1.0,
            tau_d: 0.1,
            cluster_iou_thresh: 0.3,
            high_conf_thresh: 0.6,
            low_conf_thresh: 0.1,
            ema_alpha: 0.95,
            max_age: 30,
            min_hits: 3,
            ocm_delta_t: 3,
            match_gate: 0.1,
            recovery_iou_thresh: 0.3,
            cdm_epsilon: 1e-6,
            appearance_in_byte: false,
            pmm_enabled: true,
            cdm_enabled: true,
            dbc_enabled: true,
            careid_enabled: true,
            pdf_enabled: false,
            pdf_tau_m: 0.7,
            pdf_alpha: 0.45,
            strict_flow: false,
            embed_dim: 0,
            kalman: KalmanNoise::default(),
        }
    }
}

impl AssocConfig {
    /// Motion-only configuration: every pixel and appearance cue off, the
    /// published fusion weights untouched.
    pub fn baseline() -> Self {
        Self {
            pmm_enabled: false,
            cdm_enabled: false,
            dbc_enabled: false,
            careid_enabled: false,
            lambda_appr: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.low_conf_thresh > 0.0
            && self.low_conf_thresh <= self.high_conf_thresh
            && self.high_conf_thresh <= 1.0)
        {
            return bad("require 0 < low_conf_thresh <= high_conf_thresh <= 1");
        }
        if !(self.tau_d > 0.0) {
            return bad("tau_d must be positive");
        }
        if !(self.cluster_iou_thresh > 0.0 && self.cluster_iou_thresh < 1.0) {
            return bad("cluster_iou_thresh must lie in (0, 1)");
        }
        if !(self.ema_alpha > 0.0 && self.ema_alpha < 1.0) {
            return bad("ema_alpha must lie in (0, 1)");
        }
        if self.max_age == 0 || self.min_hits == 0 || self.ocm_delta_t == 0 {
            return bad("max_age, min_hits and ocm_delta_t must be positive");
        }
        if !(self.cdm_epsilon > 0.0) {
            return bad("cdm_epsilon must be positive");
        }
        if !(0.0..=1.0).contains(&self.pdf_tau_m) || !(self.pdf_alpha > 0.0 && self.pdf_alpha <= 0.5) {
            return bad("require 0 <= pdf_tau_m <= 1 and 0 < pdf_alpha <= 0.5");
        }
        let weights = [
            self.lambda_ilm,
            self.lambda_p,
            self.lambda_c,
            self.lambda_ocm,
            self.lambda_appr,
            self.match_gate,
            self.recovery_iou_thresh,
        ];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("weights and gates must be finite and non-negative");
        }
        let k = &self.kalman;
        let noise = [
            k.init_pos,
            k.init_vel,
            k.process_pos,
            k.process_vel,
            k.process_scale_vel,
            k.measure_pos,
            k.measure_shape,
        ];
        if noise.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("Kalman noise diagonals must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = AssocConfig::default();
        c.validate().unwrap();
        assert_eq!((c.lambda_ilm, c.lambda_p, c.lambda_c), (1.0, 0.2, 1.0));
        assert_eq!(c.tau_d, 0.1);
        assert_eq!(c.cluster_iou_thresh, 0.3);
        AssocConfig::baseline().validate().unwrap();
    }

    #[test]
    fn rejects_inverted_thresholds() {
        let c = AssocConfig {
            low_conf_thresh: 0.7,
            high_conf_thresh: 0.6,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
