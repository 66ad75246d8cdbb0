//! Constant-velocity Kalman filter over `[cx, cy, w, h, vcx, vcy, vw, vh]`.
//!
//! Noise terms are standard deviations expressed as fractions of the box
//! height, so the filter behaves the same for small and large targets.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::MotionError;
use crate::geometry::{iou, mask_to_bbox, BBox};
use crate::selection::CandidateMask;

pub type StateVector = SVector<f64, 8>;
pub type StateCovariance = SMatrix<f64, 8, 8>;
type Measurement = SVector<f64, 4>;
type Observation = SMatrix<f64, 4, 8>;

/// Minimum width/height kept in the state after a correction.
pub const MIN_BOX_SIZE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    pub process_noise_pos: f64,
    pub process_noise_vel: f64,
    pub measure_noise: f64,
    /// Consecutive successful updates required before motion is trusted.
    pub tau_stab: u32,
    pub alpha_kf: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            process_noise_pos: 1.0 / 20.0,
            process_noise_vel: 1.0 / 160.0,
            measure_noise: 1.0 / 20.0,
            tau_stab: 3,
            alpha_kf: 0.15,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), MotionError> {
        let mut bad = Vec::new();
        if !(0.0..=1.0).contains(&self.alpha_kf) {
            bad.push(format!("alpha_kf = {} outside [0, 1]", self.alpha_kf));
        }
        for (name, v) in [
            ("process_noise_pos", self.process_noise_pos),
            ("process_noise_vel", self.process_noise_vel),
            ("measure_noise", self.measure_noise),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} = {v} must be positive"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(MotionError::InvalidConfig(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateVector,
    pub cov: StateCovariance,
    pub frames_since_init: u32,
    pub consecutive_updates: u32,
}

impl KalmanState {
    /// Position/size part of the mean as a box.
    pub fn bbox(&self) -> BBox {
        BBox::new(self.mean[0], self.mean[1], self.mean[2], self.mean[3])
    }
}

/// Stateless filter: every operation maps a state to a new state.
#[derive(Debug, Clone, Copy)]
pub struct KalmanBoxFilter {
    cfg: MotionConfig,
    transition: StateCovariance,
    observation: Observation,
}

impl KalmanBoxFilter {
    pub fn new(cfg: MotionConfig) -> Self {
        let mut transition = StateCovariance::identity();
        for i in 0..4 {
            transition[(i, i + 4)] = 1.0;
        }
        let mut observation = Observation::zeros();
        for i in 0..4 {
            observation[(i, i)] = 1.0;
        }
        KalmanBoxFilter {
            cfg,
            transition,
            observation,
        }
    }

    pub fn config(&self) -> &MotionConfig {
        &self.cfg
    }

    pub fn init(&self, b: &BBox) -> Result<KalmanState, MotionError> {
        if b.empty {
            return Err(MotionError::EmptyBox);
        }
        if !b.is_finite() {
            return Err(MotionError::NonFiniteMeasurement([b.cx, b.cy, b.w, b.h]));
        }
        let mean = StateVector::from_column_slice(&[b.cx, b.cy, b.w, b.h, 0.0, 0.0, 0.0, 0.0]);
        let pos_std = 2.0 * self.cfg.measure_noise * b.h;
        let vel_std = 10.0 * self.cfg.measure_noise * b.h;
        let mut diag = StateVector::zeros();
        for i in 0..4 {
            diag[i] = pos_std * pos_std;
            diag[i + 4] = vel_std * vel_std;
        }
        Ok(KalmanState {
            mean,
            cov: StateCovariance::from_diagonal(&diag),
            frames_since_init: 0,
            consecutive_updates: 0,
        })
    }

    fn process_noise(&self, h: f64) -> StateCovariance {
        let h = h.max(MIN_BOX_SIZE);
        let pos = (self.cfg.process_noise_pos * h).powi(2);
        let vel = (self.cfg.process_noise_vel * h).powi(2);
        StateCovariance::from_diagonal(&StateVector::from_column_slice(&[
            pos, pos, pos, pos, vel, vel, vel, vel,
        ]))
    }

    /// One constant-velocity step. Returns the propagated state and its box.
    pub fn predict(&self, s: &KalmanState) -> (KalmanState, BBox) {
        let f = &self.transition;
        let mean = f * s.mean;
        let mut cov = f * s.cov * f.transpose() + self.process_noise(s.mean[3]);
        symmetrize(&mut cov);
        let next = KalmanState {
            mean,
            cov,
            frames_since_init: s.frames_since_init + 1,
            consecutive_updates: s.consecutive_updates,
        };
        let b = next.bbox();
        (next, b)
    }

    /// Joseph-form correction with measurement `z`.
    pub fn update(&self, s: &KalmanState, z: &BBox) -> Result<KalmanState, MotionError> {
        if !z.is_finite() || z.empty {
            return Err(MotionError::NonFiniteMeasurement([z.cx, z.cy, z.w, z.h]));
        }
        let h = &self.observation;
        let r_std = self.cfg.measure_noise * z.h.max(MIN_BOX_SIZE);
        let r = SMatrix::<f64, 4, 4>::identity() * (r_std * r_std);

        let innovation_cov = h * s.cov * h.transpose() + r;
        let chol = innovation_cov
            .cholesky()
            .ok_or(MotionError::SingularInnovation)?;
        // K = P Hᵀ S⁻¹, solved as S Kᵀ = H P.
        let gain = chol.solve(&(h * s.cov)).transpose();

        let measured = Measurement::new(z.cx, z.cy, z.w, z.h);
        let residual = measured - h * s.mean;
        let mut mean = s.mean + gain * residual;
        mean[2] = mean[2].max(MIN_BOX_SIZE);
        mean[3] = mean[3].max(MIN_BOX_SIZE);

        let i_kh = StateCovariance::identity() - gain * h;
        let mut cov = i_kh * s.cov * i_kh.transpose() + gain * r * gain.transpose();
        symmetrize(&mut cov);

        Ok(KalmanState {
            mean,
            cov,
            frames_since_init: s.frames_since_init,
            consecutive_updates: s.consecutive_updates + 1,
        })
    }

    /// Frame without a measurement: the stability counter restarts.
    pub fn miss(&self, s: &KalmanState) -> KalmanState {
        KalmanState {
            consecutive_updates: 0,
            ..s.clone()
        }
    }

    pub fn is_active(&self, s: &KalmanState) -> bool {
        motion_active(s, &self.cfg)
    }
}

pub fn motion_active(s: &KalmanState, cfg: &MotionConfig) -> bool {
    s.consecutive_updates >= cfg.tau_stab
}

/// KF-IoU score of every candidate against the predicted box.
pub fn kf_iou_scores(predicted: &BBox, candidates: &[CandidateMask]) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| iou(predicted, &mask_to_bbox(&c.mask)))
        .collect()
}

fn symmetrize(m: &mut StateCovariance) {
    for i in 0..8 {
        for j in (i + 1)..8 {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
