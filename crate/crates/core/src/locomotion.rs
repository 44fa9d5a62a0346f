//! Locomotion mode classifier and the avatar kinematics driven by it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Vec2, Vec3};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Mode {
    #[default]
    Stationary,
    NaturalWalking,
    WalkingInPlace,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Stationary, Mode::NaturalWalking, Mode::WalkingInPlace];
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocomotionState {
    pub mode: Mode,
    /// Consecutive ticks with speed above `v_t`.
    pub frames_above_threshold: u32,
    /// Continuous time spent below `v_t - exit_margin`, s.
    pub time_below_exit_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocomotionConfig {
    /// Speed threshold separating natural walking from the rest, m/s.
    pub v_t: f64,
    pub exit_margin: f64,
    pub enter_frames: u32,
    pub exit_dwell: f64,
    /// Virtual distance per step at reference knee height, m.
    pub wip_gain: f64,
    pub wip_reference_height: f64,
    pub wip_max_speed: f64,
}

impl Default for LocomotionConfig {
    fn default() -> Self {
        Self {
            v_t: 0.80,
            exit_margin: 0.10,
            enter_frames: 3,
            exit_dwell: 0.3,
            wip_gain: 0.5,
            wip_reference_height: 0.25,
            wip_max_speed: 2.0,
        }
    }
}

impl LocomotionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.v_t > self.exit_margin
            && self.exit_margin > 0.0
            && self.enter_frames >= 1
            && self.exit_dwell >= 0.0
            && self.wip_gain > 0.0
            && self.wip_reference_height > 0.0
            && self.wip_max_speed > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid locomotion config {self:?}")))
        }
    }
}

// absorbs summation error when dwell time accumulates over many ticks
const DWELL_EPS: f64 = 1e-9;

/// Advances the classifier by one tick.
pub fn cwip_transition(
    state: LocomotionState,
    speed: f64,
    stepping: bool,
    dt: f64,
    cfg: &LocomotionConfig,
) -> LocomotionState {
    let frames_above_threshold = if speed > cfg.v_t {
        state.frames_above_threshold.saturating_add(1)
    } else {
        0
    };
    let time_below_exit_threshold = if speed < cfg.v_t - cfg.exit_margin {
        state.time_below_exit_threshold + dt
    } else {
        0.0
    };
    let not_walking = if stepping {
        Mode::WalkingInPlace
    } else {
        Mode::Stationary
    };
    let mode = match state.mode {
        Mode::NaturalWalking if time_below_exit_threshold + DWELL_EPS >= cfg.exit_dwell => {
            not_walking
        }
        Mode::NaturalWalking => Mode::NaturalWalking,
        _ if frames_above_threshold >= cfg.enter_frames => Mode::NaturalWalking,
        _ => not_walking,
    };
    LocomotionState {
        mode,
        frames_above_threshold,
        time_below_exit_threshold,
    }
}

/// Virtual forward speed while walking in place, linear in pace and in knee
/// height relative to the reference, clamped to the configured maximum.
pub fn wip_virtual_speed(pace: f64, peak_height: f64, cfg: &LocomotionConfig) -> f64 {
    if pace <= 0.0 {
        return 0.0;
    }
    let v = cfg.wip_gain * pace * (peak_height.max(0.0) / cfg.wip_reference_height);
    v.min(cfg.wip_max_speed)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AvatarPose {
    pub position: Vec3,
    pub yaw: f64,
}

/// Moves the avatar for one tick. Real displacement is always replicated
/// 1:1; walking in place adds `v_wip·dt` along the gaze heading.
pub fn integrate_avatar(
    pose: AvatarPose,
    mode: Mode,
    real_displacement: Vec2,
    real_yaw: f64,
    v_wip: f64,
    dt: f64,
) -> AvatarPose {
    let mut step = real_displacement;
    if mode == Mode::WalkingInPlace {
        step = step + Vec2::from_yaw(real_yaw) * (v_wip * dt);
    }
    AvatarPose {
        position: Vec3::new(
            pose.position.x + step.x,
            pose.position.y,
            pose.position.z + step.z,
        ),
        yaw: normalize_angle(real_yaw),
    }
}
