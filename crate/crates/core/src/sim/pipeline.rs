use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::Result;
use crate::geometry::{normalize_angle, Pose2D, RoomModel, Vec2, Vec3};
use crate::locomotion::{
    cwip_transition, integrate_avatar, wip_virtual_speed, AvatarPose, LocomotionState, Mode,
};
use crate::sim::metrics::{MetricsAccumulator, MetricsReport};
use crate::tracking::{SkeletonFrame, Tracker};
use crate::warning::{compose_warning_frame, AlertState, WarningFrame};

/// Person's smoothed ground position and head yaw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPose {
    pub position: Vec2,
    pub yaw: f64,
}

/// Everything produced for one tick; one line of the frame log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub tick: u64,
    pub t: f64,
    pub mode: Mode,
    pub real: RealPose,
    pub avatar: AvatarPose,
    pub chest_speed: f64,
    pub warming_up: bool,
    pub stepping: bool,
    pub pace: f64,
    pub peak_height: f64,
    pub v_wip: f64,
    pub warning: WarningFrame,
}

/// Tracking → classification → avatar → warnings, one frame at a time.
#[derive(Clone, Debug)]
pub struct Pipeline {
    cfg: EngineConfig,
    room: RoomModel,
    tracker: Tracker,
    loco: LocomotionState,
    alert: AlertState,
    avatar: Option<AvatarPose>,
    prev_ground: Option<Vec2>,
    metrics: MetricsAccumulator,
    tick: u64,
}

impl Pipeline {
    pub fn new(room: RoomModel, cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            tracker: Tracker::new(cfg.tracking.clone())?,
            metrics: MetricsAccumulator::new(cfg.sim.collision_radius),
            cfg,
            room,
            loco: LocomotionState::default(),
            alert: AlertState::default(),
            avatar: None,
            prev_ground: None,
            tick: 0,
        })
    }

    pub fn room(&self) -> &RoomModel {
        &self.room
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn mode(&self) -> Mode {
        self.loco.mode
    }

    pub fn alert(&self) -> &AlertState {
        &self.alert
    }

    pub fn metrics(&self) -> MetricsReport {
        self.metrics.report()
    }

    pub fn step(&mut self, frame: &SkeletonFrame) -> Result<FrameRecord> {
        let out = self.tracker.process(frame)?;
        let s = &out.smoothed;
        let ground = s.chest.ground();
        let yaw = normalize_angle(s.head_yaw);
        let v_wip = wip_virtual_speed(
            out.steps.pace,
            out.steps.last_peak_height,
            &self.cfg.locomotion,
        );

        let avatar = match (self.avatar, out.dt, self.prev_ground) {
            (Some(pose), Some(dt), Some(prev)) => {
                self.loco = cwip_transition(
                    self.loco,
                    out.motion.chest_speed_h,
                    out.stepping,
                    dt,
                    &self.cfg.locomotion,
                );
                integrate_avatar(pose, self.loco.mode, ground - prev, yaw, v_wip, dt)
            }
            _ => AvatarPose {
                position: Vec3::new(ground.x, 0.0, ground.z),
                yaw,
            },
        };
        self.avatar = Some(avatar);
        self.prev_ground = Some(ground);

        let pose = Pose2D::new(ground, yaw);
        let (warning, alert) =
            compose_warning_frame(&pose, &self.room, &self.cfg.warning, &self.alert, frame.t);
        self.alert = alert;
        self.metrics
            .observe(&self.room, frame.t, ground, self.loco.mode);

        let record = FrameRecord {
            tick: self.tick,
            t: frame.t,
            mode: self.loco.mode,
            real: RealPose {
                position: ground,
                yaw: pose.yaw,
            },
            avatar,
            chest_speed: out.motion.chest_speed_h,
            warming_up: out.motion.warming_up,
            stepping: out.stepping,
            pace: out.steps.pace,
            peak_height: out.steps.last_peak_height,
            v_wip,
            warning,
        };
        self.tick += 1;
        Ok(record)
    }
}
